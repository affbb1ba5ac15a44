//! Column catalogue for result files.
//!
//! The table below is the single source of truth; `schema/vista_columns.csv`
//! is its rendered form and a test keeps the two identical.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// `Time` and `Step_number`, present in every file.
    Common,
    Vut,
    Actor,
    ActorPerceived,
    Obstacle,
    ObstaclePerceived,
    TrafficLight,
    TrafficLightPerceived,
}

impl Role {
    pub fn tag(self) -> &'static str {
        match self {
            Role::Common => "common",
            Role::Vut => "vut",
            Role::Actor => "actor",
            Role::ActorPerceived => "actor_perceived",
            Role::Obstacle => "obstacle",
            Role::ObstaclePerceived => "obstacle_perceived",
            Role::TrafficLight => "traffic_light",
            Role::TrafficLightPerceived => "traffic_light_perceived",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Float,
    /// Float that may be `inf`.
    FloatOrInf,
    Integer,
    Bool,
    Text,
    Id,
    PositionArray,
}

impl Kind {
    pub fn tag(self) -> &'static str {
        match self {
            Kind::Float => "float",
            Kind::FloatOrInf => "float_or_inf",
            Kind::Integer => "integer",
            Kind::Bool => "bool",
            Kind::Text => "text",
            Kind::Id => "id",
            Kind::PositionArray => "position_array",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Requirement {
    Mandatory,
    Optional,
    /// Either the WGS84 pair or the VCS pair of the entity position.
    PositionPair,
}

impl Requirement {
    pub fn tag(self) -> &'static str {
        match self {
            Requirement::Mandatory => "mandatory",
            Requirement::Optional => "optional",
            Requirement::PositionPair => "position_pair",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Column {
    pub name: &'static str,
    pub role: Role,
    pub unit: &'static str,
    pub kind: Kind,
    pub requirement: Requirement,
    pub description: &'static str,
}

const fn col(
    name: &'static str,
    role: Role,
    unit: &'static str,
    kind: Kind,
    requirement: Requirement,
    description: &'static str,
) -> Column {
    Column {
        name,
        role,
        unit,
        kind,
        requirement,
        description,
    }
}

use Kind::*;
use Requirement::*;
use Role::*;

pub const TIME: &str = "Time";
pub const STEP: &str = "Step_number";
pub const ACTOR_ID: &str = "Actor_Id";
pub const OBST_ID: &str = "Obst_Id";
pub const TRAFFIC_ID: &str = "Traffic_Ctrl_Id";

pub const COLUMNS: &[Column] = &[
    col(TIME, Common, "s", Float, Mandatory, "simulation time since start"),
    col(STEP, Common, "-", Integer, Mandatory, "simulation step counter"),
    col("VUT_pos_lat", Vut, "deg", Float, Mandatory, "VUT centre latitude (WGS84)"),
    col("VUT_pos_lon", Vut, "deg", Float, Mandatory, "VUT centre longitude (WGS84)"),
    col("VUT_pos_elev", Vut, "m", Float, Optional, "VUT elevation above the reference plane"),
    col("VUT_travelled_dist", Vut, "m", Float, Mandatory, "distance travelled since start"),
    col("VUT_speed", Vut, "m/s", Float, Mandatory, "VUT speed"),
    col("VUT_acc_lat", Vut, "m/s^2", Float, Mandatory, "lateral acceleration, positive to the right"),
    col("VUT_acc_long", Vut, "m/s^2", Float, Mandatory, "longitudinal acceleration, positive forward"),
    col("VUT_yaw_rate", Vut, "deg/s", Float, Mandatory, "yaw rate, positive clockwise seen from above"),
    col("VUT_pitch_rate", Vut, "deg/s", Float, Optional, "pitch rate"),
    col("VUT_roll_rate", Vut, "deg/s", Float, Optional, "roll rate"),
    col("VUT_heading", Vut, "deg", Float, Mandatory, "heading from North, clockwise, [0, 360)"),
    col("VUT_ind_left_front", Vut, "-", Bool, Mandatory, "front left indicator lit"),
    col("VUT_ind_left_rear", Vut, "-", Bool, Mandatory, "rear left indicator lit"),
    col("VUT_ind_right_front", Vut, "-", Bool, Mandatory, "front right indicator lit"),
    col("VUT_ind_right_rear", Vut, "-", Bool, Mandatory, "rear right indicator lit"),
    col("VUT_ind_brake", Vut, "-", Bool, Mandatory, "brake lights lit"),
    col("VUT_ind_reverse", Vut, "-", Bool, Mandatory, "reversing lights lit"),
    col("VUT_ind_hazard", Vut, "-", Bool, Mandatory, "hazard lights lit"),
    col("VUT_throttle", Vut, "-", Float, Mandatory, "throttle position in [0, 1]"),
    col("VUT_brake", Vut, "-", Float, Mandatory, "brake position in [0, 1]"),
    col("VUT_steering_angle", Vut, "deg", Float, Mandatory, "steering wheel angle, positive right"),
    col("VUT_drive_status", Vut, "-", Text, Mandatory, "autonomous, manual, teleoperation or an extension tag"),
    col("VUT_special_op", Vut, "-", Text, Mandatory, "normal, environmental_service or an extension tag"),
    col(ACTOR_ID, Actor, "-", Id, Mandatory, "actor identifier, starts an actor group"),
    col("Actor_type", Actor, "-", Text, Mandatory, "tsv, vru_pedestrian, vru_cyclist, vru_pmd or a numeric code"),
    col("Actor_pos_true_lat", Actor, "deg", Float, PositionPair, "actor centre latitude (WGS84)"),
    col("Actor_pos_true_lon", Actor, "deg", Float, PositionPair, "actor centre longitude (WGS84)"),
    col("Actor_pos_true_elev", Actor, "m", Float, Optional, "actor elevation"),
    col("Actor_pos_true_x", Actor, "m", Float, PositionPair, "actor centre x in VUT coordinates"),
    col("Actor_pos_true_y", Actor, "m", Float, PositionPair, "actor centre y in VUT coordinates"),
    col("Actor_pos_true_z", Actor, "m", Float, Optional, "actor centre z in VUT coordinates"),
    col("Actor_bbox_true", Actor, "-", PositionArray, Optional, "ground-truth bounding shape, same frame as the position"),
    col("Actor_bbox_perceived", ActorPerceived, "-", PositionArray, Optional, "bounding shape as perceived by the VUT"),
    col("Actor_vel_abs", Actor, "m/s", Float, Mandatory, "actor speed"),
    col("Actor_vel_lat", Actor, "m/s", Float, Mandatory, "lateral velocity in the actor frame, positive right"),
    col("Actor_vel_long", Actor, "m/s", Float, Mandatory, "longitudinal velocity in the actor frame"),
    col("Actor_acc_lat", Actor, "m/s^2", Float, Mandatory, "lateral acceleration"),
    col("Actor_acc_long", Actor, "m/s^2", Float, Mandatory, "longitudinal acceleration"),
    col("Actor_heading", Actor, "deg", Float, Mandatory, "heading from North, clockwise; empty when unknown"),
    col("Actor_TTC", Actor, "s", FloatOrInf, Mandatory, "time to contact with the VUT, inf when none; ends the group"),
    col(OBST_ID, Obstacle, "-", Id, Mandatory, "obstacle identifier, starts an obstacle group"),
    col("Obst_type", Obstacle, "-", Integer, Mandatory, "obstacle type code"),
    col("Obst_pos_lat", Obstacle, "deg", Float, PositionPair, "obstacle reference latitude (WGS84)"),
    col("Obst_pos_lon", Obstacle, "deg", Float, PositionPair, "obstacle reference longitude (WGS84)"),
    col("Obst_pos_elev", Obstacle, "m", Float, Optional, "obstacle elevation"),
    col("Obst_pos_x", Obstacle, "m", Float, PositionPair, "obstacle reference x in VUT coordinates"),
    col("Obst_pos_y", Obstacle, "m", Float, PositionPair, "obstacle reference y in VUT coordinates"),
    col("Obst_pos_z", Obstacle, "m", Float, Optional, "obstacle reference z in VUT coordinates"),
    col("Obst_poly_true", Obstacle, "-", PositionArray, Mandatory, "ground-truth outline, same frame as the position"),
    col("Obst_poly_perceived", ObstaclePerceived, "-", PositionArray, Optional, "outline as perceived by the VUT"),
    col("Obst_NTD", Obstacle, "s", FloatOrInf, Mandatory, "nearest temporal distance to the VUT, inf when none"),
    col(TRAFFIC_ID, TrafficLight, "-", Id, Mandatory, "traffic light controller identifier"),
    col("Traffic_Ctrl_phase", TrafficLight, "-", Text, Mandatory, "go, stop, go_exclusive or an extension tag"),
    col("Traffic_Ctrl_phase_perceived", TrafficLightPerceived, "-", Text, Optional, "phase as perceived by the VUT"),
];

pub fn column(name: &str) -> Option<&'static Column> {
    COLUMNS.iter().find(|c| c.name == name)
}

pub fn role_columns(role: Role) -> impl Iterator<Item = &'static Column> {
    COLUMNS.iter().filter(move |c| c.role == role)
}

/// Entity group kinds and their column prefixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Group {
    Actor,
    Obstacle,
    TrafficLight,
}

impl Group {
    pub const ALL: [Group; 3] = [Group::Actor, Group::Obstacle, Group::TrafficLight];

    pub fn prefix(self) -> &'static str {
        match self {
            Group::Actor => "Actor_",
            Group::Obstacle => "Obst_",
            Group::TrafficLight => "Traffic_Ctrl_",
        }
    }

    pub fn id_column(self) -> &'static str {
        match self {
            Group::Actor => ACTOR_ID,
            Group::Obstacle => OBST_ID,
            Group::TrafficLight => TRAFFIC_ID,
        }
    }

    pub fn true_role(self) -> Role {
        match self {
            Group::Actor => Role::Actor,
            Group::Obstacle => Role::Obstacle,
            Group::TrafficLight => Role::TrafficLight,
        }
    }

    pub fn perceived_role(self) -> Role {
        match self {
            Group::Actor => Role::ActorPerceived,
            Group::Obstacle => Role::ObstaclePerceived,
            Group::TrafficLight => Role::TrafficLightPerceived,
        }
    }

    /// Columns of one group in a flat file, in canonical order.
    pub fn flat_columns(self) -> impl Iterator<Item = &'static Column> {
        COLUMNS
            .iter()
            .filter(move |c| c.role == self.true_role() || c.role == self.perceived_role())
    }

    pub fn of_column(name: &str) -> Option<Group> {
        Group::ALL.into_iter().find(|g| name.starts_with(g.prefix()))
    }
}

/// Position column pair names `(lat, lon, elev, x, y, z)` for a group.
pub fn position_columns(group: Group) -> Option<[&'static str; 6]> {
    match group {
        Group::Actor => Some([
            "Actor_pos_true_lat",
            "Actor_pos_true_lon",
            "Actor_pos_true_elev",
            "Actor_pos_true_x",
            "Actor_pos_true_y",
            "Actor_pos_true_z",
        ]),
        Group::Obstacle => Some([
            "Obst_pos_lat",
            "Obst_pos_lon",
            "Obst_pos_elev",
            "Obst_pos_x",
            "Obst_pos_y",
            "Obst_pos_z",
        ]),
        Group::TrafficLight => None,
    }
}

/// Renders the catalogue as CSV.
pub fn render_csv() -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "role", "unit", "kind", "requirement", "description"])
        .unwrap();
    for c in COLUMNS {
        w.write_record([
            c.name,
            c.role.tag(),
            c.unit,
            c.kind.tag(),
            c.requirement.tag(),
            c.description,
        ])
        .unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

/// The shipped schema file.
pub const SCHEMA_CSV: &str = include_str!("../../schema/vista_columns.csv");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_file_matches_table() {
        assert_eq!(SCHEMA_CSV, render_csv());
    }

    #[test]
    fn names_are_unique_and_prefixed() {
        let mut seen = std::collections::BTreeSet::new();
        for c in COLUMNS {
            assert!(seen.insert(c.name), "duplicate {}", c.name);
            let expected = match c.role {
                Role::Common => None,
                Role::Vut => Some("VUT_"),
                Role::Actor | Role::ActorPerceived => Some("Actor_"),
                Role::Obstacle | Role::ObstaclePerceived => Some("Obst_"),
                Role::TrafficLight | Role::TrafficLightPerceived => Some("Traffic_Ctrl_"),
            };
            if let Some(p) = expected {
                assert!(c.name.starts_with(p), "{}", c.name);
            }
        }
    }

    #[test]
    fn actor_group_runs_from_id_to_ttc() {
        let cols: Vec<_> = Group::Actor.flat_columns().map(|c| c.name).collect();
        assert_eq!(cols.first(), Some(&"Actor_Id"));
        assert_eq!(cols.last(), Some(&"Actor_TTC"));
    }
}
