//! Domain types for ViSTA result traces.
//!
//! Everything here is a plain value: traces are built once (by the parser
//! or the synthesizer) and then shared read-only between evaluators.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// WGS84 world position. Elevation is relative to a common reference plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPosition {
    pub lat: f64,
    pub lon: f64,
    pub elev: Option<f64>,
}

impl GeoPosition {
    pub fn new(lat: f64, lon: f64) -> Self {
        GeoPosition {
            lat,
            lon,
            elev: None,
        }
    }

    pub fn with_elev(mut self, elev: f64) -> Self {
        self.elev = Some(elev);
        self
    }

    pub fn is_valid(&self) -> bool {
        self.lat.is_finite()
            && self.lon.is_finite()
            && (-90.0..=90.0).contains(&self.lat)
            && (-180.0..=180.0).contains(&self.lon)
            && self.elev.is_none_or(f64::is_finite)
    }
}

/// Position in the VUT's vehicle coordinate system (SAE J670, Z-down):
/// origin at the geometric centre, +x forward, +y right, +z down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VcsPosition {
    pub x: f64,
    pub y: f64,
    pub z: Option<f64>,
}

impl VcsPosition {
    pub fn new(x: f64, y: f64) -> Self {
        VcsPosition { x, y, z: None }
    }

    pub fn is_valid(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_none_or(f64::is_finite)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Wgs84,
    Vcs,
}

/// A frame-tagged position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "frame", rename_all = "snake_case")]
pub enum Position {
    Wgs84(GeoPosition),
    Vcs(VcsPosition),
}

impl Position {
    pub fn frame(&self) -> Frame {
        match self {
            Position::Wgs84(_) => Frame::Wgs84,
            Position::Vcs(_) => Frame::Vcs,
        }
    }

    pub fn is_valid(&self) -> bool {
        match self {
            Position::Wgs84(p) => p.is_valid(),
            Position::Vcs(p) => p.is_valid(),
        }
    }
}

/// Heading in degrees, 0 = geographic North, clockwise positive, kept in [0, 360).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HeadingDeg(f64);

impl HeadingDeg {
    pub fn new(degrees: f64) -> Self {
        HeadingDeg(normalize_degrees(degrees))
    }

    pub fn degrees(self) -> f64 {
        self.0
    }

    pub fn radians(self) -> f64 {
        self.0.to_radians()
    }

    /// Smallest absolute angle between two headings, in [0, 180].
    pub fn angle_to(self, other: HeadingDeg) -> f64 {
        let d = (other.0 - self.0).abs() % 360.0;
        if d > 180.0 {
            360.0 - d
        } else {
            d
        }
    }

    pub fn reversed(self) -> HeadingDeg {
        HeadingDeg::new(self.0 + 180.0)
    }
}

fn normalize_degrees(d: f64) -> f64 {
    let r = d.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Indicators {
    pub left_front: bool,
    pub left_rear: bool,
    pub right_front: bool,
    pub right_rear: bool,
    pub brake: bool,
    pub reverse: bool,
    pub hazard: bool,
}

/// Applicant-defined tags outside the known set are kept verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveStatus {
    Autonomous,
    Manual,
    Teleoperation,
    Extension(String),
}

impl DriveStatus {
    pub fn from_tag(tag: &str) -> Self {
        match tag {
            "autonomous" => DriveStatus::Autonomous,
            "manual" => DriveStatus::Manual,
            "teleoperation" => DriveStatus::Teleoperation,
            other => DriveStatus::Extension(other.to_string()),
        }
    }

    pub fn tag(&self) -> &str {
        match self {
            DriveStatus::Autonomous => "autonomous",
            DriveStatus::Manual => "manual",
            DriveStatus::Teleoperation => "teleoperation",
            DriveStatus::Extension(t) => t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecialOp {
    Normal,
    EnvironmentalService,
    Extension(String),
}

impl SpecialOp {
    pub fn from_tag(tag: &str) -> Self {
        match tag {
            "normal" => SpecialOp::Normal,
            "environmental_service" => SpecialOp::EnvironmentalService,
            other => SpecialOp::Extension(other.to_string()),
        }
    }

    pub fn tag(&self) -> &str {
        match self {
            SpecialOp::Normal => "normal",
            SpecialOp::EnvironmentalService => "environmental_service",
            SpecialOp::Extension(t) => t,
        }
    }
}

/// Numeric obstacle type code, e.g. `construction_cones = 100`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObstacleType(pub u32);

impl ObstacleType {
    pub const CONSTRUCTION_CONES: ObstacleType = ObstacleType(100);
    pub const CARTON: ObstacleType = ObstacleType(101);
    pub const FALLEN_BRANCH: ObstacleType = ObstacleType(102);

    /// Codes 200..=299 are fixed road or kerbside infrastructure (lampposts,
    /// signposts, pillars, trees, light controllers, kerbs). The exclusion
    /// zone does not apply to them.
    pub const INFRASTRUCTURE: std::ops::RangeInclusive<u32> = 200..=299;

    /// First code of the obstacle code space. Actor type codes live below it.
    pub const FIRST_CODE: u32 = 100;

    pub fn is_fixed_infrastructure(self) -> bool {
        Self::INFRASTRUCTURE.contains(&self.0)
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "construction_cones" => Self::CONSTRUCTION_CONES,
            "carton" => Self::CARTON,
            "fallen_branch" => Self::FALLEN_BRANCH,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActorType {
    Tsv,
    VruPedestrian,
    VruCyclist,
    VruPmd,
    Extension(u32),
}

impl ActorType {
    pub fn from_code(code: u32) -> Self {
        match code {
            1 => ActorType::Tsv,
            2 => ActorType::VruPedestrian,
            3 => ActorType::VruCyclist,
            4 => ActorType::VruPmd,
            other => ActorType::Extension(other),
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "tsv" => Some(ActorType::Tsv),
            "vru_pedestrian" => Some(ActorType::VruPedestrian),
            "vru_cyclist" => Some(ActorType::VruCyclist),
            "vru_pmd" => Some(ActorType::VruPmd),
            other => other.parse::<u32>().ok().map(ActorType::from_code),
        }
    }

    pub fn tag(&self) -> String {
        match self {
            ActorType::Tsv => "tsv".into(),
            ActorType::VruPedestrian => "vru_pedestrian".into(),
            ActorType::VruCyclist => "vru_cyclist".into(),
            ActorType::VruPmd => "vru_pmd".into(),
            ActorType::Extension(code) => code.to_string(),
        }
    }

    /// Actor records that reuse an obstacle type code.
    pub fn obstacle_code(&self) -> Option<ObstacleType> {
        match *self {
            ActorType::Extension(code) if code >= ObstacleType::FIRST_CODE => {
                Some(ObstacleType(code))
            }
            _ => None,
        }
    }
}

/// Serialized polygon. Stored open: the closing vertex is never repeated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingShape {
    pub frame: Frame,
    pub vertices: Vec<Position>,
}

impl BoundingShape {
    /// Builds an open polygon, dropping a trailing vertex equal to the first.
    pub fn new(frame: Frame, mut vertices: Vec<Position>) -> Self {
        if vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        BoundingShape { frame, vertices }
    }

    pub fn from_geo(vertices: impl IntoIterator<Item = GeoPosition>) -> Self {
        Self::new(
            Frame::Wgs84,
            vertices.into_iter().map(Position::Wgs84).collect(),
        )
    }

    pub fn from_vcs(vertices: impl IntoIterator<Item = VcsPosition>) -> Self {
        Self::new(Frame::Vcs, vertices.into_iter().map(Position::Vcs).collect())
    }

    /// Vertex count excluding consecutive duplicates.
    pub fn distinct_vertices(&self) -> usize {
        let n = self.vertices.len();
        (0..n)
            .filter(|&i| self.vertices[i] != self.vertices[(i + 1) % n])
            .count()
    }

    pub fn frames_consistent(&self) -> bool {
        self.vertices.iter().all(|v| v.frame() == self.frame)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VutState {
    pub time: f64,
    pub step: u64,
    pub pos: GeoPosition,
    pub travelled: f64,
    pub speed: f64,
    pub acc_lat: f64,
    pub acc_long: f64,
    pub yaw_rate: f64,
    pub pitch_rate: Option<f64>,
    pub roll_rate: Option<f64>,
    pub heading: HeadingDeg,
    pub indicators: Indicators,
    pub throttle: f64,
    pub brake: f64,
    pub steering_angle: f64,
    pub drive_status: DriveStatus,
    pub special_op: SpecialOp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorState {
    pub id: String,
    pub time: f64,
    pub step: u64,
    pub actor_type: ActorType,
    pub pos: Position,
    pub bbox_true: Option<BoundingShape>,
    pub bbox_perceived: Option<BoundingShape>,
    pub speed: f64,
    pub vel_lat: f64,
    pub vel_long: f64,
    pub acc_lat: f64,
    pub acc_long: f64,
    pub heading: Option<HeadingDeg>,
    /// Nearest temporal distance reported by the toolchain; +inf when unreachable.
    pub ttc: f64,
}

impl ActorState {
    fn is_motionless(&self) -> bool {
        self.speed == 0.0
            && self.vel_lat == 0.0
            && self.vel_long == 0.0
            && self.acc_lat == 0.0
            && self.acc_long == 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleState {
    pub id: String,
    pub time: f64,
    pub step: u64,
    pub obst_type: ObstacleType,
    pub pos: Position,
    pub poly_true: BoundingShape,
    pub poly_perceived: Option<BoundingShape>,
    pub ntd: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Go,
    Stop,
    GoExclusive,
    Extension(String),
}

impl Phase {
    pub fn from_tag(tag: &str) -> Self {
        match tag {
            "go" => Phase::Go,
            "stop" => Phase::Stop,
            "go_exclusive" => Phase::GoExclusive,
            other => Phase::Extension(other.to_string()),
        }
    }

    pub fn tag(&self) -> &str {
        match self {
            Phase::Go => "go",
            Phase::Stop => "stop",
            Phase::GoExclusive => "go_exclusive",
            Phase::Extension(t) => t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficControllerState {
    pub id: String,
    pub time: f64,
    pub step: u64,
    pub phase: Phase,
    pub phase_perceived: Option<Phase>,
}

/// One test-case run.
///
/// Environment entities are keyed by id; each record list is ordered by step
/// and every step also appears in the VUT record list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub testcase_id: String,
    pub run_id: u32,
    pub vut: Vec<VutState>,
    pub actors: BTreeMap<String, Vec<ActorState>>,
    pub obstacles: BTreeMap<String, Vec<ObstacleState>>,
    pub controllers: BTreeMap<String, Vec<TrafficControllerState>>,
}

impl Trace {
    pub fn new(testcase_id: impl Into<String>, run_id: u32) -> Self {
        Trace {
            testcase_id: testcase_id.into(),
            run_id,
            vut: Vec::new(),
            actors: BTreeMap::new(),
            obstacles: BTreeMap::new(),
            controllers: BTreeMap::new(),
        }
    }

    /// Median VUT sample period in seconds.
    pub fn median_period(&self) -> Option<f64> {
        let mut dts: Vec<f64> = self
            .vut
            .windows(2)
            .map(|w| w[1].time - w[0].time)
            .collect();
        if dts.is_empty() {
            return None;
        }
        dts.sort_by(f64::total_cmp);
        let mid = dts.len() / 2;
        Some(if dts.len() % 2 == 0 {
            0.5 * (dts[mid - 1] + dts[mid])
        } else {
            dts[mid]
        })
    }

    /// Logging frequency implied by the median sample period.
    pub fn sample_rate(&self) -> Option<f64> {
        self.median_period().filter(|p| *p > 0.0).map(|p| 1.0 / p)
    }

    pub fn duration(&self) -> f64 {
        match (self.vut.first(), self.vut.last()) {
            (Some(a), Some(b)) => b.time - a.time,
            _ => 0.0,
        }
    }

    pub fn vut_at_step(&self, step: u64) -> Option<&VutState> {
        self.vut
            .binary_search_by_key(&step, |s| s.step)
            .ok()
            .map(|i| &self.vut[i])
    }

    pub fn has_environment(&self) -> bool {
        !(self.actors.is_empty() && self.obstacles.is_empty() && self.controllers.is_empty())
    }

    /// Moves actors that are really static obstacles into the obstacle map.
    ///
    /// An actor qualifies when its type code lies in the obstacle code space,
    /// every motion field is exactly zero in every record, and it carries a
    /// true bounding shape. Ids already used by an obstacle are left alone.
    pub fn normalize_obstacle_actors(&mut self) {
        let movable: Vec<String> = self
            .actors
            .iter()
            .filter(|(id, recs)| {
                !self.obstacles.contains_key(*id)
                    && !recs.is_empty()
                    && recs.iter().all(|r| {
                        r.actor_type.obstacle_code().is_some()
                            && r.actor_type == recs[0].actor_type
                            && r.is_motionless()
                            && r.bbox_true.is_some()
                    })
            })
            .map(|(id, _)| id.clone())
            .collect();

        for id in movable {
            let recs = self.actors.remove(&id).unwrap_or_default();
            let obstacles = recs
                .into_iter()
                .filter_map(|r| {
                    let obst_type = r.actor_type.obstacle_code()?;
                    Some(ObstacleState {
                        id: r.id,
                        time: r.time,
                        step: r.step,
                        obst_type,
                        pos: r.pos,
                        poly_true: r.bbox_true?,
                        poly_perceived: r.bbox_perceived,
                        ntd: r.ttc,
                    })
                })
                .collect();
            self.obstacles.insert(id, obstacles);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VehicleClass {
    Class3,
    Class4,
    AesvClass3,
    AesvClass4,
}

impl fmt::Display for VehicleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VehicleClass::Class3 => "class3",
            VehicleClass::Class4 => "class4",
            VehicleClass::AesvClass3 => "aesv_class3",
            VehicleClass::AesvClass4 => "aesv_class4",
        })
    }
}

impl std::str::FromStr for VehicleClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "class3" => Ok(VehicleClass::Class3),
            "class4" => Ok(VehicleClass::Class4),
            "aesv_class3" => Ok(VehicleClass::AesvClass3),
            "aesv_class4" => Ok(VehicleClass::AesvClass4),
            other => Err(format!("unknown vehicle class `{other}`")),
        }
    }
}

/// Outer bounds of the VUT in its own frame. AESV brushes are not part of
/// the footprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleProfile {
    pub vehicle_class: VehicleClass,
    pub length: f64,
    pub width: f64,
    pub footprint: BoundingShape,
}

impl VehicleProfile {
    /// Rectangular footprint centred on the VCS origin.
    pub fn rectangle(vehicle_class: VehicleClass, length: f64, width: f64) -> Self {
        let (hl, hw) = (length / 2.0, width / 2.0);
        let footprint = BoundingShape::from_vcs([
            VcsPosition::new(hl, -hw),
            VcsPosition::new(hl, hw),
            VcsPosition::new(-hl, hw),
            VcsPosition::new(-hl, -hw),
        ]);
        VehicleProfile {
            vehicle_class,
            length,
            width,
            footprint,
        }
    }

    /// Typical outer dimensions per class: passenger car, bus, and road
    /// sweepers measured without brushes.
    pub fn for_class(vehicle_class: VehicleClass) -> Self {
        let (length, width) = match vehicle_class {
            VehicleClass::Class3 => (4.5, 1.8),
            VehicleClass::Class4 => (12.0, 2.55),
            VehicleClass::AesvClass3 => (4.8, 1.9),
            VehicleClass::AesvClass4 => (7.5, 2.4),
        };
        Self::rectangle(vehicle_class, length, width)
    }

    pub fn footprint_points(&self) -> Vec<[f64; 2]> {
        self.footprint
            .vertices
            .iter()
            .filter_map(|v| match v {
                Position::Vcs(p) => Some([p.x, p.y]),
                Position::Wgs84(_) => None,
            })
            .collect()
    }

    pub fn contains_origin(&self) -> bool {
        let pts = self.footprint_points();
        pts.len() >= 3 && crate::clearance::polygon::contains_point(&pts, [0.0, 0.0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heading_normalizes_into_range() {
        assert_eq!(HeadingDeg::new(360.0).degrees(), 0.0);
        assert_eq!(HeadingDeg::new(-90.0).degrees(), 270.0);
        assert_eq!(HeadingDeg::new(725.0).degrees(), 5.0);
        assert_eq!(HeadingDeg::new(-1e-18).degrees(), 0.0);
    }

    #[test]
    fn heading_angle_is_shortest_way_round() {
        let a = HeadingDeg::new(350.0);
        let b = HeadingDeg::new(10.0);
        assert!((a.angle_to(b) - 20.0).abs() < 1e-12);
        assert!((a.reversed().degrees() - 170.0).abs() < 1e-12);
    }

    #[test]
    fn bounding_shape_drops_repeated_closing_vertex() {
        let a = GeoPosition::new(1.0, 2.0);
        let shape = BoundingShape::from_geo([
            a,
            GeoPosition::new(1.0, 3.0),
            GeoPosition::new(2.0, 3.0),
            a,
        ]);
        assert_eq!(shape.vertices.len(), 3);
        assert_eq!(shape.distinct_vertices(), 3);
    }

    #[test]
    fn unknown_tags_are_kept_as_extensions() {
        assert_eq!(
            DriveStatus::from_tag("remote_valet"),
            DriveStatus::Extension("remote_valet".into())
        );
        assert_eq!(DriveStatus::from_tag("manual"), DriveStatus::Manual);
        assert_eq!(SpecialOp::from_tag("sweeping").tag(), "sweeping");
        assert_eq!(Phase::from_tag("go_exclusive"), Phase::GoExclusive);
        assert_eq!(ActorType::from_tag("100"), Some(ActorType::Extension(100)));
        assert_eq!(ActorType::from_tag("2"), Some(ActorType::VruPedestrian));
        assert_eq!(ActorType::from_tag("bus"), None);
    }

    #[test]
    fn class_profiles_contain_origin() {
        for class in [
            VehicleClass::Class3,
            VehicleClass::Class4,
            VehicleClass::AesvClass3,
            VehicleClass::AesvClass4,
        ] {
            assert!(VehicleProfile::for_class(class).contains_origin());
        }
    }

    fn cone_actor(step: u64, speed: f64) -> ActorState {
        ActorState {
            id: "cone".into(),
            time: step as f64 * 0.1,
            step,
            actor_type: ActorType::Extension(100),
            pos: Position::Vcs(VcsPosition::new(5.0, 0.0)),
            bbox_true: Some(BoundingShape::from_vcs([
                VcsPosition::new(4.8, -0.2),
                VcsPosition::new(4.8, 0.2),
                VcsPosition::new(5.2, 0.2),
            ])),
            bbox_perceived: None,
            speed,
            vel_lat: 0.0,
            vel_long: 0.0,
            acc_lat: 0.0,
            acc_long: 0.0,
            heading: None,
            ttc: f64::INFINITY,
        }
    }

    #[test]
    fn motionless_obstacle_coded_actor_becomes_obstacle() {
        let mut t = Trace::new("tc", 1);
        t.actors
            .insert("cone".into(), vec![cone_actor(0, 0.0), cone_actor(1, 0.0)]);
        t.normalize_obstacle_actors();
        assert!(t.actors.is_empty());
        let obs = &t.obstacles["cone"];
        assert_eq!(obs.len(), 2);
        assert_eq!(obs[0].obst_type, ObstacleType::CONSTRUCTION_CONES);

        let mut moving = Trace::new("tc", 1);
        moving
            .actors
            .insert("cone".into(), vec![cone_actor(0, 0.0), cone_actor(1, 0.2)]);
        moving.normalize_obstacle_actors();
        assert_eq!(moving.actors.len(), 1);
        assert!(moving.obstacles.is_empty());
    }
}
