//! Which threshold row applies to an entity.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{ActorState, ActorType, VutState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextClass {
    StaticObstacle,
    StoppedOrParkedVehicle,
    PedestrianFacingTraffic,
    MovingTsv,
    PedestrianFacingAway,
    Cyclist,
    PmdRider,
    LeadRoadUser,
    LeadObstacle,
}

impl ContextClass {
    pub const LATERAL: [ContextClass; 7] = [
        ContextClass::StaticObstacle,
        ContextClass::StoppedOrParkedVehicle,
        ContextClass::PedestrianFacingTraffic,
        ContextClass::MovingTsv,
        ContextClass::PedestrianFacingAway,
        ContextClass::Cyclist,
        ContextClass::PmdRider,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ContextClass::StaticObstacle => "static_obstacle",
            ContextClass::StoppedOrParkedVehicle => "stopped_or_parked_vehicle",
            ContextClass::PedestrianFacingTraffic => "pedestrian_facing_traffic",
            ContextClass::MovingTsv => "moving_tsv",
            ContextClass::PedestrianFacingAway => "pedestrian_facing_away",
            ContextClass::Cyclist => "cyclist",
            ContextClass::PmdRider => "pmd_rider",
            ContextClass::LeadRoadUser => "lead_road_user",
            ContextClass::LeadObstacle => "lead_obstacle",
        }
    }
}

impl fmt::Display for ContextClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Angle below which a pedestrian counts as facing oncoming traffic,
/// measured between its heading and the reversed VUT heading.
pub const FACING_TRAFFIC_MAX_DEG: f64 = 90.0;

/// Lateral context of an actor at record `idx`.
///
/// Vehicles are classified once per run: stopped or parked when their speed
/// stays below `stopped_eps` throughout. Pedestrians are classified per
/// record from their heading; a missing heading falls back to the stricter
/// facing-away row and is reported through the returned flag.
pub fn classify_actor(
    records: &[ActorState],
    idx: usize,
    vut: &VutState,
    stopped_eps: f64,
) -> (ContextClass, bool) {
    let rec = &records[idx];
    match rec.actor_type {
        ActorType::VruPedestrian => match rec.heading {
            Some(h) => {
                let facing = h.angle_to(vut.heading.reversed()) < FACING_TRAFFIC_MAX_DEG;
                let class = if facing {
                    ContextClass::PedestrianFacingTraffic
                } else {
                    ContextClass::PedestrianFacingAway
                };
                (class, false)
            }
            None => (ContextClass::PedestrianFacingAway, true),
        },
        ActorType::VruCyclist => (ContextClass::Cyclist, false),
        ActorType::VruPmd => (ContextClass::PmdRider, false),
        ActorType::Tsv | ActorType::Extension(_) => {
            if records.iter().all(|r| r.speed < stopped_eps) {
                (ContextClass::StoppedOrParkedVehicle, false)
            } else {
                (ContextClass::MovingTsv, false)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;

    fn vut(heading: f64) -> VutState {
        VutState {
            time: 0.0,
            step: 0,
            pos: GeoPosition::new(0.0, 0.0),
            travelled: 0.0,
            speed: 5.0,
            acc_lat: 0.0,
            acc_long: 0.0,
            yaw_rate: 0.0,
            pitch_rate: None,
            roll_rate: None,
            heading: HeadingDeg::new(heading),
            indicators: Indicators::default(),
            throttle: 0.0,
            brake: 0.0,
            steering_angle: 0.0,
            drive_status: DriveStatus::Autonomous,
            special_op: SpecialOp::Normal,
        }
    }

    fn actor(t: ActorType, speed: f64, heading: Option<f64>) -> ActorState {
        ActorState {
            id: "a".into(),
            time: 0.0,
            step: 0,
            actor_type: t,
            pos: Position::Vcs(VcsPosition::new(5.0, 2.0)),
            bbox_true: None,
            bbox_perceived: None,
            speed,
            vel_lat: 0.0,
            vel_long: speed,
            acc_lat: 0.0,
            acc_long: 0.0,
            heading: heading.map(HeadingDeg::new),
            ttc: f64::INFINITY,
        }
    }

    #[test]
    fn parked_and_moving_vehicles() {
        let parked = vec![actor(ActorType::Tsv, 0.0, None); 3];
        assert_eq!(
            classify_actor(&parked, 1, &vut(0.0), 0.1).0,
            ContextClass::StoppedOrParkedVehicle
        );
        let mut moving = parked.clone();
        moving[2].speed = 0.1;
        assert_eq!(classify_actor(&moving, 0, &vut(0.0), 0.1).0, ContextClass::MovingTsv);
    }

    #[test]
    fn pedestrian_orientation() {
        let v = vut(30.0);
        let opposite = [actor(ActorType::VruPedestrian, 1.0, Some(210.0))];
        assert_eq!(
            classify_actor(&opposite, 0, &v, 0.1).0,
            ContextClass::PedestrianFacingTraffic
        );
        let same = [actor(ActorType::VruPedestrian, 1.0, Some(30.0))];
        assert_eq!(classify_actor(&same, 0, &v, 0.1).0, ContextClass::PedestrianFacingAway);
        let square = [actor(ActorType::VruPedestrian, 1.0, Some(120.0))];
        assert_eq!(classify_actor(&square, 0, &v, 0.1).0, ContextClass::PedestrianFacingAway);
        let unknown = [actor(ActorType::VruPedestrian, 1.0, None)];
        assert_eq!(
            classify_actor(&unknown, 0, &v, 0.1),
            (ContextClass::PedestrianFacingAway, true)
        );
    }
}
