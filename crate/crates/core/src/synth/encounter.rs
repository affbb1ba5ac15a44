//! A single VUT-entity encounter at a chosen clearance, for every threshold
//! context.
//!
//! For lateral contexts the VUT drives straight at constant speed and passes
//! an entity standing, or moving more slowly, on its left at exactly the
//! requested clearance. For a lead road user the VUT follows at a constant
//! gap; for a lead obstacle it brakes to a stop at that gap.

use serde::{Deserialize, Serialize};

use crate::model::{
    ActorState, ActorType, DriveStatus, Indicators, ObstacleState, ObstacleType, Position,
    SpecialOp, Trace, VehicleClass, VehicleProfile, VutState,
};
use crate::rules::ContextClass;

use super::{Road, SynthError, ANCHOR_LAT, ANCHOR_LON};

pub const ENTITY_ID: &str = "E1";
/// Road position of the entity centre at the start of a lateral encounter.
const ENTITY_S: f64 = 30.0;
/// Braking used to stop behind a lead obstacle, m/s².
const STOP_DECEL: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Encounter {
    pub context: ContextClass,
    /// Minimum clearance the encounter is built to, meters.
    pub clearance: f64,
    /// m/s.
    pub vut_speed: f64,
    /// Hz.
    pub sample_rate: f64,
    pub road_heading: f64,
    pub vut_class: VehicleClass,
}

impl Encounter {
    pub fn new(context: ContextClass, clearance: f64) -> Self {
        Encounter {
            context,
            clearance,
            vut_speed: 5.0,
            sample_rate: 10.0,
            road_heading: 30.0,
            vut_class: VehicleClass::Class3,
        }
    }
}

enum Body {
    Actor { kind: ActorType, heading_offset: f64 },
    Obstacle,
}

/// Entity kind, `(length, width)` and speed for a context.
fn entity(context: ContextClass) -> (Body, f64, f64, f64) {
    let actor = |kind| Body::Actor {
        kind,
        heading_offset: 0.0,
    };
    match context {
        ContextClass::StaticObstacle | ContextClass::LeadObstacle => (Body::Obstacle, 0.6, 0.6, 0.0),
        ContextClass::StoppedOrParkedVehicle => (actor(ActorType::Tsv), 4.4, 1.8, 0.0),
        ContextClass::MovingTsv => (actor(ActorType::Tsv), 4.4, 1.8, 2.0),
        ContextClass::PedestrianFacingTraffic => (
            Body::Actor {
                kind: ActorType::VruPedestrian,
                heading_offset: 180.0,
            },
            0.5,
            0.5,
            0.0,
        ),
        ContextClass::PedestrianFacingAway => (actor(ActorType::VruPedestrian), 0.5, 0.5, 0.0),
        ContextClass::Cyclist => (actor(ActorType::VruCyclist), 1.8, 0.6, 2.0),
        ContextClass::PmdRider => (actor(ActorType::VruPmd), 1.2, 0.6, 2.0),
        ContextClass::LeadRoadUser => (actor(ActorType::Tsv), 4.4, 1.8, f64::NAN),
    }
}

pub fn encounter(e: &Encounter) -> Result<Trace, SynthError> {
    let c = e.clearance;
    if !(c.is_finite() && c >= 0.0) {
        return Err(SynthError::InfeasibleSpec(format!("clearance must be non-negative, got {c}")));
    }
    if !(e.vut_speed.is_finite() && e.vut_speed > 2.0) {
        return Err(SynthError::InfeasibleSpec("VUT speed must exceed 2 m/s".into()));
    }
    if !(e.sample_rate.is_finite() && e.sample_rate >= 1.0) {
        return Err(SynthError::InfeasibleSpec("sample rate must be at least 1 Hz".into()));
    }
    let road = Road::new(ANCHOR_LAT, ANCHOR_LON, e.road_heading);
    let vut = VehicleProfile::for_class(e.vut_class);
    let (body, len, wid, mut ev) = entity(e.context);
    let v = e.vut_speed;

    // VUT motion as (s, speed, acc) at time t; entity start (s, d)
    let (vut_s0, entity_s0, entity_d, duration);
    let lead_obstacle = e.context == ContextClass::LeadObstacle;
    match e.context {
        ContextClass::LeadRoadUser => {
            ev = v;
            vut_s0 = 0.0;
            entity_s0 = vut.length / 2.0 + c + len / 2.0;
            entity_d = 0.0;
            duration = 6.0;
        }
        ContextClass::LeadObstacle => {
            let s_stop = ENTITY_S - len / 2.0 - c - vut.length / 2.0;
            vut_s0 = s_stop - v * v / (2.0 * STOP_DECEL);
            entity_s0 = ENTITY_S;
            entity_d = 0.0;
            duration = v / STOP_DECEL + 3.0;
        }
        _ => {
            vut_s0 = 0.0;
            entity_s0 = ENTITY_S;
            entity_d = -(vut.width / 2.0 + c + wid / 2.0);
            let pass = ENTITY_S + 5.0 + (vut.length + len) / 2.0;
            duration = pass / (v - ev) + 1.0;
        }
    }
    let vut_at = |t: f64| -> (f64, f64, f64) {
        if !lead_obstacle {
            return (vut_s0 + v * t, v, 0.0);
        }
        let t_stop = v / STOP_DECEL;
        if t < t_stop {
            (vut_s0 + v * t - STOP_DECEL * t * t / 2.0, v - STOP_DECEL * t, -STOP_DECEL)
        } else {
            (vut_s0 + v * v / (2.0 * STOP_DECEL), 0.0, 0.0)
        }
    };

    let mut trace = Trace::new(format!("ENC-{}", e.context.tag()), 1);
    let mut actors = Vec::new();
    let mut obstacles = Vec::new();
    let n = (duration * e.sample_rate).ceil() as u64;
    for step in 0..=n {
        let time = step as f64 / e.sample_rate;
        let (s, speed, acc) = vut_at(time);
        trace.vut.push(VutState {
            time,
            step,
            pos: road.to_geo(s, 0.0)?,
            travelled: s - vut_s0,
            speed,
            acc_lat: 0.0,
            acc_long: acc,
            yaw_rate: 0.0,
            pitch_rate: None,
            roll_rate: None,
            heading: road.heading_at(0.0),
            indicators: Indicators {
                brake: acc < 0.0,
                ..Indicators::default()
            },
            throttle: 0.0,
            brake: if acc < 0.0 { 0.2 } else { 0.0 },
            steering_angle: 0.0,
            drive_status: DriveStatus::Autonomous,
            special_op: SpecialOp::Normal,
        });
        let es = entity_s0 + ev * time;
        let pos = road.to_geo(es, entity_d)?;
        let shape = road.rectangle(es, entity_d, len, wid)?;
        match &body {
            Body::Obstacle => obstacles.push(ObstacleState {
                id: ENTITY_ID.into(),
                time,
                step,
                obst_type: ObstacleType::CONSTRUCTION_CONES,
                pos: Position::Wgs84(pos),
                poly_true: shape,
                poly_perceived: None,
                ntd: f64::INFINITY,
            }),
            Body::Actor {
                kind,
                heading_offset,
            } => actors.push(ActorState {
                id: ENTITY_ID.into(),
                time,
                step,
                actor_type: *kind,
                pos: Position::Wgs84(pos),
                bbox_true: Some(shape),
                bbox_perceived: None,
                speed: ev,
                vel_lat: 0.0,
                vel_long: ev,
                acc_lat: 0.0,
                acc_long: 0.0,
                heading: Some(road.heading_at(heading_offset.to_radians())),
                ttc: f64::INFINITY,
            }),
        }
    }
    if !actors.is_empty() {
        trace.actors.insert(ENTITY_ID.into(), actors);
    }
    if !obstacles.is_empty() {
        trace.obstacles.insert(ENTITY_ID.into(), obstacles);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clearance::ClearanceConfig;
    use crate::rules::{evaluate_run, Outcome, RuleId, RuleSet};

    fn outcome(context: ContextClass, c: f64) -> Outcome {
        let t = encounter(&Encounter::new(context, c)).unwrap();
        let profile = VehicleProfile::for_class(VehicleClass::Class3);
        let out = evaluate_run(&t, &profile, &RuleSet::default(), &ClearanceConfig::default()).unwrap();
        let rule = match context {
            ContextClass::LeadRoadUser | ContextClass::LeadObstacle => RuleId::LongitudinalClearance,
            _ => RuleId::LateralClearance,
        };
        let v = out.evaluation.verdict(rule, Some(ENTITY_ID)).unwrap();
        assert_eq!(v.context, Some(context), "{v:?}");
        v.outcome
    }

    #[test]
    fn flips_at_threshold() {
        let rules = RuleSet::default();
        for context in ContextClass::LATERAL
            .into_iter()
            .chain([ContextClass::LeadRoadUser, ContextClass::LeadObstacle])
        {
            let thr = rules.threshold(context);
            assert_eq!(outcome(context, thr - 0.01), Outcome::Fail, "{context}");
            assert_eq!(outcome(context, thr + 0.01), Outcome::Pass, "{context}");
        }
    }
}
