//! Per-step clearance, temporal distance and exclusion-zone metrics between
//! the VUT and one environment entity.

pub mod ntd;
pub mod polygon;
pub mod zone;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{self, GeoError};
use crate::model::{
    ActorState, ActorType, BoundingShape, HeadingDeg, ObstacleState, Position, Trace,
    VehicleProfile, VutState,
};

pub use ntd::{time_to_contact, DEFAULT_HORIZON_S};
pub use polygon::{directional_clearance, min_separation, Point};
pub use zone::{zone_incursion, ExclusionZone, Incursion};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClearanceError {
    #[error("degenerate polygon: {reason}")]
    DegeneratePolygon { reason: String },
    #[error("exclusion zone extents must be finite and non-negative")]
    InvalidZone,
    #[error("no actor or obstacle with id `{0}`")]
    UnknownEntity(String),
    #[error("entity record at step {0} has no matching VUT record")]
    MissingVutStep(u64),
    #[error("bounding shape mixes WGS84 and VCS vertices")]
    MixedFrames,
    #[error(transparent)]
    Geo(#[from] GeoError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClearanceConfig {
    /// Look-ahead for the nearest temporal distance, seconds.
    pub ntd_horizon: f64,
}

impl Default for ClearanceConfig {
    fn default() -> Self {
        ClearanceConfig {
            ntd_horizon: DEFAULT_HORIZON_S,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Actor,
    Obstacle,
}

/// Metrics between the VUT and one entity at one simulation step.
///
/// Directional clearances are +inf when not applicable (the bodies are not
/// alongside / not in line) and negative when the bodies interpenetrate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClearanceSample {
    pub step: u64,
    pub time: f64,
    pub entity_id: String,
    pub lateral: f64,
    pub longitudinal: f64,
    pub euclidean_min: f64,
    pub ntd: f64,
    pub zone_incursion: bool,
    pub zone_depth: f64,
    /// Entity centre lies in front of the VUT centre.
    pub ahead: bool,
    /// Speed at which the VUT moves towards the entity centre.
    pub vut_closing: f64,
    /// Speed at which the entity moves towards the VUT centre.
    pub entity_closing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClearanceSeries {
    pub entity_id: String,
    pub kind: EntityKind,
    pub samples: Vec<ClearanceSample>,
    /// A default footprint stood in for a missing bounding box.
    pub default_footprint: bool,
}

impl ClearanceSeries {
    pub fn min_lateral(&self) -> f64 {
        self.samples.iter().map(|s| s.lateral).fold(f64::INFINITY, f64::min)
    }

    pub fn min_longitudinal(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.longitudinal)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_euclidean(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.euclidean_min)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Default `(length, width)` for actors recorded without a bounding box.
pub fn default_footprint(actor_type: ActorType) -> (f64, f64) {
    match actor_type {
        ActorType::VruPedestrian => (0.5, 0.5),
        ActorType::VruCyclist => (1.8, 0.6),
        ActorType::VruPmd => (1.2, 0.6),
        ActorType::Tsv | ActorType::Extension(_) => (4.4, 1.8),
    }
}

pub(crate) fn position_in_vcs(vut: &VutState, p: &Position) -> Result<Point, GeoError> {
    match p {
        Position::Wgs84(g) => {
            let v = geo::world_to_vcs(vut.pos, vut.heading, *g)?;
            Ok([v.x, v.y])
        }
        Position::Vcs(v) => Ok([v.x, v.y]),
    }
}

pub(crate) fn shape_in_vcs(vut: &VutState, shape: &BoundingShape) -> Result<Vec<Point>, ClearanceError> {
    if !shape.frames_consistent() {
        return Err(ClearanceError::MixedFrames);
    }
    let mut pts: Vec<Point> = Vec::with_capacity(shape.vertices.len());
    for v in &shape.vertices {
        let p = position_in_vcs(vut, v)?;
        if pts.last() != Some(&p) {
            pts.push(p);
        }
    }
    while pts.len() > 1 && pts.first() == pts.last() {
        pts.pop();
    }
    Ok(pts)
}

struct EntityGeometry {
    poly: Vec<Point>,
    center: Point,
    velocity: Point,
    substituted: bool,
}

fn relative_angle(vut: &VutState, heading: Option<HeadingDeg>) -> f64 {
    heading
        .map(|h| (h.degrees() - vut.heading.degrees()).to_radians())
        .unwrap_or(0.0)
}

fn actor_geometry(vut: &VutState, a: &ActorState) -> Result<EntityGeometry, ClearanceError> {
    let center = position_in_vcs(vut, &a.pos)?;
    let rel = relative_angle(vut, a.heading);
    let (s, c) = rel.sin_cos();
    let fwd = [c, s];
    let right = [-s, c];
    let (poly, substituted) = match &a.bbox_true {
        Some(shape) => (shape_in_vcs(vut, shape)?, false),
        None => {
            let (l, w) = default_footprint(a.actor_type);
            (polygon::oriented_rectangle(center, l, w, rel), true)
        }
    };
    let velocity = if a.vel_long == 0.0 && a.vel_lat == 0.0 {
        [a.speed * fwd[0], a.speed * fwd[1]]
    } else {
        [
            a.vel_long * fwd[0] + a.vel_lat * right[0],
            a.vel_long * fwd[1] + a.vel_lat * right[1],
        ]
    };
    Ok(EntityGeometry {
        poly,
        center,
        velocity,
        substituted,
    })
}

fn obstacle_geometry(vut: &VutState, o: &ObstacleState) -> Result<EntityGeometry, ClearanceError> {
    Ok(EntityGeometry {
        poly: shape_in_vcs(vut, &o.poly_true)?,
        center: position_in_vcs(vut, &o.pos)?,
        velocity: [0.0, 0.0],
        substituted: false,
    })
}

fn sample(
    vut: &VutState,
    entity_id: &str,
    footprint: &[Point],
    geom: &EntityGeometry,
    zone: &ExclusionZone,
    config: &ClearanceConfig,
) -> Result<ClearanceSample, ClearanceError> {
    polygon::validate(&geom.poly)?;
    let (lateral, longitudinal) = directional_clearance(footprint, &geom.poly)?;
    let euclidean_min = polygon::separation_unchecked(footprint, &geom.poly);
    let vut_velocity = [vut.speed, 0.0];
    let ntd = time_to_contact(
        footprint,
        vut_velocity,
        &geom.poly,
        geom.velocity,
        config.ntd_horizon,
    );
    let inc = zone_incursion(zone, footprint, &geom.poly)?;
    let dist = geom.center[0].hypot(geom.center[1]);
    let (vut_closing, entity_closing) = if dist > 0.0 {
        let u = [geom.center[0] / dist, geom.center[1] / dist];
        (
            vut_velocity[0] * u[0] + vut_velocity[1] * u[1],
            -(geom.velocity[0] * u[0] + geom.velocity[1] * u[1]),
        )
    } else {
        (0.0, 0.0)
    };
    Ok(ClearanceSample {
        step: vut.step,
        time: vut.time,
        entity_id: entity_id.to_string(),
        lateral,
        longitudinal,
        euclidean_min,
        ntd,
        zone_incursion: inc.inside,
        zone_depth: inc.depth,
        ahead: geom.center[0] > 0.0,
        vut_closing,
        entity_closing,
    })
}

/// Clearance samples for every VUT step at which `entity_id` is recorded.
///
/// Fixed infrastructure is not filtered here; callers decide which entities
/// are subject to the exclusion zone.
pub fn clearance_series(
    trace: &Trace,
    entity_id: &str,
    profile: &VehicleProfile,
    zone: &ExclusionZone,
    config: &ClearanceConfig,
) -> Result<ClearanceSeries, ClearanceError> {
    let footprint = profile.footprint_points();
    polygon::validate(&footprint)?;
    let mut default_used = false;
    let (kind, samples) = if let Some(recs) = trace.actors.get(entity_id) {
        let mut out = Vec::with_capacity(recs.len());
        for rec in recs {
            let vut = trace
                .vut_at_step(rec.step)
                .ok_or(ClearanceError::MissingVutStep(rec.step))?;
            let geom = actor_geometry(vut, rec)?;
            default_used |= geom.substituted;
            out.push(sample(vut, entity_id, &footprint, &geom, zone, config)?);
        }
        (EntityKind::Actor, out)
    } else if let Some(recs) = trace.obstacles.get(entity_id) {
        let mut out = Vec::with_capacity(recs.len());
        for rec in recs {
            let vut = trace
                .vut_at_step(rec.step)
                .ok_or(ClearanceError::MissingVutStep(rec.step))?;
            let geom = obstacle_geometry(vut, rec)?;
            out.push(sample(vut, entity_id, &footprint, &geom, zone, config)?);
        }
        (EntityKind::Obstacle, out)
    } else {
        return Err(ClearanceError::UnknownEntity(entity_id.to_string()));
    };
    if default_used {
        log::warn!("entity `{entity_id}` has no bounding box; default footprint substituted");
    }
    Ok(ClearanceSeries {
        entity_id: entity_id.to_string(),
        kind,
        samples,
        default_footprint: default_used,
    })
}

/// Nearest temporal distance from the VUT to an entity given in world
/// coordinates. The entity velocity is `(east, north)` in m/s.
pub fn nearest_temporal_distance(
    vut: &VutState,
    profile: &VehicleProfile,
    entity_shape: &BoundingShape,
    entity_velocity_en: [f64; 2],
    horizon: f64,
) -> Result<f64, ClearanceError> {
    let footprint = profile.footprint_points();
    polygon::validate(&footprint)?;
    let poly = shape_in_vcs(vut, entity_shape)?;
    polygon::validate(&poly)?;
    let v = geo::local_to_vcs(vut.heading, entity_velocity_en);
    Ok(time_to_contact(&footprint, [vut.speed, 0.0], &poly, v, horizon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        DriveStatus, GeoPosition, Indicators, SpecialOp, VcsPosition, VehicleClass,
    };

    fn vut_state(step: u64, speed: f64) -> VutState {
        VutState {
            time: step as f64 * 0.1,
            step,
            pos: GeoPosition::new(1.354, 103.695),
            travelled: 0.0,
            speed,
            acc_lat: 0.0,
            acc_long: 0.0,
            yaw_rate: 0.0,
            pitch_rate: None,
            roll_rate: None,
            heading: HeadingDeg::new(0.0),
            indicators: Indicators::default(),
            throttle: 0.0,
            brake: 0.0,
            steering_angle: 0.0,
            drive_status: DriveStatus::Autonomous,
            special_op: SpecialOp::Normal,
        }
    }

    fn box_vcs(x0: f64, x1: f64, y0: f64, y1: f64) -> BoundingShape {
        BoundingShape::from_vcs([
            VcsPosition::new(x0, y0),
            VcsPosition::new(x1, y0),
            VcsPosition::new(x1, y1),
            VcsPosition::new(x0, y1),
        ])
    }

    fn pedestrian(step: u64, bbox: Option<BoundingShape>) -> ActorState {
        ActorState {
            id: "ped".into(),
            time: step as f64 * 0.1,
            step,
            actor_type: ActorType::VruPedestrian,
            pos: Position::Vcs(VcsPosition::new(10.0, 3.0)),
            bbox_true: bbox,
            bbox_perceived: None,
            speed: 0.0,
            vel_lat: 0.0,
            vel_long: 0.0,
            acc_lat: 0.0,
            acc_long: 0.0,
            heading: Some(HeadingDeg::new(180.0)),
            ttc: f64::INFINITY,
        }
    }

    #[test]
    fn single_step_trace_gives_single_sample() {
        let mut t = Trace::new("tc", 1);
        t.vut.push(vut_state(0, 5.0));
        t.actors.insert(
            "ped".into(),
            vec![pedestrian(0, Some(box_vcs(9.75, 10.25, 2.75, 3.25)))],
        );
        let profile = VehicleProfile::for_class(VehicleClass::Class3);
        let s = clearance_series(&t, "ped", &profile, &ExclusionZone::zero(), &Default::default())
            .unwrap();
        assert_eq!(s.samples.len(), 1);
        assert!(!s.default_footprint);
        let smp = &s.samples[0];
        assert!(smp.ahead);
        assert!(smp.lateral.is_infinite());
        assert!(smp.ntd.is_infinite());
        assert!(smp.vut_closing > 0.0);
    }

    #[test]
    fn missing_bbox_uses_default_footprint() {
        let mut t = Trace::new("tc", 1);
        t.vut.push(vut_state(0, 5.0));
        t.actors.insert("ped".into(), vec![pedestrian(0, None)]);
        let profile = VehicleProfile::for_class(VehicleClass::Class3);
        let s = clearance_series(&t, "ped", &profile, &ExclusionZone::zero(), &Default::default())
            .unwrap();
        assert!(s.default_footprint);
        // 0.5 m square centred at (10, 3); VUT front at 2.25
        assert!((s.samples[0].euclidean_min - (10.0 - 0.25 - 2.25f64).hypot(3.0 - 0.25 - 0.9)).abs() < 1e-9);
    }

    #[test]
    fn unknown_entity_is_an_error() {
        let mut t = Trace::new("tc", 1);
        t.vut.push(vut_state(0, 0.0));
        let profile = VehicleProfile::for_class(VehicleClass::Class3);
        assert_eq!(
            clearance_series(&t, "nope", &profile, &ExclusionZone::zero(), &Default::default()),
            Err(ClearanceError::UnknownEntity("nope".into()))
        );
    }

    #[test]
    fn ntd_for_world_obstacle_ahead() {
        let vut = vut_state(0, 10.0);
        let profile = VehicleProfile::rectangle(VehicleClass::Class3, 4.0, 2.0);
        // obstacle 20 m ahead of the front bumper, due north
        let shape = BoundingShape::new(
            crate::model::Frame::Vcs,
            box_vcs(22.0, 23.0, -0.5, 0.5).vertices,
        );
        let t = nearest_temporal_distance(&vut, &profile, &shape, [0.0, 0.0], 30.0).unwrap();
        assert!((t - 2.0).abs() < 1e-12);
    }
}
