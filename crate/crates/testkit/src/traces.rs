//! Seeded random traces that satisfy every integrity rule, for round-trip
//! and layout-equivalence tests.

use rand::seq::IndexedRandom;
use rand::Rng;
use vista_core::model::{
    ActorState, ActorType, BoundingShape, DriveStatus, Frame, GeoPosition, HeadingDeg, Indicators,
    ObstacleState, ObstacleType, Phase, Position, SpecialOp, Trace, TrafficControllerState,
    VcsPosition, VutState,
};

use crate::geometry::random_star;

const RATES: [f64; 4] = [10.0, 20.0, 50.0, 100.0];
/// Degrees per planar unit when laying out WGS84 polygons.
const DEG: f64 = 1e-5;

fn maybe<R: Rng, T>(rng: &mut R, p: f64, f: impl FnOnce(&mut R) -> T) -> Option<T> {
    if rng.random_bool(p) {
        Some(f(rng))
    } else {
        None
    }
}

fn heading<R: Rng>(rng: &mut R) -> HeadingDeg {
    HeadingDeg::new(rng.random_range(0.0..360.0))
}

fn shape<R: Rng>(rng: &mut R, frame: Frame, center: Position) -> BoundingShape {
    let n = rng.random_range(3..=8);
    let with_z = rng.random_bool(0.3);
    let star = random_star(rng, [0.0, 0.0], 0.5, 3.0, n);
    let vertices = star
        .into_iter()
        .map(|[x, y]| match (frame, center) {
            (Frame::Wgs84, Position::Wgs84(c)) => Position::Wgs84(GeoPosition {
                lat: c.lat + y * DEG,
                lon: c.lon + x * DEG,
                elev: with_z.then(|| rng.random_range(-5.0..50.0)),
            }),
            (_, Position::Vcs(c)) => Position::Vcs(VcsPosition {
                x: c.x + x,
                y: c.y + y,
                z: with_z.then(|| rng.random_range(-1.0..1.0)),
            }),
            (Frame::Vcs, Position::Wgs84(_)) => unreachable!("frame follows the position"),
        })
        .collect();
    BoundingShape::new(frame, vertices)
}

fn position<R: Rng>(rng: &mut R, near: GeoPosition, vcs: bool) -> Position {
    if vcs {
        Position::Vcs(VcsPosition {
            x: rng.random_range(-60.0..60.0),
            y: rng.random_range(-20.0..20.0),
            z: maybe(rng, 0.3, |r| r.random_range(-1.0..1.0)),
        })
    } else {
        Position::Wgs84(GeoPosition {
            lat: near.lat + rng.random_range(-5e-4..5e-4),
            lon: near.lon + rng.random_range(-5e-4..5e-4),
            elev: maybe(rng, 0.3, |r| r.random_range(-5.0..50.0)),
        })
    }
}

fn ttc<R: Rng>(rng: &mut R) -> f64 {
    if rng.random_bool(0.4) {
        f64::INFINITY
    } else {
        rng.random_range(0.0..30.0)
    }
}

/// Steps at which an entity is recorded: a non-empty random subset.
fn entity_steps<R: Rng>(rng: &mut R, steps: &[(u64, f64)]) -> Vec<(u64, f64)> {
    let p = rng.random_range(0.3..=1.0);
    let mut out: Vec<(u64, f64)> = steps.iter().copied().filter(|_| rng.random_bool(p)).collect();
    if out.is_empty() {
        out.push(*steps.choose(rng).expect("non-empty"));
    }
    out
}

const ACTOR_TYPES: [ActorType; 7] = [
    ActorType::Tsv,
    ActorType::VruPedestrian,
    ActorType::VruCyclist,
    ActorType::VruPmd,
    ActorType::Extension(7),
    ActorType::Extension(42),
    ActorType::Extension(101),
];

fn vut_state<R: Rng>(rng: &mut R, step: u64, time: f64, pos: GeoPosition, with_rates: bool) -> VutState {
    VutState {
        time,
        step,
        pos,
        travelled: step as f64 * rng.random_range(0.0..2.0),
        speed: rng.random_range(0.0..15.0),
        acc_lat: rng.random_range(-3.0..3.0),
        acc_long: rng.random_range(-9.0..3.0),
        yaw_rate: rng.random_range(-30.0..30.0),
        pitch_rate: with_rates.then(|| rng.random_range(-5.0..5.0)),
        roll_rate: maybe(rng, 0.5, |r| r.random_range(-5.0..5.0)),
        heading: heading(rng),
        indicators: Indicators {
            left_front: rng.random_bool(0.2),
            left_rear: rng.random_bool(0.2),
            right_front: rng.random_bool(0.2),
            right_rear: rng.random_bool(0.2),
            brake: rng.random_bool(0.3),
            reverse: rng.random_bool(0.05),
            hazard: rng.random_bool(0.05),
        },
        throttle: rng.random_range(0.0..=1.0),
        brake: rng.random_range(0.0..=1.0),
        steering_angle: rng.random_range(-400.0..400.0),
        drive_status: [
            DriveStatus::Autonomous,
            DriveStatus::Manual,
            DriveStatus::Teleoperation,
            DriveStatus::Extension("remote_assist".into()),
        ]
        .choose(rng)
        .cloned()
        .expect("non-empty"),
        special_op: [
            SpecialOp::Normal,
            SpecialOp::EnvironmentalService,
            SpecialOp::Extension("road_sweeping".into()),
        ]
        .choose(rng)
        .cloned()
        .expect("non-empty"),
    }
}

/// A valid trace with up to `max_steps` VUT records and a few actors,
/// obstacles and traffic lights.
pub fn random_trace<R: Rng>(rng: &mut R, max_steps: usize) -> Trace {
    let run = rng.random_range(1..=99);
    let mut t = Trace::new(format!("TC-{:03}", rng.random_range(0..1000)), run);
    let rate = *RATES.choose(rng).expect("non-empty");
    let n = rng.random_range(1..=max_steps.max(1));
    let first = if rng.random_bool(0.8) { 0 } else { rng.random_range(1..5) };
    let steps: Vec<(u64, f64)> = (0..n as u64)
        .map(|k| (first + k, (first + k) as f64 / rate))
        .collect();

    let origin = GeoPosition {
        lat: rng.random_range(-60.0..60.0),
        lon: rng.random_range(-170.0..170.0),
        elev: None,
    };
    let with_elev = rng.random_bool(0.5);
    let with_rates = rng.random_bool(0.5);
    for &(step, time) in &steps {
        let pos = GeoPosition {
            lat: origin.lat + step as f64 * rng.random_range(0.0..2e-5),
            lon: origin.lon + step as f64 * rng.random_range(0.0..2e-5),
            elev: with_elev.then(|| rng.random_range(0.0..30.0)),
        };
        t.vut.push(vut_state(rng, step, time, pos, with_rates));
    }

    for a in 0..rng.random_range(0..=3) {
        let id = format!("A{a}");
        let vcs = rng.random_bool(0.3);
        let frame = if vcs { Frame::Vcs } else { Frame::Wgs84 };
        let actor_type = *ACTOR_TYPES.choose(rng).expect("non-empty");
        let with_box = rng.random_bool(0.7);
        let recs = entity_steps(rng, &steps)
            .into_iter()
            .map(|(step, time)| {
                let pos = position(rng, origin, vcs);
                ActorState {
                    id: id.clone(),
                    time,
                    step,
                    actor_type,
                    pos,
                    bbox_true: with_box.then(|| shape(rng, frame, pos)),
                    bbox_perceived: maybe(rng, 0.3, |r| shape(r, frame, pos)),
                    speed: rng.random_range(0.0..10.0),
                    vel_lat: rng.random_range(-2.0..2.0),
                    vel_long: rng.random_range(-10.0..10.0),
                    acc_lat: rng.random_range(-2.0..2.0),
                    acc_long: rng.random_range(-5.0..5.0),
                    heading: maybe(rng, 0.9, heading),
                    ttc: ttc(rng),
                }
            })
            .collect();
        t.actors.insert(id, recs);
    }

    for o in 0..rng.random_range(0..=2) {
        let id = format!("O{o}");
        let vcs = rng.random_bool(0.3);
        let frame = if vcs { Frame::Vcs } else { Frame::Wgs84 };
        let obst_type = ObstacleType(*[100u32, 101, 102, 205, 250].choose(rng).expect("non-empty"));
        let recs = entity_steps(rng, &steps)
            .into_iter()
            .map(|(step, time)| {
                let pos = position(rng, origin, vcs);
                ObstacleState {
                    id: id.clone(),
                    time,
                    step,
                    obst_type,
                    pos,
                    poly_true: shape(rng, frame, pos),
                    poly_perceived: maybe(rng, 0.3, |r| shape(r, frame, pos)),
                    ntd: ttc(rng),
                }
            })
            .collect();
        t.obstacles.insert(id, recs);
    }

    let phases = [
        Phase::Go,
        Phase::Stop,
        Phase::GoExclusive,
        Phase::Extension("flashing_amber".into()),
    ];
    for c in 0..rng.random_range(0..=2) {
        let id = format!("TL{c}");
        let recs = entity_steps(rng, &steps)
            .into_iter()
            .map(|(step, time)| TrafficControllerState {
                id: id.clone(),
                time,
                step,
                phase: phases.choose(rng).cloned().expect("non-empty"),
                phase_perceived: maybe(rng, 0.3, |r| phases.choose(r).cloned().expect("non-empty")),
            })
            .collect();
        t.controllers.insert(id, recs);
    }
    t
}
