//! The VUT overtakes a stopped vehicle parked at the kerb.
//!
//! The VUT starts in the middle of the kerb-side lane, brakes hard, pulls
//! out with a quintic lane-change profile, holds a constant offset while it
//! is alongside the stopped vehicle and returns to its lane afterwards. The
//! held offset sets the minimum lateral clearance exactly.

use rand::Rng;

use crate::model::{
    ActorState, ActorType, DriveStatus, Indicators, Position, SpecialOp, Trace, VutState,
};

use super::motion::{stopping_distance, LanePath, Leg, LegEnd, Longitudinal};
use super::{run_rng, Case, Road, ScenarioSpec, SynthError, STEERING_RATIO, WHEELBASE};

pub const TSV_ID: &str = "TSV1";
/// Road position of the stopped vehicle's rear bumper.
pub const TSV_REAR_S: f64 = 60.0;
/// The lane change ends this far before the VUT front reaches the stopped
/// vehicle's rear, so the VUT is straight by the time it is alongside.
const ALONGSIDE_MARGIN: f64 = 1.25;
/// The return starts this far after the VUT rear has cleared the stopped
/// vehicle's front.
const RETURN_MARGIN: f64 = 2.5;
/// Seconds spent at a standstill in case 2.
const STOP_HOLD_S: f64 = 2.0;
/// Upper bound on a synthesized run, seconds.
const MAX_DURATION_S: f64 = 600.0;

/// Run 1 of the case.
pub fn synthesize(spec: &ScenarioSpec, case: Case) -> Result<Trace, SynthError> {
    synthesize_run(spec, case, 1)
}

/// Runs `1..=spec.runs`.
pub fn synthesize_runs(spec: &ScenarioSpec, case: Case) -> Result<Vec<Trace>, SynthError> {
    (1..=spec.runs).map(|r| synthesize_run(spec, case, r)).collect()
}

struct Plan {
    path: LanePath,
    s0: f64,
    v0: f64,
    legs: Vec<Leg>,
    s_end: f64,
}

fn plan(spec: &ScenarioSpec, case: Case, run: u32, dt: f64) -> Result<Plan, SynthError> {
    let vut = spec.vut_profile();
    let target = spec.target(case);
    let (mut dv, mut dc, mut shift, mut phase) = (0.0, 0.0, 0.0, 0.0);
    if spec.jitter {
        let mut rng = run_rng(spec.seed, run);
        dv = rng.random_range(-0.02..=0.02);
        let room = 0.004f64.min(spec.max_clearance() - target);
        dc = rng.random_range(-1.0..=1.0) * room;
        if target + dc < 0.0 {
            dc = -dc;
        }
        shift = rng.random_range(-1.0..=1.0);
        phase = rng.random_range(0.0..1.0);
    }
    let clearance = target + dc;
    let cap = spec.speed_cap;
    let v0 = 0.9 * cap * (1.0 + dv);

    let tsv_front = TSV_REAR_S + spec.tsv_length;
    let tsv_right = spec.tsv_kerb_offset + spec.tsv_width;
    let out_end = TSV_REAR_S - vut.length / 2.0 - ALONGSIDE_MARGIN;
    let back_start = tsv_front + vut.length / 2.0 + RETURN_MARGIN;
    let (change_len, pass_speed, exit_speed) = match case {
        Case::Case1 => (15.0, 0.36 * cap, 0.72 * cap),
        Case::Case2 => (10.0, 0.27 * cap, 0.54 * cap),
        Case::Case3 => (25.0, 0.54 * cap, 0.72 * cap),
    };
    let path = LanePath {
        d_in: spec.lane_width / 2.0,
        d_out: tsv_right + vut.width / 2.0 + clearance,
        out_start: out_end - change_len,
        out_end,
        back_start,
        back_end: back_start + change_len,
    };
    let decel = spec.decel;
    let cruise = |until: f64| Leg {
        target: v0,
        accel: 1.0,
        end: LegEnd::AtS(until),
    };
    let pass = Leg {
        target: pass_speed,
        accel: 1.0,
        end: LegEnd::AtS(path.back_end),
    };
    let exit = Leg {
        target: exit_speed,
        accel: 1.5,
        end: LegEnd::Never,
    };
    let legs = match case {
        Case::Case1 | Case::Case3 => vec![
            cruise(8.0 + shift),
            Leg {
                target: pass_speed,
                accel: decel,
                end: LegEnd::Reached,
            },
            pass,
            exit,
        ],
        // stop where the lane change begins: a stop 2 m short of the rear
        // bumper leaves no room to swing out without steering on the spot
        Case::Case2 => {
            let brake_at = path.out_start - stopping_distance(v0, decel, dt);
            if brake_at <= 0.0 {
                return Err(SynthError::InfeasibleSpec(
                    "no room to brake before the stopped vehicle".into(),
                ));
            }
            vec![
                cruise(brake_at),
                Leg {
                    target: 0.0,
                    accel: decel,
                    end: LegEnd::Stopped { hold: STOP_HOLD_S },
                },
                pass,
                exit,
            ]
        }
    };
    Ok(Plan {
        path,
        s0: phase * v0 / spec.sample_rate,
        v0,
        legs,
        s_end: path.back_end + 15.0,
    })
}

/// One run. Deterministic in `(spec, case, run)`.
pub fn synthesize_run(spec: &ScenarioSpec, case: Case, run: u32) -> Result<Trace, SynthError> {
    spec.validate(case)?;
    let substeps = (1000.0 / spec.sample_rate).ceil().max(1.0) as u64;
    let dt = 1.0 / (spec.sample_rate * substeps as f64);
    let plan = plan(spec, case, run, dt)?;
    let road = Road::new(spec.anchor_lat, spec.anchor_lon, spec.road_heading);
    let vut = spec.vut_profile();

    let tsv_s = TSV_REAR_S + spec.tsv_length / 2.0;
    let tsv_d = spec.tsv_kerb_offset + spec.tsv_width / 2.0;
    let tsv_pos = road.to_geo(tsv_s, tsv_d)?;
    let tsv_box = road.rectangle(tsv_s, tsv_d, spec.tsv_length, spec.tsv_width)?;

    let mut trace = Trace::new(spec.testcase_id.clone(), run);
    let mut tsv = Vec::new();
    let mut lon = Longitudinal::new(plan.v0, plan.legs.clone());
    let mut s = plan.s0;
    let mut travelled = 0.0;
    let max_samples = (MAX_DURATION_S * spec.sample_rate) as u64;
    let mut n: u64 = 0;
    loop {
        if n % substeps == 0 {
            let step = n / substeps;
            if step > max_samples {
                return Err(SynthError::InfeasibleSpec("run does not finish".into()));
            }
            let time = step as f64 / spec.sample_rate;
            let (d, d1, d2) = plan.path.at(s);
            let v = lon.v;
            let a = lon.a;
            let kappa = d2 / (1.0 + d1 * d1).powf(1.5);
            let right = d1 > 1e-3;
            let left = d1 < -1e-3;
            trace.vut.push(VutState {
                time,
                step,
                pos: road.to_geo(s, d)?,
                travelled,
                speed: v,
                acc_lat: v * v * kappa,
                acc_long: a,
                yaw_rate: (kappa * v).to_degrees(),
                pitch_rate: Some(0.0),
                roll_rate: Some(0.0),
                heading: road.heading_at(d1.atan()),
                indicators: Indicators {
                    left_front: left,
                    left_rear: left,
                    right_front: right,
                    right_rear: right,
                    brake: a < -0.5 || v == 0.0,
                    ..Indicators::default()
                },
                throttle: if a > 0.0 { (a / 3.0).min(1.0) } else { 0.0 },
                brake: if a < 0.0 { (-a / 10.0).min(1.0) } else { 0.0 },
                steering_angle: STEERING_RATIO * (WHEELBASE * kappa).atan().to_degrees(),
                drive_status: DriveStatus::Autonomous,
                special_op: SpecialOp::Normal,
            });
            let in_line = (d - tsv_d).abs() < (vut.width + spec.tsv_width) / 2.0;
            let gap = TSV_REAR_S - (s + vut.length / 2.0);
            let ttc = if in_line && gap > 0.0 && v > 0.0 {
                gap / v
            } else {
                f64::INFINITY
            };
            tsv.push(ActorState {
                id: TSV_ID.to_string(),
                time,
                step,
                actor_type: ActorType::Tsv,
                pos: Position::Wgs84(tsv_pos),
                bbox_true: Some(tsv_box.clone()),
                bbox_perceived: None,
                speed: 0.0,
                vel_lat: 0.0,
                vel_long: 0.0,
                acc_lat: 0.0,
                acc_long: 0.0,
                heading: Some(road.heading_at(0.0)),
                ttc,
            });
            if s >= plan.s_end {
                break;
            }
        }
        lon.step(s, dt);
        let (_, d1, _) = plan.path.at(s);
        s += lon.v / (1.0 + d1 * d1).sqrt() * dt;
        travelled += lon.v * dt;
        n += 1;
    }
    trace.actors.insert(TSV_ID.to_string(), tsv);
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clearance::{clearance_series, ClearanceConfig, ExclusionZone};

    #[test]
    fn cases_hit_their_minima() {
        let spec = ScenarioSpec::default();
        for case in Case::ALL {
            let t = synthesize(&spec, case).unwrap();
            let zone = ExclusionZone::new(1.0, 2.0, 0.0);
            let s = clearance_series(&t, TSV_ID, &spec.vut_profile(), &zone, &ClearanceConfig::default())
                .unwrap();
            let min = s.min_lateral();
            assert!((min - case.target_clearance()).abs() < 0.01, "{case}: {min}");
            assert!(s.min_longitudinal() >= 2.0, "{case}: {}", s.min_longitudinal());
            let peak = t.vut.iter().map(|v| v.acc_long).fold(0.0, f64::min);
            assert_eq!(peak, -8.0, "{case}");
        }
    }

    #[test]
    fn deterministic_per_run() {
        let spec = ScenarioSpec::default();
        let a = synthesize_run(&spec, Case::Case2, 3).unwrap();
        let b = synthesize_run(&spec, Case::Case2, 3).unwrap();
        assert_eq!(a, b);
        let c = synthesize_run(&spec, Case::Case2, 4).unwrap();
        assert_ne!(a, c);
    }
}
