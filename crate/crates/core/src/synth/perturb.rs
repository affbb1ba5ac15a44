//! Noisy, time-shifted copies of a trace standing in for a physical run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::geo::LocalFrame;
use crate::model::{HeadingDeg, Trace, VutState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    /// Standard deviation of the east and north position noise, meters.
    pub position_sigma: f64,
    /// m/s.
    pub speed_sigma: f64,
    /// Events happen this many seconds later in the copy.
    pub time_shift: f64,
    pub seed: u64,
}

impl Default for Perturbation {
    fn default() -> Self {
        Perturbation {
            position_sigma: 0.0,
            speed_sigma: 0.0,
            time_shift: 0.0,
            seed: 0,
        }
    }
}

/// Copy of `t` whose VUT content is delayed by `time_shift` and noised.
///
/// Timestamps and steps are kept, so the copy satisfies the same integrity
/// rules as the original; the VUT state at time `t` is interpolated from the
/// original at `t - time_shift`, held at the first or last record outside
/// the recorded span. Environment records are copied unchanged. Negative
/// sigmas count as zero.
pub fn perturb(t: &Trace, p: &Perturbation) -> Trace {
    let mut out = t.clone();
    if t.vut.is_empty() {
        return out;
    }
    let frame = LocalFrame::new(t.vut[0].pos);
    if p.time_shift != 0.0 {
        for (dst, src) in out.vut.iter_mut().zip(&t.vut) {
            let shifted = state_at(&t.vut, &frame, src.time - p.time_shift);
            *dst = VutState {
                time: src.time,
                step: src.step,
                ..shifted
            };
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    if p.position_sigma > 0.0 {
        let n = Normal::new(0.0, p.position_sigma).expect("finite sigma");
        for s in &mut out.vut {
            let Ok(en) = frame.to_local(s.pos) else {
                continue;
            };
            let moved = [en[0] + n.sample(&mut rng), en[1] + n.sample(&mut rng)];
            if let Ok(mut g) = frame.to_geo(moved) {
                g.elev = s.pos.elev;
                s.pos = g;
            }
        }
    }
    if p.speed_sigma > 0.0 {
        let n = Normal::new(0.0, p.speed_sigma).expect("finite sigma");
        for s in &mut out.vut {
            s.speed = (s.speed + n.sample(&mut rng)).max(0.0);
        }
    }
    out
}

/// Linear interpolation of the continuous fields; discrete fields come from
/// the earlier record.
fn state_at(vut: &[VutState], frame: &LocalFrame, time: f64) -> VutState {
    let last = vut.len() - 1;
    if time <= vut[0].time {
        return vut[0].clone();
    }
    if time >= vut[last].time {
        return vut[last].clone();
    }
    let i = vut.partition_point(|s| s.time <= time) - 1;
    let (a, b) = (&vut[i], &vut[i + 1]);
    let w = (time - a.time) / (b.time - a.time);
    let lerp = |x: f64, y: f64| x + w * (y - x);
    let lerp_opt = |x: Option<f64>, y: Option<f64>| match (x, y) {
        (Some(x), Some(y)) => Some(lerp(x, y)),
        _ => x,
    };
    let pos = match (frame.to_local(a.pos), frame.to_local(b.pos)) {
        (Ok(pa), Ok(pb)) => frame
            .to_geo([lerp(pa[0], pb[0]), lerp(pa[1], pb[1])])
            .map(|mut g| {
                g.elev = lerp_opt(a.pos.elev, b.pos.elev);
                g
            })
            .unwrap_or(a.pos),
        _ => a.pos,
    };
    let dh = b.heading.degrees() - a.heading.degrees();
    let dh = (dh + 180.0).rem_euclid(360.0) - 180.0;
    VutState {
        pos,
        travelled: lerp(a.travelled, b.travelled),
        speed: lerp(a.speed, b.speed),
        acc_lat: lerp(a.acc_lat, b.acc_lat),
        acc_long: lerp(a.acc_long, b.acc_long),
        yaw_rate: lerp(a.yaw_rate, b.yaw_rate),
        pitch_rate: lerp_opt(a.pitch_rate, b.pitch_rate),
        roll_rate: lerp_opt(a.roll_rate, b.roll_rate),
        heading: HeadingDeg::new(a.heading.degrees() + w * dh),
        throttle: lerp(a.throttle, b.throttle),
        brake: lerp(a.brake, b.brake),
        steering_angle: lerp(a.steering_angle, b.steering_angle),
        ..a.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{synthesize, Case, ScenarioSpec};

    #[test]
    fn zero_perturbation_is_identity() {
        let t = synthesize(&ScenarioSpec::default(), Case::Case3).unwrap();
        assert_eq!(perturb(&t, &Perturbation::default()), t);
    }

    #[test]
    fn whole_sample_shift_moves_content() {
        let t = synthesize(&ScenarioSpec::default(), Case::Case3).unwrap();
        let p = perturb(
            &t,
            &Perturbation {
                time_shift: 0.5,
                ..Perturbation::default()
            },
        );
        assert_eq!(p.vut.len(), t.vut.len());
        for i in 5..t.vut.len() {
            assert_eq!(p.vut[i].time, t.vut[i].time);
            assert!((p.vut[i].speed - t.vut[i - 5].speed).abs() < 1e-9);
        }
    }
}
