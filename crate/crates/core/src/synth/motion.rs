//! Lateral path shapes and a jerk-limited longitudinal speed controller.

use super::JERK;

/// Quintic smoothstep with zero slope and curvature at both ends:
/// value, first and second derivative at `tau` in [0, 1].
fn quintic(tau: f64) -> (f64, f64, f64) {
    let t = tau.clamp(0.0, 1.0);
    let (t2, t3) = (t * t, t * t * t);
    (
        t3 * (10.0 - 15.0 * t + 6.0 * t2),
        30.0 * t2 * (1.0 - 2.0 * t + t2),
        60.0 * t * (1.0 - 3.0 * t + 2.0 * t2),
    )
}

/// Lateral offset as a function of road position: out to `d_out` over
/// `[out_start, out_end]`, hold, back to `d_in` over `[back_start, back_end]`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LanePath {
    pub d_in: f64,
    pub d_out: f64,
    pub out_start: f64,
    pub out_end: f64,
    pub back_start: f64,
    pub back_end: f64,
}

impl LanePath {
    /// `(d, dd/ds, d²d/ds²)` at road position `s`.
    pub fn at(&self, s: f64) -> (f64, f64, f64) {
        let delta = self.d_out - self.d_in;
        if s <= self.out_start || s >= self.back_end {
            (self.d_in, 0.0, 0.0)
        } else if s < self.out_end {
            let l = self.out_end - self.out_start;
            let (q, q1, q2) = quintic((s - self.out_start) / l);
            (self.d_in + delta * q, delta * q1 / l, delta * q2 / (l * l))
        } else if s <= self.back_start {
            (self.d_out, 0.0, 0.0)
        } else {
            let l = self.back_end - self.back_start;
            let (q, q1, q2) = quintic((s - self.back_start) / l);
            (self.d_out - delta * q, -delta * q1 / l, -delta * q2 / (l * l))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum LegEnd {
    /// Road position reached.
    AtS(f64),
    /// Target speed reached and held.
    Reached,
    /// Stopped, then held for the given seconds.
    Stopped { hold: f64 },
    Never,
}

/// Drive towards `target` speed with at most `accel` m/s² until `end`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Leg {
    pub target: f64,
    pub accel: f64,
    pub end: LegEnd,
}

/// Speed state advanced in fixed substeps.
#[derive(Debug, Clone)]
pub(crate) struct Longitudinal {
    pub v: f64,
    pub a: f64,
    legs: Vec<Leg>,
    leg: usize,
    held: f64,
}

impl Longitudinal {
    pub fn new(v0: f64, legs: Vec<Leg>) -> Self {
        Longitudinal {
            v: v0,
            a: 0.0,
            legs,
            leg: 0,
            held: 0.0,
        }
    }

    /// Advances speed by `dt`; `s` is the current road position.
    pub fn step(&mut self, s: f64, dt: f64) {
        let Some(leg) = self.legs.get(self.leg).copied() else {
            self.a = 0.0;
            return;
        };
        let err = leg.target - self.v;
        let a_des = if err.abs() < 1e-9 {
            0.0
        } else {
            err.signum() * leg.accel.min((2.0 * JERK * err.abs()).sqrt())
        };
        let da = a_des - self.a;
        if da.abs() <= JERK * dt {
            self.a = a_des;
        } else {
            self.a += JERK * dt * da.signum();
        }
        self.v += self.a * dt;
        if self.v <= 0.0 && leg.target <= 0.0 {
            self.v = 0.0;
            self.a = 0.0;
        }
        self.v = self.v.max(0.0);

        let done = match leg.end {
            LegEnd::AtS(x) => s >= x,
            LegEnd::Reached => {
                let settled = (leg.target - self.v).abs() < 1e-4 && self.a.abs() < 1e-2;
                if settled {
                    self.v = leg.target;
                    self.a = 0.0;
                }
                settled
            }
            LegEnd::Stopped { hold } => {
                if self.v == 0.0 {
                    self.held += dt;
                }
                self.held >= hold - 1e-9
            }
            LegEnd::Never => false,
        };
        if done {
            self.leg += 1;
            self.held = 0.0;
        }
    }
}

/// Distance covered braking from `v0` to a stop, integrated with the same
/// substep as the trace.
pub(crate) fn stopping_distance(v0: f64, decel: f64, dt: f64) -> f64 {
    let mut lon = Longitudinal::new(
        v0,
        vec![Leg {
            target: 0.0,
            accel: decel,
            end: LegEnd::Never,
        }],
    );
    let mut s = 0.0;
    // generous bound: twice the time of an instant full-decel stop plus ramps
    let max_steps = ((2.0 * v0 / decel + 2.0) / dt) as usize + 1;
    for _ in 0..max_steps {
        lon.step(s, dt);
        s += lon.v * dt;
        if lon.v == 0.0 {
            break;
        }
    }
    s
}
