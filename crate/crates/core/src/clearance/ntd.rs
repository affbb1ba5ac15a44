//! Nearest temporal distance under constant-velocity extrapolation.

use super::polygon::{edges, polygons_intersect, Point};

/// Default look-ahead for contact prediction, seconds.
pub const DEFAULT_HORIZON_S: f64 = 30.0;

/// Earliest `t` in `[0, horizon]` at which polygon `a` moving with `va` and
/// polygon `b` moving with `vb` come into contact. +inf if they never do.
///
/// Contact between two translating polygons always starts with a vertex of
/// one reaching an edge of the other, so it is enough to cast every vertex
/// along the relative velocity against the opposite edges.
pub fn time_to_contact(a: &[Point], va: Point, b: &[Point], vb: Point, horizon: f64) -> f64 {
    if polygons_intersect(a, b) {
        return 0.0;
    }
    // motion of b relative to a
    let rel = [vb[0] - va[0], vb[1] - va[1]];
    if rel[0] == 0.0 && rel[1] == 0.0 {
        return f64::INFINITY;
    }
    let mut best = f64::INFINITY;
    for &p in b {
        for (e0, e1) in edges(a) {
            if let Some(t) = ray_hits_segment(p, rel, e0, e1) {
                best = best.min(t);
            }
        }
    }
    let back = [-rel[0], -rel[1]];
    for &p in a {
        for (e0, e1) in edges(b) {
            if let Some(t) = ray_hits_segment(p, back, e0, e1) {
                best = best.min(t);
            }
        }
    }
    if best <= horizon {
        best
    } else {
        f64::INFINITY
    }
}

/// Smallest `t >= 0` with `p + t v` on segment `[e0, e1]`.
fn ray_hits_segment(p: Point, v: Point, e0: Point, e1: Point) -> Option<f64> {
    let e = [e1[0] - e0[0], e1[1] - e0[1]];
    let w = [e0[0] - p[0], e0[1] - p[1]];
    let denom = v[0] * e[1] - v[1] * e[0];
    if denom != 0.0 {
        let t = (w[0] * e[1] - w[1] * e[0]) / denom;
        let u = (w[0] * v[1] - w[1] * v[0]) / denom;
        if t >= 0.0 && (0.0..=1.0).contains(&u) {
            return Some(t);
        }
        return None;
    }
    // parallel: only a collinear segment can be reached, at its nearer end
    if w[0] * v[1] - w[1] * v[0] != 0.0 {
        return None;
    }
    let vv = v[0] * v[0] + v[1] * v[1];
    let t0 = (w[0] * v[0] + w[1] * v[1]) / vv;
    let t1 = ((e1[0] - p[0]) * v[0] + (e1[1] - p[1]) * v[1]) / vv;
    let (lo, hi) = (t0.min(t1), t0.max(t1));
    if hi < 0.0 {
        None
    } else {
        Some(lo.max(0.0))
    }
}
