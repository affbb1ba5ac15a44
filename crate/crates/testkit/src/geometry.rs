//! Brute-force planar geometry references. Nothing here shares code with the
//! library under test.

use rand::Rng;

pub type Pt = [f64; 2];

/// Boundary sampling step, meters.
pub const SAMPLE_STEP: f64 = 1e-3;

fn sub(a: Pt, b: Pt) -> Pt {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: Pt, b: Pt) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dot(a: Pt, b: Pt) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn ring(poly: &[Pt]) -> impl Iterator<Item = (Pt, Pt)> + '_ {
    (0..poly.len()).map(move |i| (poly[i], poly[(i + 1) % poly.len()]))
}

pub fn point_to_segment(p: Pt, a: Pt, b: Pt) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    let t = if len2 == 0.0 {
        0.0
    } else {
        (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0)
    };
    let q = [a[0] + t * ab[0], a[1] + t * ab[1]];
    (p[0] - q[0]).hypot(p[1] - q[1])
}

pub fn point_to_boundary(p: Pt, poly: &[Pt]) -> f64 {
    ring(poly)
        .map(|(a, b)| point_to_segment(p, a, b))
        .fold(f64::INFINITY, f64::min)
}

/// Nonzero winding number test.
pub fn inside(poly: &[Pt], p: Pt) -> bool {
    let mut wn = 0i32;
    for (a, b) in ring(poly) {
        let side = cross(sub(b, a), sub(p, a));
        if a[1] <= p[1] {
            if b[1] > p[1] && side > 0.0 {
                wn += 1;
            }
        } else if b[1] <= p[1] && side < 0.0 {
            wn -= 1;
        }
    }
    wn != 0
}

/// Points along the boundary no more than `step` apart, vertices included.
pub fn boundary_samples(poly: &[Pt], step: f64) -> Vec<Pt> {
    let mut out = Vec::new();
    for (a, b) in ring(poly) {
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        let n = (len / step).ceil().max(1.0) as usize;
        for k in 0..n {
            let t = k as f64 / n as f64;
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

fn bbox(poly: &[Pt]) -> (Pt, Pt) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in poly {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

/// Distance between the two polygon regions from 1 mm boundary samples;
/// 0 when a sample of either lies inside the other.
pub fn separation(a: &[Pt], b: &[Pt]) -> f64 {
    let sa = boundary_samples(a, SAMPLE_STEP);
    let sb = boundary_samples(b, SAMPLE_STEP);
    if sa.iter().any(|&p| inside(b, p)) || sb.iter().any(|&p| inside(a, p)) {
        return 0.0;
    }
    let ab = sa.iter().map(|&p| point_to_boundary(p, b));
    let ba = sb.iter().map(|&p| point_to_boundary(p, a));
    ab.chain(ba).fold(f64::INFINITY, f64::min)
}

/// `(lateral, longitudinal)` gaps from boundary samples: the gap along one
/// axis between the parts of the two polygons whose coordinate on the other
/// axis lies in the overlap of their projections. +inf without overlap;
/// negative when the ranges overlap.
///
/// Both polygons contribute a sampling error of up to one spacing where an
/// edge leaves the slab, so samples are taken at a quarter of `SAMPLE_STEP`
/// to keep the sum under 1 mm.
pub fn directional(vut: &[Pt], entity: &[Pt]) -> (f64, f64) {
    let sv = boundary_samples(vut, SAMPLE_STEP / 4.0);
    let se = boundary_samples(entity, SAMPLE_STEP / 4.0);
    (
        axis_gap(vut, entity, &sv, &se, 0),
        axis_gap(vut, entity, &sv, &se, 1),
    )
}

fn axis_gap(a: &[Pt], b: &[Pt], sa: &[Pt], sb: &[Pt], axis: usize) -> f64 {
    let other = 1 - axis;
    let (alo, ahi) = bbox(a);
    let (blo, bhi) = bbox(b);
    let lo = alo[axis].max(blo[axis]);
    let hi = ahi[axis].min(bhi[axis]);
    if lo > hi {
        return f64::INFINITY;
    }
    let range = |s: &[Pt]| {
        s.iter()
            .filter(|p| p[axis] >= lo && p[axis] <= hi)
            .fold(None, |r: Option<(f64, f64)>, p| {
                let v = p[other];
                Some(r.map_or((v, v), |(m, n)| (m.min(v), n.max(v))))
            })
    };
    match (range(sa), range(sb)) {
        (Some((amin, amax)), Some((bmin, bmax))) => (bmin - amax).max(amin - bmax),
        _ => f64::INFINITY,
    }
}

/// Width of the overlap of the two projections on `axis`, to let callers
/// skip slivers thinner than the sampling step.
pub fn projection_overlap(a: &[Pt], b: &[Pt], axis: usize) -> f64 {
    let (alo, ahi) = bbox(a);
    let (blo, bhi) = bbox(b);
    ahi[axis].min(bhi[axis]) - alo[axis].max(blo[axis])
}

fn orient(a: Pt, b: Pt, c: Pt) -> f64 {
    cross(sub(b, a), sub(c, a))
}

fn on_segment(a: Pt, b: Pt, p: Pt) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

fn segments_cross(p1: Pt, p2: Pt, q1: Pt, q2: Pt) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

pub fn regions_meet(a: &[Pt], b: &[Pt]) -> bool {
    let (alo, ahi) = bbox(a);
    let (blo, bhi) = bbox(b);
    if alo[0] > bhi[0] || blo[0] > ahi[0] || alo[1] > bhi[1] || blo[1] > ahi[1] {
        return false;
    }
    for (p1, p2) in ring(a) {
        for (q1, q2) in ring(b) {
            if segments_cross(p1, p2, q1, q2) {
                return true;
            }
        }
    }
    inside(b, a[0]) || inside(a, b[0])
}

/// First multiple of 1 ms at which the moving polygons meet, within
/// `horizon` seconds; +inf otherwise.
pub fn stepped_contact(a: &[Pt], va: Pt, b: &[Pt], vb: Pt, horizon: f64) -> f64 {
    let rel = sub(vb, va);
    let n = (horizon * 1000.0).round() as u64;
    for k in 0..=n {
        let t = k as f64 / 1000.0;
        let moved: Vec<Pt> = b.iter().map(|p| [p[0] + rel[0] * t, p[1] + rel[1] * t]).collect();
        if regions_meet(a, &moved) {
            return t;
        }
    }
    f64::INFINITY
}

/// Largest inward distance to the rectangle boundary over entity ∩ rect,
/// from a grid of `step` spacing plus 1 mm boundary samples. `None` when no
/// sample of the entity falls inside the rectangle.
pub fn zone_depth(rect: (f64, f64, f64, f64), entity: &[Pt], step: f64) -> Option<f64> {
    let (x0, x1, y0, y1) = rect;
    let depth = |p: Pt| (p[0] - x0).min(x1 - p[0]).min(p[1] - y0).min(y1 - p[1]);
    let within = |p: Pt| p[0] >= x0 && p[0] <= x1 && p[1] >= y0 && p[1] <= y1;
    let mut best: Option<f64> = None;
    let mut take = |p: Pt| {
        if within(p) {
            let d = depth(p);
            best = Some(best.map_or(d, |b| b.max(d)));
        }
    };
    for p in boundary_samples(entity, SAMPLE_STEP) {
        take(p);
    }
    let (lo, hi) = bbox(entity);
    let (gx0, gx1) = (lo[0].max(x0), hi[0].min(x1));
    let (gy0, gy1) = (lo[1].max(y0), hi[1].min(y1));
    if gx0 <= gx1 && gy0 <= gy1 {
        let nx = ((gx1 - gx0) / step).ceil() as usize;
        let ny = ((gy1 - gy0) / step).ceil() as usize;
        for i in 0..=nx {
            for j in 0..=ny {
                let p = [
                    (gx0 + i as f64 * step).min(gx1),
                    (gy0 + j as f64 * step).min(gy1),
                ];
                if inside(entity, p) {
                    take(p);
                }
            }
        }
    }
    best
}

/// Star-shaped simple polygon around `center`: `n` vertices at increasing
/// angles with radii in `[r_min, r_max]`, counter-clockwise.
pub fn random_star<R: Rng>(rng: &mut R, center: Pt, r_min: f64, r_max: f64, n: usize) -> Vec<Pt> {
    let n = n.max(3);
    let mut angles: Vec<f64> = (0..n)
        .map(|k| (k as f64 + rng.random_range(0.1..0.9)) * std::f64::consts::TAU / n as f64)
        .collect();
    angles.sort_by(f64::total_cmp);
    angles
        .into_iter()
        .map(|a| {
            let r = rng.random_range(r_min..=r_max);
            [center[0] + r * a.cos(), center[1] + r * a.sin()]
        })
        .collect()
}

/// Rectangle of `length` along `angle` radians from +x, centred at `center`.
pub fn rotated_rect(center: Pt, length: f64, width: f64, angle: f64) -> Vec<Pt> {
    let (s, c) = angle.sin_cos();
    let (hl, hw) = (length / 2.0, width / 2.0);
    [(hl, -hw), (hl, hw), (-hl, hw), (-hl, -hw)]
        .iter()
        .map(|&(x, y)| [center[0] + x * c - y * s, center[1] + x * s + y * c])
        .collect()
}
