//! Planar polygon geometry on `[x, y]` points.

use super::ClearanceError;

pub type Point = [f64; 2];

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    cross(sub(b, a), sub(c, a))
}

fn on_segment(p: Point, a: Point, b: Point) -> bool {
    p[0] >= a[0].min(b[0])
        && p[0] <= a[0].max(b[0])
        && p[1] >= a[1].min(b[1])
        && p[1] <= a[1].max(b[1])
}

/// Closed-segment intersection test, including touching and collinear overlap.
pub fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(p1, q1, q2))
        || (d2 == 0.0 && on_segment(p2, q1, q2))
        || (d3 == 0.0 && on_segment(q1, p1, p2))
        || (d4 == 0.0 && on_segment(q2, p1, p2))
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    let t = if len2 > 0.0 {
        (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let c = [a[0] + t * ab[0], a[1] + t * ab[1]];
    (p[0] - c[0]).hypot(p[1] - c[1])
}

pub fn segment_distance(p1: Point, p2: Point, q1: Point, q2: Point) -> f64 {
    if segments_intersect(p1, p2, q1, q2) {
        return 0.0;
    }
    point_segment_distance(p1, q1, q2)
        .min(point_segment_distance(p2, q1, q2))
        .min(point_segment_distance(q1, p1, p2))
        .min(point_segment_distance(q2, p1, p2))
}

pub fn edges(poly: &[Point]) -> impl Iterator<Item = (Point, Point)> + '_ {
    (0..poly.len()).map(move |i| (poly[i], poly[(i + 1) % poly.len()]))
}

/// Even-odd containment. Points on the boundary may go either way; callers
/// that care about contact test the boundary separately.
pub fn contains_point(poly: &[Point], p: Point) -> bool {
    let mut inside = false;
    for (a, b) in edges(poly) {
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

pub fn signed_area(poly: &[Point]) -> f64 {
    0.5 * edges(poly).map(|(a, b)| cross(a, b)).sum::<f64>()
}

/// Rejects polygons with fewer than three distinct vertices, zero area,
/// non-finite coordinates or self-intersections.
pub fn validate(poly: &[Point]) -> Result<(), ClearanceError> {
    let degenerate = |reason: &str| {
        Err(ClearanceError::DegeneratePolygon {
            reason: reason.to_string(),
        })
    };
    if poly.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return degenerate("non-finite vertex");
    }
    let distinct = edges(poly).filter(|(a, b)| a != b).count();
    if distinct < 3 {
        return degenerate("fewer than 3 distinct vertices");
    }
    if signed_area(poly).abs() <= f64::EPSILON * bbox_scale(poly).powi(2) {
        return degenerate("zero area");
    }
    let n = poly.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            let (a1, a2) = (poly[i], poly[(i + 1) % n]);
            let (b1, b2) = (poly[j], poly[(j + 1) % n]);
            if segments_intersect(a1, a2, b1, b2) {
                return degenerate("self-intersecting");
            }
        }
    }
    Ok(())
}

fn bbox_scale(poly: &[Point]) -> f64 {
    let (lo, hi) = bounds(poly);
    (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1.0)
}

pub fn bounds(poly: &[Point]) -> (Point, Point) {
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

/// True when the closed regions of the two polygons share a point.
pub fn polygons_intersect(a: &[Point], b: &[Point]) -> bool {
    for (p1, p2) in edges(a) {
        for (q1, q2) in edges(b) {
            if segments_intersect(p1, p2, q1, q2) {
                return true;
            }
        }
    }
    contains_point(b, a[0]) || contains_point(a, b[0])
}

/// Minimum distance between the outer bounds of two polygons; 0 when they
/// touch, overlap, or one contains the other.
pub fn min_separation(a: &[Point], b: &[Point]) -> Result<f64, ClearanceError> {
    validate(a)?;
    validate(b)?;
    Ok(separation_unchecked(a, b))
}

pub(crate) fn separation_unchecked(a: &[Point], b: &[Point]) -> f64 {
    if polygons_intersect(a, b) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for (p1, p2) in edges(a) {
        for (q1, q2) in edges(b) {
            best = best.min(segment_distance(p1, p2, q1, q2));
        }
    }
    best
}

/// Range of coordinate `other` over the polygon region restricted to
/// `lo <= p[axis] <= hi`. `None` when the polygon misses the slab.
fn extent_in_slab(poly: &[Point], axis: usize, lo: f64, hi: f64) -> Option<(f64, f64)> {
    let other = 1 - axis;
    let mut range: Option<(f64, f64)> = None;
    let mut include = |v: f64| {
        range = Some(match range {
            None => (v, v),
            Some((a, b)) => (a.min(v), b.max(v)),
        });
    };
    for (p, q) in edges(poly) {
        let (pa, qa) = (p[axis], q[axis]);
        if pa == qa {
            if pa >= lo && pa <= hi {
                include(p[other]);
                include(q[other]);
            }
            continue;
        }
        // parametric clip of p + t (q - p) to the slab
        let t_lo = (lo - pa) / (qa - pa);
        let t_hi = (hi - pa) / (qa - pa);
        let t0 = t_lo.min(t_hi).max(0.0);
        let t1 = t_lo.max(t_hi).min(1.0);
        if t0 <= t1 {
            for t in [t0, t1] {
                include(p[other] + t * (q[other] - p[other]));
            }
        }
    }
    range
}

/// Gap along `other` between the two polygons, measured over the overlap of
/// their projections on `axis`. +inf when the projections do not overlap.
fn axis_gap(a: &[Point], b: &[Point], axis: usize) -> f64 {
    let (alo, ahi) = bounds(a);
    let (blo, bhi) = bounds(b);
    let lo = alo[axis].max(blo[axis]);
    let hi = ahi[axis].min(bhi[axis]);
    if lo > hi {
        return f64::INFINITY;
    }
    match (extent_in_slab(a, axis, lo, hi), extent_in_slab(b, axis, lo, hi)) {
        (Some((amin, amax)), Some((bmin, bmax))) => (bmin - amax).max(amin - bmax),
        _ => f64::INFINITY,
    }
}

/// Lateral (VCS y) and longitudinal (VCS x) clearance between the VUT and an
/// entity, both given in the VUT's frame.
///
/// Lateral clearance only exists while the x-projections overlap (the two
/// bodies are alongside), longitudinal only while the y-projections overlap.
/// Otherwise the value is +inf. Negative values are interpenetration depth.
pub fn directional_clearance(vut: &[Point], entity: &[Point]) -> Result<(f64, f64), ClearanceError> {
    validate(vut)?;
    validate(entity)?;
    Ok((axis_gap(vut, entity, 0), axis_gap(vut, entity, 1)))
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]` as a counter-clockwise polygon.
pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Vec<Point> {
    vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]]
}

/// Rectangle of `length` x `width` centred at `center`, with its long axis
/// rotated `angle` radians from +x towards +y.
pub fn oriented_rectangle(center: Point, length: f64, width: f64, angle: f64) -> Vec<Point> {
    let (s, c) = angle.sin_cos();
    let fwd = [c, s];
    let side = [-s, c];
    let (hl, hw) = (length / 2.0, width / 2.0);
    [(hl, -hw), (hl, hw), (-hl, hw), (-hl, -hw)]
        .iter()
        .map(|&(l, w)| {
            [
                center[0] + l * fwd[0] + w * side[0],
                center[1] + l * fwd[1] + w * side[1],
            ]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x: f64, y: f64) -> Vec<Point> {
        rectangle(x, x + 1.0, y, y + 1.0)
    }

    #[test]
    fn shared_edge_is_contact() {
        assert_eq!(min_separation(&square(0.0, 0.0), &square(1.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn diagonal_corners_three_four_five() {
        let d = min_separation(&square(0.0, 0.0), &square(4.0, 5.0)).unwrap();
        assert!((d - 5.0).abs() < 1e-12);
    }

    #[test]
    fn containment_is_zero() {
        let outer = rectangle(-5.0, 5.0, -5.0, 5.0);
        assert_eq!(min_separation(&outer, &square(0.0, 0.0)).unwrap(), 0.0);
        assert_eq!(min_separation(&square(0.0, 0.0), &outer).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let line = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(min_separation(&line, &square(0.0, 0.0)).is_err());
        let two = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 0.0]];
        assert!(validate(&two).is_err());
        let bowtie = vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(validate(&bowtie).is_err());
    }

    #[test]
    fn entity_dead_ahead_has_only_longitudinal_clearance() {
        let vut = rectangle(-2.25, 2.25, -0.9, 0.9);
        let ahead = rectangle(4.25, 8.65, -0.9, 0.9);
        let (lat, lon) = directional_clearance(&vut, &ahead).unwrap();
        assert!(lat.is_infinite());
        assert!((lon - 2.0).abs() < 1e-12);
    }

    #[test]
    fn entity_abreast_on_the_right() {
        let vut = rectangle(-2.25, 2.25, -0.9, 0.9);
        let right = rectangle(-1.0, 3.4, 0.9 + 1.53, 0.9 + 1.53 + 1.8);
        let (lat, lon) = directional_clearance(&vut, &right).unwrap();
        assert!((lat - 1.53).abs() < 1e-12);
        assert!(lon.is_infinite());
    }

    #[test]
    fn overlap_reports_negative_depth() {
        let vut = rectangle(-2.0, 2.0, -1.0, 1.0);
        let other = rectangle(-1.0, 1.0, 0.7, 2.7);
        let (lat, lon) = directional_clearance(&vut, &other).unwrap();
        assert!((lat + 0.3).abs() < 1e-12);
        assert!(lon < 0.0);
    }

    #[test]
    fn slab_restricts_the_lateral_extent() {
        // triangle whose apex reaches towards the VUT only outside the x-overlap
        let vut = rectangle(0.0, 4.0, 0.0, 2.0);
        let tri = vec![[3.0, 5.0], [10.0, 3.0], [10.0, 6.0]];
        let (lat, _) = directional_clearance(&vut, &tri).unwrap();
        // within x in [3, 4] the lowest point of the triangle is on edge (3,5)-(10,3)
        let y_at_4 = 5.0 - 2.0 / 7.0;
        assert!((lat - (y_at_4 - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn oriented_rectangle_corners() {
        let r = oriented_rectangle([0.0, 0.0], 4.0, 2.0, std::f64::consts::FRAC_PI_2);
        let (lo, hi) = bounds(&r);
        assert!((lo[0] + 1.0).abs() < 1e-12 && (hi[1] - 2.0).abs() < 1e-12);
    }
}
