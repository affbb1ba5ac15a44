use serde::{Deserialize, Serialize};

use super::polygon::{bounds, contains_point, edges, polygons_intersect, rectangle, validate, Point};
use super::ClearanceError;

/// Buffer around the VUT footprint that no road user should enter because
/// of the VUT's own actions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExclusionZone {
    /// Meters on each side.
    pub lateral_extent: f64,
    pub front_extent: f64,
    pub rear_extent: f64,
}

impl ExclusionZone {
    pub fn new(lateral_extent: f64, front_extent: f64, rear_extent: f64) -> Self {
        ExclusionZone {
            lateral_extent,
            front_extent,
            rear_extent,
        }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn is_valid(&self) -> bool {
        [self.lateral_extent, self.front_extent, self.rear_extent]
            .iter()
            .all(|e| e.is_finite() && *e >= 0.0)
    }

    /// Zone rectangle `(x0, x1, y0, y1)` in VCS: the footprint's bounding box
    /// dilated by the extents.
    pub fn rect(&self, footprint: &[Point]) -> (f64, f64, f64, f64) {
        let (lo, hi) = bounds(footprint);
        (
            lo[0] - self.rear_extent,
            hi[0] + self.front_extent,
            lo[1] - self.lateral_extent,
            hi[1] + self.lateral_extent,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Incursion {
    pub inside: bool,
    /// Largest distance from a point of the entity to the zone boundary,
    /// measured inwards. 0 when outside or merely touching.
    pub depth: f64,
}

pub fn zone_incursion(
    zone: &ExclusionZone,
    vut: &[Point],
    entity: &[Point],
) -> Result<Incursion, ClearanceError> {
    if !zone.is_valid() {
        return Err(ClearanceError::InvalidZone);
    }
    validate(vut)?;
    validate(entity)?;
    let (x0, x1, y0, y1) = zone.rect(vut);
    let zone_poly = rectangle(x0, x1, y0, y1);
    if !polygons_intersect(&zone_poly, entity) {
        return Ok(Incursion {
            inside: false,
            depth: 0.0,
        });
    }
    Ok(Incursion {
        inside: true,
        depth: max_depth((x0, x1, y0, y1), entity),
    })
}

fn depth_at(r: (f64, f64, f64, f64), p: Point) -> f64 {
    let (x0, x1, y0, y1) = r;
    (p[0] - x0).min(x1 - p[0]).min(p[1] - y0).min(y1 - p[1])
}

/// Maximum of the inward boundary distance over `entity ∩ rect`.
///
/// That function is concave and piecewise linear, with creases along the
/// rectangle's medial axis, so its maximum over the region lies on one of:
/// entity boundary points clipped to the rectangle, crossings of the entity
/// boundary with the medial axis, or medial-axis nodes inside the entity.
fn max_depth(r: (f64, f64, f64, f64), entity: &[Point]) -> f64 {
    let (x0, x1, y0, y1) = r;
    let (w, h) = (x1 - x0, y1 - y0);
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let half = w.min(h) / 2.0;
    let (n0, n1) = if w >= h {
        ([x0 + half, cy], [x1 - half, cy])
    } else {
        ([cx, y0 + half], [cx, y1 - half])
    };
    let medial = [
        (n0, n1),
        ([x0, y0], n0),
        ([x0, y1], n0),
        ([x1, y0], n1),
        ([x1, y1], n1),
    ];

    let mut best: f64 = 0.0;
    for (p, q) in edges(entity) {
        let Some((a, b)) = clip_segment(r, p, q) else {
            continue;
        };
        best = best.max(depth_at(r, a)).max(depth_at(r, b));
        for &(m0, m1) in &medial {
            if let Some(x) = segment_crossing(a, b, m0, m1) {
                best = best.max(depth_at(r, x));
            }
        }
    }
    for node in [n0, n1] {
        if contains_point(entity, node) {
            best = best.max(depth_at(r, node));
        }
    }
    best.max(0.0)
}

/// Liang-Barsky clip of segment `p-q` to the rectangle.
fn clip_segment(r: (f64, f64, f64, f64), p: Point, q: Point) -> Option<(Point, Point)> {
    let (x0, x1, y0, y1) = r;
    let d = [q[0] - p[0], q[1] - p[1]];
    let mut t0: f64 = 0.0;
    let mut t1: f64 = 1.0;
    for (den, num) in [
        (-d[0], p[0] - x0),
        (d[0], x1 - p[0]),
        (-d[1], p[1] - y0),
        (d[1], y1 - p[1]),
    ] {
        if den == 0.0 {
            if num < 0.0 {
                return None;
            }
        } else {
            let t = num / den;
            if den < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
    }
    if t0 > t1 {
        return None;
    }
    let at = |t: f64| [p[0] + t * d[0], p[1] + t * d[1]];
    Some((at(t0), at(t1)))
}

fn segment_crossing(a: Point, b: Point, c: Point, d: Point) -> Option<Point> {
    let r = [b[0] - a[0], b[1] - a[1]];
    let s = [d[0] - c[0], d[1] - c[1]];
    let denom = r[0] * s[1] - r[1] * s[0];
    if denom == 0.0 {
        return None;
    }
    let w = [c[0] - a[0], c[1] - a[1]];
    let t = (w[0] * s[1] - w[1] * s[0]) / denom;
    let u = (w[0] * r[1] - w[1] * r[0]) / denom;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u))
        .then(|| [a[0] + t * r[0], a[1] + t * r[1]])
}
