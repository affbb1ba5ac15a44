//! WGS84 to local tangent plane, and world <-> VCS transforms.
//!
//! The local frame is an equirectangular approximation: meters-per-degree
//! factors are taken from the WGS84 meridian and prime-vertical radii of
//! curvature at the frame origin. Over test-track extents (a few km) the
//! scale error stays well below 0.1%.

use thiserror::Error;

use crate::model::{GeoPosition, HeadingDeg, VcsPosition};

/// WGS84 semi-major axis, meters.
pub const WGS84_A: f64 = 6_378_137.0;
/// WGS84 first eccentricity squared.
pub const WGS84_E2: f64 = 6.694_379_990_141_316e-3;

/// Beyond this distance from the frame origin the planar approximation is refused.
pub const MAX_EXTENT_M: f64 = 50_000.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("point is {distance:.0} m from the frame origin (limit {limit:.0} m)")]
    ExtentExceeded { distance: f64, limit: f64 },
    #[error("bearing undefined between coincident points")]
    CoincidentPoints,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    pub origin: GeoPosition,
    /// Meters per degree of longitude at the origin (east axis).
    pub east_m_per_deg: f64,
    /// Meters per degree of latitude at the origin (north axis).
    pub north_m_per_deg: f64,
}

impl LocalFrame {
    pub fn new(origin: GeoPosition) -> Self {
        let phi = origin.lat.to_radians();
        let s2 = phi.sin().powi(2);
        let w = (1.0 - WGS84_E2 * s2).sqrt();
        let prime_vertical = WGS84_A / w;
        let meridian = WGS84_A * (1.0 - WGS84_E2) / (w * w * w);
        let rad = std::f64::consts::PI / 180.0;
        LocalFrame {
            origin,
            east_m_per_deg: rad * prime_vertical * phi.cos(),
            north_m_per_deg: rad * meridian,
        }
    }

    /// Planar (east, north) offset of `p` from the origin in meters.
    pub fn to_local(&self, p: GeoPosition) -> Result<[f64; 2], GeoError> {
        let mut dlon = p.lon - self.origin.lon;
        if dlon > 180.0 {
            dlon -= 360.0;
        } else if dlon < -180.0 {
            dlon += 360.0;
        }
        let east = dlon * self.east_m_per_deg;
        let north = (p.lat - self.origin.lat) * self.north_m_per_deg;
        check_extent(east, north)?;
        Ok([east, north])
    }

    /// Inverse of [`LocalFrame::to_local`]. Elevation is taken from the origin.
    pub fn to_geo(&self, local: [f64; 2]) -> Result<GeoPosition, GeoError> {
        check_extent(local[0], local[1])?;
        let mut lon = self.origin.lon + local[0] / self.east_m_per_deg;
        if lon > 180.0 {
            lon -= 360.0;
        } else if lon < -180.0 {
            lon += 360.0;
        }
        Ok(GeoPosition {
            lat: self.origin.lat + local[1] / self.north_m_per_deg,
            lon,
            elev: self.origin.elev,
        })
    }
}

fn check_extent(east: f64, north: f64) -> Result<(), GeoError> {
    let distance = east.hypot(north);
    if !(distance <= MAX_EXTENT_M) {
        return Err(GeoError::ExtentExceeded {
            distance,
            limit: MAX_EXTENT_M,
        });
    }
    Ok(())
}

/// Unit vectors (east, north) of the VCS +x (forward) and +y (right) axes.
pub fn vcs_axes(heading: HeadingDeg) -> ([f64; 2], [f64; 2]) {
    let (s, c) = heading.radians().sin_cos();
    ([s, c], [c, -s])
}

/// Rotates a local east/north offset into the VCS of a vehicle with `heading`.
pub fn local_to_vcs(heading: HeadingDeg, en: [f64; 2]) -> [f64; 2] {
    let (fwd, right) = vcs_axes(heading);
    [
        en[0] * fwd[0] + en[1] * fwd[1],
        en[0] * right[0] + en[1] * right[1],
    ]
}

pub fn vcs_to_local(heading: HeadingDeg, xy: [f64; 2]) -> [f64; 2] {
    let (fwd, right) = vcs_axes(heading);
    [
        xy[0] * fwd[0] + xy[1] * right[0],
        xy[0] * fwd[1] + xy[1] * right[1],
    ]
}

/// Position of `p` relative to the VUT. Pitch and roll are ignored, and the
/// elevation is carried over unchanged rather than converted to a Z-down offset.
pub fn world_to_vcs(
    vut_pos: GeoPosition,
    vut_heading: HeadingDeg,
    p: GeoPosition,
) -> Result<VcsPosition, GeoError> {
    let en = LocalFrame::new(vut_pos).to_local(p)?;
    let [x, y] = local_to_vcs(vut_heading, en);
    Ok(VcsPosition { x, y, z: p.elev })
}

pub fn vcs_to_world(
    vut_pos: GeoPosition,
    vut_heading: HeadingDeg,
    v: VcsPosition,
) -> Result<GeoPosition, GeoError> {
    let en = vcs_to_local(vut_heading, [v.x, v.y]);
    let mut p = LocalFrame::new(vut_pos).to_geo(en)?;
    p.elev = v.z;
    Ok(p)
}

/// Bearing from `a` to `b`: 0 = North, clockwise.
pub fn heading_between(a: GeoPosition, b: GeoPosition) -> Result<HeadingDeg, GeoError> {
    if a.lat == b.lat && a.lon == b.lon {
        return Err(GeoError::CoincidentPoints);
    }
    let [e, n] = LocalFrame::new(a).to_local(b)?;
    if e == 0.0 && n == 0.0 {
        return Err(GeoError::CoincidentPoints);
    }
    Ok(HeadingDeg::new(e.atan2(n).to_degrees()))
}
