//! The `Array<Position>` cell grammar.
//!
//! ```text
//! array   := [ '<' count ] '|' element { '|' element } [ '|' ] [ '>' ]
//! element := number ws number [ ws number ]
//! ```
//!
//! Commas never appear. Whitespace around delimiters is insignificant and an
//! empty element (`||`) is skipped, so both `|a b||c d|` and `| a b | c d |`
//! are accepted.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Frame, GeoPosition, Position, VcsPosition};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArrayError {
    #[error("malformed position array: {0}")]
    Malformed(String),
    #[error("position array declares {declared} positions but holds {found}")]
    CountMismatch { declared: usize, found: usize },
    #[error("position array is empty")]
    Empty,
}

/// How the first two numbers of a WGS84 element map onto latitude and
/// longitude. VCS elements are always `x y [z]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisOrder {
    /// `lat lon [z]`, as the grammar names the components.
    #[default]
    LatLon,
    /// `lon lat [z]`, as in the published worked example.
    LonLat,
}

impl std::str::FromStr for AxisOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lat_lon" | "latlon" | "lat-lon" => Ok(AxisOrder::LatLon),
            "lon_lat" | "lonlat" | "lon-lat" => Ok(AxisOrder::LonLat),
            other => Err(format!("unknown axis order `{other}` (use lat_lon or lon_lat)")),
        }
    }
}

pub fn parse_position_array(
    s: &str,
    frame: Frame,
    order: AxisOrder,
) -> Result<Vec<Position>, ArrayError> {
    let raw = parse_components(s)?;
    Ok(raw
        .into_iter()
        .map(|(a, b, z)| to_position(frame, order, a, b, z))
        .collect())
}

fn to_position(frame: Frame, order: AxisOrder, a: f64, b: f64, z: Option<f64>) -> Position {
    match frame {
        Frame::Vcs => Position::Vcs(VcsPosition { x: a, y: b, z }),
        Frame::Wgs84 => {
            let (lat, lon) = match order {
                AxisOrder::LatLon => (a, b),
                AxisOrder::LonLat => (b, a),
            };
            Position::Wgs84(GeoPosition { lat, lon, elev: z })
        }
    }
}

/// Raw numeric triples in cell order.
pub fn parse_components(s: &str) -> Result<Vec<(f64, f64, Option<f64>)>, ArrayError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ArrayError::Empty);
    }
    if s.contains(',') {
        return Err(ArrayError::Malformed("contains a comma".into()));
    }

    let (declared, body) = if let Some(rest) = s.strip_prefix('<') {
        let inner = rest
            .strip_suffix('>')
            .ok_or_else(|| ArrayError::Malformed("`<` without closing `>`".into()))?;
        let bar = inner
            .find('|')
            .ok_or_else(|| ArrayError::Malformed("no `|` delimiter".into()))?;
        let count_tok = inner[..bar].trim();
        let declared = count_tok
            .parse::<usize>()
            .map_err(|_| ArrayError::Malformed(format!("bad element count `{count_tok}`")))?;
        (Some(declared), &inner[bar..])
    } else {
        let body = s.strip_suffix('>').unwrap_or(s);
        (None, body)
    };

    let body = body.trim();
    if !body.starts_with('|') {
        return Err(ArrayError::Malformed(
            "elements must be introduced by `|`".into(),
        ));
    }
    if body.contains(['<', '>']) {
        return Err(ArrayError::Malformed("stray `<` or `>`".into()));
    }

    let mut out = Vec::new();
    for seg in body.split('|').skip(1) {
        let seg = seg.trim();
        if seg.is_empty() {
            continue;
        }
        let nums = seg
            .split_whitespace()
            .map(|tok| match tok.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(ArrayError::Malformed(format!("non-numeric token `{tok}`"))),
            })
            .collect::<Result<Vec<f64>, _>>()?;
        match nums[..] {
            [a, b] => out.push((a, b, None)),
            [a, b, z] => out.push((a, b, Some(z))),
            _ => {
                return Err(ArrayError::Malformed(format!(
                    "element `{seg}` has {} components, expected 2 or 3",
                    nums.len()
                )))
            }
        }
    }

    if out.is_empty() {
        return Err(ArrayError::Empty);
    }
    if let Some(declared) = declared {
        if declared != out.len() {
            return Err(ArrayError::CountMismatch {
                declared,
                found: out.len(),
            });
        }
    }
    Ok(out)
}

/// Serializes positions. With `emit_count` the form is `< n | a b | c d >`,
/// otherwise `|a b|c d|`. Numbers use the shortest exact decimal form.
pub fn serialize_position_array(
    ps: &[Position],
    order: AxisOrder,
    emit_count: bool,
    emit_z: bool,
) -> Result<String, ArrayError> {
    if ps.is_empty() {
        return Err(ArrayError::Empty);
    }
    let elems: Vec<String> = ps
        .iter()
        .map(|p| {
            let (a, b, z) = match *p {
                Position::Vcs(v) => (v.x, v.y, v.z),
                Position::Wgs84(g) => match order {
                    AxisOrder::LatLon => (g.lat, g.lon, g.elev),
                    AxisOrder::LonLat => (g.lon, g.lat, g.elev),
                },
            };
            let mut e = format!("{a} {b}");
            if emit_z {
                if let Some(z) = z {
                    write!(e, " {z}").unwrap();
                }
            }
            e
        })
        .collect();
    Ok(if emit_count {
        format!("< {} | {} >", elems.len(), elems.join(" | "))
    } else {
        format!("|{}|", elems.join("|"))
    })
}
