//! Synthetic traces for the overtaking-a-stopped-vehicle scenario, plus
//! single-encounter traces for threshold sweeps and noisy "physical" twins
//! for fidelity checks.
//!
//! Geometry is a straight road in a local frame anchored near the test
//! track. Road coordinates are `s` along the road and `d` to the right of
//! the left kerb. Only the three clearance minima, the deceleration peak and
//! the speed cap are targets; path shapes and timings are reconstructions.

pub mod encounter;
mod motion;
pub mod overtake;
pub mod perturb;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{GeoError, LocalFrame};
use crate::model::{BoundingShape, GeoPosition, HeadingDeg, VehicleClass, VehicleProfile};

pub use encounter::{encounter, Encounter};
pub use overtake::{synthesize, synthesize_run, synthesize_runs};
pub use perturb::{perturb, Perturbation};

pub const ANCHOR_LAT: f64 = 1.354088453458461;
pub const ANCHOR_LON: f64 = 103.6957499292194;
pub const DEFAULT_TESTCASE_ID: &str = "M2-CL4-S-TST-05-01";
/// Steering wheel to road wheel ratio. A placeholder, not a measured value.
pub const STEERING_RATIO: f64 = 15.0;
/// Wheelbase used to turn path curvature into a steering angle, meters.
pub const WHEELBASE: f64 = 2.7;
/// Longitudinal jerk limit, m/s³.
pub const JERK: f64 = 40.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("infeasible scenario: {0}")]
    InfeasibleSpec(String),
    #[error(transparent)]
    Geo(#[from] GeoError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    /// Squeezes past with about 0.21 m to spare after hard braking.
    Case1,
    /// Stops, then pulls out and passes at about 0.52 m.
    Case2,
    /// Changes lane and passes at about 1.53 m.
    Case3,
}

impl Case {
    pub const ALL: [Case; 3] = [Case::Case1, Case::Case2, Case::Case3];

    /// Target minimum lateral clearance, meters.
    pub fn target_clearance(self) -> f64 {
        match self {
            Case::Case1 => 0.21,
            Case::Case2 => 0.52,
            Case::Case3 => 1.53,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Case::Case1 => "case1",
            Case::Case2 => "case2",
            Case::Case3 => "case3",
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Case {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "case1" | "1" => Ok(Case::Case1),
            "case2" | "2" => Ok(Case::Case2),
            "case3" | "3" => Ok(Case::Case3),
            other => Err(format!("unknown case `{other}` (expected case1, case2 or case3)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpec {
    pub testcase_id: String,
    pub lane_width: f64,
    pub tsv_length: f64,
    pub tsv_width: f64,
    /// Gap between the kerb and the left side of the stopped vehicle.
    pub tsv_kerb_offset: f64,
    pub vut_class: VehicleClass,
    /// Overrides the class length, meters.
    pub vut_length: Option<f64>,
    /// Overrides the class width, meters.
    pub vut_width: Option<f64>,
    /// Minimum lateral clearance to reproduce; the case target when unset.
    pub target_min_lateral_clearance: Option<f64>,
    /// m/s.
    pub speed_cap: f64,
    /// Peak braking magnitude, m/s².
    pub decel: f64,
    /// Hz.
    pub sample_rate: f64,
    pub runs: u32,
    pub seed: u64,
    /// Vary approach speed, braking point and clearance slightly per run.
    pub jitter: bool,
    pub anchor_lat: f64,
    pub anchor_lon: f64,
    /// Direction of travel, degrees from North.
    pub road_heading: f64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            testcase_id: DEFAULT_TESTCASE_ID.to_string(),
            lane_width: 3.3,
            tsv_length: 4.4,
            tsv_width: 1.8,
            tsv_kerb_offset: 0.5,
            vut_class: VehicleClass::Class3,
            vut_length: None,
            vut_width: None,
            target_min_lateral_clearance: None,
            speed_cap: 40.0 / 3.6,
            decel: 8.0,
            sample_rate: 10.0,
            runs: 10,
            seed: 0,
            jitter: true,
            anchor_lat: ANCHOR_LAT,
            anchor_lon: ANCHOR_LON,
            road_heading: 30.0,
        }
    }
}

impl ScenarioSpec {
    pub fn from_toml(s: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(s)
    }

    pub fn vut_profile(&self) -> VehicleProfile {
        let base = VehicleProfile::for_class(self.vut_class);
        match (self.vut_length, self.vut_width) {
            (None, None) => base,
            (l, w) => VehicleProfile::rectangle(
                self.vut_class,
                l.unwrap_or(base.length),
                w.unwrap_or(base.width),
            ),
        }
    }

    pub fn target(&self, case: Case) -> f64 {
        self.target_min_lateral_clearance
            .unwrap_or_else(|| case.target_clearance())
    }

    /// Largest reachable clearance: the VUT must stay on the two lanes of
    /// its own direction of travel.
    pub fn max_clearance(&self) -> f64 {
        let vut = self.vut_profile();
        2.0 * self.lane_width - self.tsv_kerb_offset - self.tsv_width - vut.width
    }

    pub fn validate(&self, case: Case) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InfeasibleSpec(m));
        let vut = self.vut_profile();
        let positive = [
            ("lane_width", self.lane_width),
            ("tsv_length", self.tsv_length),
            ("tsv_width", self.tsv_width),
            ("vut length", vut.length),
            ("vut width", vut.width),
            ("speed_cap", self.speed_cap),
            ("decel", self.decel),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.sample_rate.is_finite() && (1.0..=1000.0).contains(&self.sample_rate)) {
            return bad(format!("sample rate must lie in [1, 1000] Hz, got {}", self.sample_rate));
        }
        if self.runs == 0 || self.runs > 999 {
            return bad(format!("run count must lie in 1..=999, got {}", self.runs));
        }
        if !(self.tsv_kerb_offset >= 0.0
            && self.tsv_kerb_offset + self.tsv_width <= self.lane_width)
        {
            return bad("stopped vehicle does not fit in the kerb-side lane".into());
        }
        if vut.width >= self.lane_width {
            return bad("VUT is wider than a lane".into());
        }
        let target = self.target(case);
        if !(target.is_finite() && target >= 0.0) {
            return bad(format!("target clearance must be non-negative, got {target}"));
        }
        let max = self.max_clearance();
        if target > max {
            return bad(format!(
                "target clearance {target} m exceeds the {max:.2} m the road width allows"
            ));
        }
        if !GeoPosition::new(self.anchor_lat, self.anchor_lon).is_valid() {
            return bad("anchor is not a valid WGS84 position".into());
        }
        Ok(())
    }
}

/// Straight road placed in the world.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Road {
    frame: LocalFrame,
    heading: f64,
}

impl Road {
    pub(crate) fn new(lat: f64, lon: f64, heading: f64) -> Self {
        Road {
            frame: LocalFrame::new(GeoPosition::new(lat, lon)),
            heading: HeadingDeg::new(heading).degrees(),
        }
    }

    /// World position of road point `(s, d)`.
    pub(crate) fn to_geo(&self, s: f64, d: f64) -> Result<GeoPosition, GeoError> {
        let (sin, cos) = self.heading.to_radians().sin_cos();
        // forward (sin, cos), right (cos, -sin)
        self.frame
            .to_geo([s * sin + d * cos, s * cos - d * sin])
    }

    /// Heading of a direction making `angle` radians to the right of the road.
    pub(crate) fn heading_at(&self, angle: f64) -> HeadingDeg {
        HeadingDeg::new(self.heading + angle.to_degrees())
    }

    /// Axis-aligned rectangle in road coordinates, as a WGS84 shape with
    /// vertices rear-left, front-left, front-right, rear-right.
    pub(crate) fn rectangle(
        &self,
        s: f64,
        d: f64,
        length: f64,
        width: f64,
    ) -> Result<BoundingShape, GeoError> {
        let (hl, hw) = (length / 2.0, width / 2.0);
        let corners = [(-hl, -hw), (hl, -hw), (hl, hw), (-hl, hw)];
        let mut out = Vec::with_capacity(4);
        for (ds, dd) in corners {
            out.push(self.to_geo(s + ds, d + dd)?);
        }
        Ok(BoundingShape::from_geo(out))
    }
}

/// Per-run random stream, independent across runs.
pub(crate) fn run_rng(seed: u64, run: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(run));
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        let spec = ScenarioSpec::default();
        for case in Case::ALL {
            spec.validate(case).unwrap();
        }
        assert!((spec.max_clearance() - 2.5).abs() < 1e-12);
        let far = ScenarioSpec {
            target_min_lateral_clearance: Some(2.6),
            ..ScenarioSpec::default()
        };
        assert!(matches!(far.validate(Case::Case3), Err(SynthError::InfeasibleSpec(_))));
        let slow = ScenarioSpec {
            sample_rate: 0.5,
            ..ScenarioSpec::default()
        };
        assert!(slow.validate(Case::Case1).is_err());
    }

    #[test]
    fn spec_file() {
        let s = ScenarioSpec::from_toml("runs = 3\ntarget_min_lateral_clearance = 0.8").unwrap();
        assert_eq!(s.runs, 3);
        assert_eq!(s.target(Case::Case1), 0.8);
        assert_eq!(s.lane_width, 3.3);
        assert!(ScenarioSpec::from_toml("lanes = 3").is_err());
    }

    #[test]
    fn road_axes() {
        let road = Road::new(ANCHOR_LAT, ANCHOR_LON, 90.0);
        let frame = LocalFrame::new(GeoPosition::new(ANCHOR_LAT, ANCHOR_LON));
        // heading east: forward is east, right is south
        let p = frame.to_local(road.to_geo(10.0, 2.0).unwrap()).unwrap();
        assert!((p[0] - 10.0).abs() < 1e-9 && (p[1] + 2.0).abs() < 1e-9, "{p:?}");
    }
}
