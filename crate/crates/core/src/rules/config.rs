//! Threshold tables and per-test-case overrides.
//!
//! Override files are TOML:
//!
//! ```toml
//! [default]                      # applies to every test case
//! speed_limit = 13.89
//!
//! [testcase."M2-CL4-S-TST-05-01"]
//! longitudinal = 2.5
//! lateral.cyclist = 2.0
//!
//! [[testcase."M2-CL4-S-TST-05-01".stop_line]]
//! controller = "TL1"
//! lat = 1.3541
//! lon = 103.6958
//! heading = 30.0                 # direction of approach, degrees from North
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::context::ContextClass;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LateralThresholds {
    pub static_obstacle: f64,
    pub stopped_or_parked_vehicle: f64,
    pub pedestrian_facing_traffic: f64,
    pub moving_tsv: f64,
    pub pedestrian_facing_away: f64,
    pub cyclist: f64,
    pub pmd_rider: f64,
}

impl Default for LateralThresholds {
    fn default() -> Self {
        LateralThresholds {
            static_obstacle: 0.5,
            stopped_or_parked_vehicle: 1.0,
            pedestrian_facing_traffic: 1.0,
            moving_tsv: 1.5,
            pedestrian_facing_away: 1.5,
            cyclist: 1.5,
            pmd_rider: 1.5,
        }
    }
}

impl LateralThresholds {
    pub fn get(&self, c: ContextClass) -> Option<f64> {
        Some(match c {
            ContextClass::StaticObstacle => self.static_obstacle,
            ContextClass::StoppedOrParkedVehicle => self.stopped_or_parked_vehicle,
            ContextClass::PedestrianFacingTraffic => self.pedestrian_facing_traffic,
            ContextClass::MovingTsv => self.moving_tsv,
            ContextClass::PedestrianFacingAway => self.pedestrian_facing_away,
            ContextClass::Cyclist => self.cyclist,
            ContextClass::PmdRider => self.pmd_rider,
            ContextClass::LeadRoadUser | ContextClass::LeadObstacle => return None,
        })
    }

    pub fn set(&mut self, c: ContextClass, v: f64) {
        match c {
            ContextClass::StaticObstacle => self.static_obstacle = v,
            ContextClass::StoppedOrParkedVehicle => self.stopped_or_parked_vehicle = v,
            ContextClass::PedestrianFacingTraffic => self.pedestrian_facing_traffic = v,
            ContextClass::MovingTsv => self.moving_tsv = v,
            ContextClass::PedestrianFacingAway => self.pedestrian_facing_away = v,
            ContextClass::Cyclist => self.cyclist = v,
            ContextClass::PmdRider => self.pmd_rider = v,
            ContextClass::LeadRoadUser | ContextClass::LeadObstacle => {}
        }
    }
}

/// How responsibility for a clearance violation is assigned.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributionMode {
    /// Compare closing speeds where the clearance shrinks below threshold.
    #[default]
    ClosingVelocity,
    /// Every violation counts against the VUT.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSet {
    pub lateral: LateralThresholds,
    /// Minimum gap to a road user or obstacle ahead, meters.
    pub longitudinal: f64,
    /// m/s.
    pub speed_limit: f64,
    pub speed_tolerance: f64,
    /// m/s², negative.
    pub decel_limit: f64,
    /// Vehicles slower than this for the whole run count as stopped, m/s.
    pub stopped_speed_eps: f64,
    pub attribution: AttributionMode,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stop_lines: Vec<StopLine>,
}

impl Default for RuleSet {
    fn default() -> Self {
        RuleSet {
            lateral: LateralThresholds::default(),
            longitudinal: 2.0,
            speed_limit: 40.0 / 3.6,
            speed_tolerance: 0.1,
            decel_limit: -8.0,
            stopped_speed_eps: 0.1,
            attribution: AttributionMode::default(),
            stop_lines: Vec::new(),
        }
    }
}

impl RuleSet {
    pub fn threshold(&self, c: ContextClass) -> f64 {
        self.lateral.get(c).unwrap_or(self.longitudinal)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut named: Vec<(&str, f64)> = ContextClass::LATERAL
            .iter()
            .map(|&c| (c.tag(), self.threshold(c)))
            .collect();
        named.push(("longitudinal", self.longitudinal));
        named.push(("speed_limit", self.speed_limit));
        for (name, v) in named {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::Invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.decel_limit.is_finite() && self.decel_limit < 0.0) {
            return Err(ConfigError::Invalid(format!(
                "decel_limit must be negative, got {}",
                self.decel_limit
            )));
        }
        if !(self.speed_tolerance >= 0.0 && self.stopped_speed_eps >= 0.0) {
            return Err(ConfigError::Invalid("tolerances must be non-negative".into()));
        }
        Ok(())
    }
}

/// Stop position associated with a traffic light controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopLine {
    pub controller: String,
    pub lat: f64,
    pub lon: f64,
    /// Direction of travel when approaching the line, degrees from North.
    pub heading: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(default)]
    pub lateral: BTreeMap<String, f64>,
    pub longitudinal: Option<f64>,
    pub speed_limit: Option<f64>,
    pub speed_tolerance: Option<f64>,
    pub decel_limit: Option<f64>,
    pub stopped_speed_eps: Option<f64>,
    pub attribution: Option<AttributionMode>,
    #[serde(default)]
    pub stop_line: Vec<StopLine>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleConfig {
    pub default: Option<Overrides>,
    #[serde(default)]
    pub testcase: BTreeMap<String, Overrides>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot parse rule file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid rule set: {0}")]
    Invalid(String),
}

impl RuleConfig {
    pub fn from_toml(s: &str) -> Result<Self, ConfigError> {
        let cfg: RuleConfig = toml::from_str(s)?;
        for o in cfg.default.iter().chain(cfg.testcase.values()) {
            for key in o.lateral.keys() {
                if !ContextClass::LATERAL.iter().any(|c| c.tag() == key) {
                    return Err(ConfigError::Invalid(format!("unknown lateral context `{key}`")));
                }
            }
        }
        Ok(cfg)
    }

    /// Rule set for one test case plus a log line per applied override.
    pub fn rules_for(&self, testcase_id: &str) -> Result<(RuleSet, Vec<String>), ConfigError> {
        let mut rules = RuleSet::default();
        let mut log = Vec::new();
        if let Some(o) = &self.default {
            apply(&mut rules, o, "default", &mut log);
        }
        if let Some(o) = self.testcase.get(testcase_id) {
            apply(&mut rules, o, testcase_id, &mut log);
        }
        rules.validate()?;
        for line in &log {
            log::info!("{line}");
        }
        Ok((rules, log))
    }
}

fn apply(rules: &mut RuleSet, o: &Overrides, scope: &str, log: &mut Vec<String>) {
    let mut set = |name: &str, slot: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            log.push(format!("[{scope}] {name}: {} -> {v}", *slot));
            *slot = v;
        }
    };
    set("longitudinal", &mut rules.longitudinal, o.longitudinal);
    set("speed_limit", &mut rules.speed_limit, o.speed_limit);
    set("speed_tolerance", &mut rules.speed_tolerance, o.speed_tolerance);
    set("decel_limit", &mut rules.decel_limit, o.decel_limit);
    set("stopped_speed_eps", &mut rules.stopped_speed_eps, o.stopped_speed_eps);
    for (key, &v) in &o.lateral {
        if let Some(&c) = ContextClass::LATERAL.iter().find(|c| c.tag() == key) {
            log.push(format!("[{scope}] lateral.{key}: {} -> {v}", rules.threshold(c)));
            rules.lateral.set(c, v);
        }
    }
    if let Some(mode) = o.attribution {
        log.push(format!("[{scope}] attribution: {:?} -> {mode:?}", rules.attribution));
        rules.attribution = mode;
    }
    for line in &o.stop_line {
        log.push(format!(
            "[{scope}] stop line for {} at ({}, {})",
            line.controller, line.lat, line.lon
        ));
        rules.stop_lines.push(line.clone());
    }
}
