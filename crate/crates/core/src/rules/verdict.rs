//! Verdict types and the clearance verdict.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::config::AttributionMode;
use super::context::ContextClass;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleId {
    LateralClearance,
    LongitudinalClearance,
    SpeedLimit,
    Deceleration,
    TrafficLight,
}

impl RuleId {
    pub fn tag(self) -> &'static str {
        match self {
            RuleId::LateralClearance => "lateral_clearance",
            RuleId::LongitudinalClearance => "longitudinal_clearance",
            RuleId::SpeedLimit => "speed_limit",
            RuleId::Deceleration => "deceleration",
            RuleId::TrafficLight => "traffic_light",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Ordered by severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    NotApplicable,
    Pass,
    Warning,
    Fail,
}

impl Outcome {
    pub fn tag(self) -> &'static str {
        match self {
            Outcome::NotApplicable => "not_applicable",
            Outcome::Pass => "pass",
            Outcome::Warning => "warning",
            Outcome::Fail => "fail",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribution {
    VutAction,
    OtherParty,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRange {
    pub first: u64,
    pub last: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleVerdict {
    pub rule: RuleId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entity: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub context: Option<ContextClass>,
    pub outcome: Outcome,
    /// Extremum of the measured quantity; absent when nothing was measurable.
    pub measured: Option<f64>,
    pub unit: String,
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offending: Option<StepRange>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attribution: Option<Attribution>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl RuleVerdict {
    pub fn new(rule: RuleId, outcome: Outcome, unit: &str) -> Self {
        RuleVerdict {
            rule,
            entity: None,
            context: None,
            outcome,
            measured: None,
            unit: unit.to_string(),
            threshold: None,
            offending: None,
            attribution: None,
            notes: Vec::new(),
        }
    }

    pub fn not_applicable(rule: RuleId, unit: &str, note: impl Into<String>) -> Self {
        let mut v = Self::new(rule, Outcome::NotApplicable, unit);
        v.notes.push(note.into());
        v
    }
}

/// One step of a directional clearance series as the verdict sees it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClearancePoint {
    pub step: u64,
    /// +inf when the clearance does not apply at this step.
    pub value: f64,
    pub threshold: f64,
    pub context: ContextClass,
    pub vut_closing: f64,
    pub entity_closing: f64,
}

/// Verdict for one directional clearance rule over one entity.
///
/// A step violates when its clearance is below the step's threshold. A
/// violation is put on the VUT when the clearance shrank into it at that
/// step while the VUT closed in at least as fast as the other party; any
/// such step fails the rule. Violations that are only ever entered by the
/// other party give a warning. Interpenetration fails regardless.
///
/// Looking at every shrinking step rather than only the first step of each
/// violation keeps the outcome monotone in the threshold: a larger threshold
/// only adds violating steps, never removes the VUT-caused ones.
pub fn clearance_verdict(
    rule: RuleId,
    entity: &str,
    points: &[ClearancePoint],
    mode: AttributionMode,
) -> RuleVerdict {
    let mut v = RuleVerdict::new(rule, Outcome::NotApplicable, "m");
    v.entity = Some(entity.to_string());

    let Some(worst) = points
        .iter()
        .filter(|p| p.value.is_finite())
        .min_by(|a, b| a.value.total_cmp(&b.value))
    else {
        v.context = points.first().map(|p| p.context);
        v.threshold = points.first().map(|p| p.threshold);
        v.notes.push("never in a position where this clearance applies".into());
        return v;
    };
    v.measured = Some(worst.value);
    v.threshold = Some(worst.threshold);
    v.context = Some(worst.context);

    let mut first = None;
    let mut last = None;
    let mut vut_caused = false;
    let mut other_caused = false;
    for (i, p) in points.iter().enumerate() {
        if !(p.value < p.threshold) {
            continue;
        }
        first.get_or_insert(p.step);
        last = Some(p.step);
        let shrinking = i == 0 || p.value < points[i - 1].value;
        if !shrinking {
            continue;
        }
        let by_vut = mode == AttributionMode::Strict || p.entity_closing <= p.vut_closing;
        if by_vut {
            vut_caused = true;
        } else {
            other_caused = true;
        }
    }
    let (Some(first), Some(last)) = (first, last) else {
        v.outcome = Outcome::Pass;
        return v;
    };
    v.offending = Some(StepRange { first, last });
    let collision = worst.value < 0.0;
    v.attribution = Some(if vut_caused {
        Attribution::VutAction
    } else if other_caused {
        Attribution::OtherParty
    } else {
        Attribution::Undetermined
    });
    v.outcome = if vut_caused || collision {
        Outcome::Fail
    } else {
        Outcome::Warning
    };
    if collision {
        v.notes
            .push(format!("bodies interpenetrate by {:.3} m", -worst.value));
    }
    if !vut_caused && other_caused {
        v.notes.push(
            "clearance fell below threshold only while the other party closed in faster than the VUT"
                .into(),
        );
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(values: &[f64], vut_closing: f64, entity_closing: f64) -> Vec<ClearancePoint> {
        values
            .iter()
            .enumerate()
            .map(|(i, &value)| ClearancePoint {
                step: i as u64,
                value,
                threshold: 1.0,
                context: ContextClass::StoppedOrParkedVehicle,
                vut_closing,
                entity_closing,
            })
            .collect()
    }

    const MODE: AttributionMode = AttributionMode::ClosingVelocity;

    #[test]
    fn vut_squeezes_past() {
        let p = pts(&[f64::INFINITY, 2.0, 0.5, 0.21, 0.3, f64::INFINITY], 5.0, 0.0);
        let v = clearance_verdict(RuleId::LateralClearance, "TSV1", &p, MODE);
        assert_eq!(v.outcome, Outcome::Fail);
        assert_eq!(v.measured, Some(0.21));
        assert_eq!(v.offending, Some(StepRange { first: 2, last: 4 }));
        assert_eq!(v.attribution, Some(Attribution::VutAction));
    }

    #[test]
    fn overtaken_by_other_party() {
        let p = pts(&[3.0, 0.8, 0.7, 2.0], -1.0, 4.0);
        let v = clearance_verdict(RuleId::LateralClearance, "moto", &p, MODE);
        assert_eq!(v.outcome, Outcome::Warning);
        assert_eq!(v.attribution, Some(Attribution::OtherParty));
        let strict = clearance_verdict(RuleId::LateralClearance, "moto", &p, AttributionMode::Strict);
        assert_eq!(strict.outcome, Outcome::Fail);
    }

    #[test]
    fn collision_fails_regardless() {
        let p = pts(&[3.0, -0.1], -1.0, 4.0);
        assert_eq!(clearance_verdict(RuleId::LateralClearance, "x", &p, MODE).outcome, Outcome::Fail);
    }

    #[test]
    fn pass_and_not_applicable() {
        let p = pts(&[1.53, 1.6], 5.0, 0.0);
        let v = clearance_verdict(RuleId::LateralClearance, "x", &p, MODE);
        assert_eq!(v.outcome, Outcome::Pass);
        assert!(v.offending.is_none());
        let p = pts(&[f64::INFINITY; 3], 5.0, 0.0);
        let v = clearance_verdict(RuleId::LateralClearance, "x", &p, MODE);
        assert_eq!(v.outcome, Outcome::NotApplicable);
        assert_eq!(v.measured, None);
    }
}
