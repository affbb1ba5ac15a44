//! Safety rule evaluation: per-run verdicts and aggregation over runs.

pub mod config;
pub mod context;
pub mod kinematics;
pub mod verdict;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::clearance::{
    clearance_series, ClearanceConfig, ClearanceError, ClearanceSeries, ExclusionZone,
};
use crate::model::{Trace, VehicleProfile};

pub use config::{AttributionMode, LateralThresholds, RuleConfig, RuleSet, StopLine};
pub use context::{classify_actor, ContextClass};
pub use kinematics::{evaluate_kinematics, evaluate_traffic_lights};
pub use verdict::{
    clearance_verdict, Attribution, ClearancePoint, Outcome, RuleId, RuleVerdict, StepRange,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEvaluation {
    pub testcase_id: String,
    pub run_id: u32,
    pub passed: bool,
    pub verdicts: Vec<RuleVerdict>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<String>,
}

impl RunEvaluation {
    pub fn failures(&self) -> impl Iterator<Item = &RuleVerdict> {
        self.verdicts.iter().filter(|v| v.outcome == Outcome::Fail)
    }

    pub fn verdict(&self, rule: RuleId, entity: Option<&str>) -> Option<&RuleVerdict> {
        self.verdicts
            .iter()
            .find(|v| v.rule == rule && v.entity.as_deref() == entity)
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let status = if self.passed { "PASS" } else { "FAIL" };
        writeln!(s, "{} run r{:02}: {status}", self.testcase_id, self.run_id).unwrap();
        for line in &self.overrides {
            writeln!(s, "  override {line}").unwrap();
        }
        for v in &self.verdicts {
            s.push_str(&render_verdict(v));
        }
        s
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.3}"),
        Some(x) => format!("{x}"),
        None => "-".into(),
    }
}

fn render_verdict(v: &RuleVerdict) -> String {
    let mut s = format!("  {:<7} {}", v.outcome.tag().to_uppercase(), v.rule);
    if let Some(e) = &v.entity {
        write!(s, " [{e}]").unwrap();
    }
    if let Some(c) = v.context {
        write!(s, " ({c})").unwrap();
    }
    write!(
        s,
        ": measured {} {}, threshold {}",
        fmt_opt(v.measured),
        v.unit,
        fmt_opt(v.threshold)
    )
    .unwrap();
    if let Some(r) = v.offending {
        write!(s, ", steps {}..={}", r.first, r.last).unwrap();
    }
    if let Some(a) = v.attribution {
        let a = match a {
            Attribution::VutAction => "vut_action",
            Attribution::OtherParty => "other_party",
            Attribution::Undetermined => "undetermined",
        };
        write!(s, ", attribution {a}").unwrap();
    }
    s.push('\n');
    for n in &v.notes {
        writeln!(s, "          note: {n}").unwrap();
    }
    s
}

/// Verdicts plus the clearance series they were computed from.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub evaluation: RunEvaluation,
    pub series: Vec<ClearanceSeries>,
}

/// Evaluates every rule on one run.
pub fn evaluate_run(
    trace: &Trace,
    profile: &VehicleProfile,
    rules: &RuleSet,
    config: &ClearanceConfig,
) -> Result<RunOutput, ClearanceError> {
    let mut t = trace.clone();
    t.normalize_obstacle_actors();
    let mut verdicts = Vec::new();
    let mut series = Vec::new();

    for (id, recs) in &t.actors {
        let mut contexts = Vec::with_capacity(recs.len());
        let mut missing_heading = false;
        for (i, rec) in recs.iter().enumerate() {
            let vut = t
                .vut_at_step(rec.step)
                .ok_or(ClearanceError::MissingVutStep(rec.step))?;
            let (c, missing) = classify_actor(recs, i, vut, rules.stopped_speed_eps);
            missing_heading |= missing;
            contexts.push(c);
        }
        let lateral_extent = contexts
            .iter()
            .map(|&c| rules.threshold(c))
            .fold(0.0, f64::max);
        let zone = ExclusionZone::new(lateral_extent, rules.longitudinal, 0.0);
        let s = clearance_series(&t, id, profile, &zone, config)?;
        let (mut lat, lon) = clearance_verdicts(&s, &contexts, ContextClass::LeadRoadUser, rules);
        if missing_heading {
            lat.notes
                .push("pedestrian heading missing; facing-away threshold applied".into());
        }
        if s.default_footprint {
            lat.notes
                .push("no bounding box recorded; default footprint for the actor type used".into());
        }
        verdicts.push(lat);
        verdicts.push(lon);
        series.push(s);
    }

    for (id, recs) in &t.obstacles {
        if recs.iter().any(|r| r.obst_type.is_fixed_infrastructure()) {
            for rule in [RuleId::LateralClearance, RuleId::LongitudinalClearance] {
                let mut v = RuleVerdict::not_applicable(
                    rule,
                    "m",
                    "fixed infrastructure; the exclusion zone does not apply",
                );
                v.entity = Some(id.clone());
                verdicts.push(v);
            }
            continue;
        }
        let contexts = vec![ContextClass::StaticObstacle; recs.len()];
        let zone = ExclusionZone::new(
            rules.threshold(ContextClass::StaticObstacle),
            rules.longitudinal,
            0.0,
        );
        let s = clearance_series(&t, id, profile, &zone, config)?;
        let (lat, lon) = clearance_verdicts(&s, &contexts, ContextClass::LeadObstacle, rules);
        verdicts.push(lat);
        verdicts.push(lon);
        series.push(s);
    }

    verdicts.extend(evaluate_kinematics(&t, rules));
    verdicts.extend(evaluate_traffic_lights(&t, profile, rules));

    let passed = verdicts.iter().all(|v| v.outcome != Outcome::Fail);
    Ok(RunOutput {
        evaluation: RunEvaluation {
            testcase_id: t.testcase_id.clone(),
            run_id: t.run_id,
            passed,
            verdicts,
            overrides: Vec::new(),
        },
        series,
    })
}

/// Lateral and longitudinal verdicts for one entity. `contexts` holds the
/// lateral context of each sample.
pub fn clearance_verdicts(
    s: &ClearanceSeries,
    contexts: &[ContextClass],
    lead: ContextClass,
    rules: &RuleSet,
) -> (RuleVerdict, RuleVerdict) {
    let lateral: Vec<ClearancePoint> = s
        .samples
        .iter()
        .zip(contexts)
        .map(|(x, &c)| ClearancePoint {
            step: x.step,
            value: x.lateral,
            threshold: rules.threshold(c),
            context: c,
            vut_closing: x.vut_closing,
            entity_closing: x.entity_closing,
        })
        .collect();
    let longitudinal: Vec<ClearancePoint> = s
        .samples
        .iter()
        .map(|x| ClearancePoint {
            step: x.step,
            value: if x.ahead { x.longitudinal } else { f64::INFINITY },
            threshold: rules.threshold(lead),
            context: lead,
            vut_closing: x.vut_closing,
            entity_closing: x.entity_closing,
        })
        .collect();
    (
        clearance_verdict(RuleId::LateralClearance, &s.entity_id, &lateral, rules.attribution),
        clearance_verdict(
            RuleId::LongitudinalClearance,
            &s.entity_id,
            &longitudinal,
            rules.attribution,
        ),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: u32,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failed_rules: Vec<String>,
}

/// Spread of one measured extremum across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub rule: RuleId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entity: Option<String>,
    pub unit: String,
    pub runs: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestCaseEvaluation {
    pub testcase_id: String,
    pub n_required: usize,
    pub distinct_runs: usize,
    pub passed: bool,
    pub runs: Vec<RunSummary>,
    pub spread: Vec<Spread>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl TestCaseEvaluation {
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let status = if self.passed { "PASS" } else { "FAIL" };
        writeln!(
            s,
            "{}: {status} ({} distinct runs, {} required)",
            self.testcase_id, self.distinct_runs, self.n_required
        )
        .unwrap();
        for n in &self.notes {
            writeln!(s, "  note: {n}").unwrap();
        }
        for r in &self.runs {
            let st = if r.passed { "pass" } else { "FAIL" };
            write!(s, "  r{:02} {st}", r.run_id).unwrap();
            if !r.failed_rules.is_empty() {
                write!(s, " ({})", r.failed_rules.join(", ")).unwrap();
            }
            s.push('\n');
        }
        for sp in &self.spread {
            write!(s, "  {}", sp.rule).unwrap();
            if let Some(e) = &sp.entity {
                write!(s, " [{e}]").unwrap();
            }
            writeln!(
                s,
                ": min {:.3} max {:.3} mean {:.3} {} over {} runs",
                sp.min, sp.max, sp.mean, sp.unit, sp.runs
            )
            .unwrap();
        }
        s
    }
}

/// Combines the runs of one test case. The test case passes only when at
/// least `n_required` distinct runs are present and every run passes.
pub fn aggregate(testcase_id: &str, runs: &[RunEvaluation], n_required: usize) -> TestCaseEvaluation {
    let mut summaries: Vec<RunSummary> = runs
        .iter()
        .map(|r| RunSummary {
            run_id: r.run_id,
            passed: r.passed,
            failed_rules: r
                .failures()
                .map(|v| match &v.entity {
                    Some(e) => format!("{}[{e}]", v.rule),
                    None => v.rule.to_string(),
                })
                .collect(),
        })
        .collect();
    summaries.sort_by_key(|r| r.run_id);
    let distinct: BTreeSet<u32> = runs.iter().map(|r| r.run_id).collect();

    let mut values: BTreeMap<(RuleId, Option<String>), (String, Vec<f64>)> = BTreeMap::new();
    for r in runs {
        for v in &r.verdicts {
            if let Some(m) = v.measured.filter(|m| m.is_finite()) {
                values
                    .entry((v.rule, v.entity.clone()))
                    .or_insert_with(|| (v.unit.clone(), Vec::new()))
                    .1
                    .push(m);
            }
        }
    }
    let spread = values
        .into_iter()
        .map(|((rule, entity), (unit, xs))| Spread {
            rule,
            entity,
            unit,
            runs: xs.len(),
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: xs.iter().sum::<f64>() / xs.len() as f64,
        })
        .collect();

    let mut notes = Vec::new();
    if distinct.len() < n_required {
        notes.push(format!(
            "only {} distinct run(s) present, {n_required} required",
            distinct.len()
        ));
    }
    if distinct.len() < runs.len() {
        notes.push("duplicate run ids present".into());
    }
    let passed = distinct.len() >= n_required && !runs.is_empty() && runs.iter().all(|r| r.passed);
    TestCaseEvaluation {
        testcase_id: testcase_id.to_string(),
        n_required,
        distinct_runs: distinct.len(),
        passed,
        runs: summaries,
        spread,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(id: u32, passed: bool, measured: f64) -> RunEvaluation {
        let mut v = RuleVerdict::new(
            RuleId::LateralClearance,
            if passed { Outcome::Pass } else { Outcome::Fail },
            "m",
        );
        v.entity = Some("TSV1".into());
        v.measured = Some(measured);
        if !passed {
            v.offending = Some(StepRange { first: 1, last: 2 });
        }
        RunEvaluation {
            testcase_id: "TC".into(),
            run_id: id,
            passed,
            verdicts: vec![v],
            overrides: vec![],
        }
    }

    #[test]
    fn aggregation() {
        let runs: Vec<_> = (1..=10).map(|i| run(i, true, 1.5 + i as f64 * 0.01)).collect();
        let agg = aggregate("TC", &runs, 10);
        assert!(agg.passed);
        let sp = &agg.spread[0];
        assert_eq!(sp.runs, 10);
        assert!((sp.min - 1.51).abs() < 1e-12);
        assert!((sp.max - 1.60).abs() < 1e-12);
        assert!((sp.mean - 1.555).abs() < 1e-12);

        let mut runs = runs;
        runs[4] = run(5, false, 0.3);
        let agg = aggregate("TC", &runs, 10);
        assert!(!agg.passed);
        assert_eq!(agg.runs[4].failed_rules, vec!["lateral_clearance[TSV1]"]);

        let agg = aggregate("TC", &runs[..9].iter().filter(|r| r.passed).cloned().collect::<Vec<_>>(), 10);
        assert!(!agg.passed);
    }

    #[test]
    fn not_applicable_never_blocks() {
        let mut r = run(1, true, 2.0);
        r.verdicts.push(RuleVerdict::not_applicable(RuleId::TrafficLight, "", "none"));
        assert!(aggregate("TC", &[r], 1).passed);
    }
}
