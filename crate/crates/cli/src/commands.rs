use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use vista_core::clearance::ClearanceConfig;
use vista_core::fidelity::{self, Tolerances};
use vista_core::model::{Trace, VehicleClass, VehicleProfile};
use vista_core::parse::naming::folder_name;
use vista_core::parse::{
    check_frequency, check_run_set, write_trace, FileLayout, Finding, FindingCode, LayoutKind,
    ParseOptions, WriteOptions,
};
use vista_core::rules::{aggregate, evaluate_run, RuleConfig, RunEvaluation, TestCaseEvaluation};
use vista_core::synth::{synthesize_run, Case, ScenarioSpec};

use crate::inputs::{self, Parsed, RunKind, RunPath};
use crate::output::{clearance_csv, kinematics_csv, write_file, write_json};
use crate::{Common, LayoutHint, Status};

fn parse_options(common: &Common) -> ParseOptions {
    ParseOptions {
        axis_order: common.axis_order,
    }
}

fn print_findings(findings: &[Finding]) {
    for f in findings {
        println!("  {f}");
    }
}

/// Unreadable inputs are operational errors rather than validation failures.
fn unreadable(parsed: &[Parsed]) -> bool {
    parsed
        .iter()
        .any(|p| p.report.contains(FindingCode::UnreadableFile))
}

#[derive(Serialize)]
struct RunCheck {
    input: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    testcase_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    run_id: Option<u32>,
    errors: usize,
    warnings: usize,
}

#[derive(Serialize)]
struct RunSetCheck {
    testcase_id: String,
    runs: usize,
    findings: Vec<Finding>,
}

#[derive(Serialize)]
struct ValidationSummary {
    passed: bool,
    f_min: f64,
    n_required: usize,
    runs: Vec<RunCheck>,
    run_sets: Vec<RunSetCheck>,
}

fn by_testcase(traces: impl IntoIterator<Item = Trace>) -> BTreeMap<String, Vec<Trace>> {
    let mut m: BTreeMap<String, Vec<Trace>> = BTreeMap::new();
    for t in traces {
        m.entry(t.testcase_id.clone()).or_default().push(t);
    }
    for runs in m.values_mut() {
        runs.sort_by_key(|t| t.run_id);
    }
    m
}

pub fn validate(common: &Common, paths: &[PathBuf], f_min: f64, n_required: usize) -> Result<Status> {
    if !(f_min > 0.0) {
        bail!("--f-min must be positive");
    }
    let runs = inputs::expand(paths, common.layout)?;
    let mut parsed = inputs::parse_all(&runs, &parse_options(common));
    for p in &mut parsed {
        if let Some(t) = &p.trace {
            p.report.extend(check_frequency(t, f_min));
        }
    }

    let mut passed = true;
    let mut checks = Vec::new();
    for p in &parsed {
        let label = p.run.label();
        let (e, w) = (p.report.error_count(), p.report.warning_count());
        passed &= e == 0;
        if e == 0 && w == 0 {
            println!("{label}: ok");
        } else {
            println!("{label}: {e} error(s), {w} warning(s)");
            print_findings(&p.report.findings);
        }
        for (code, n) in &p.report.suppressed {
            println!("  ... {n} more {code} finding(s)");
        }
        if let Some(dir) = &common.out {
            write_json(dir, &format!("{label}.integrity.json"), &p.report)?;
        }
        checks.push(RunCheck {
            input: label,
            testcase_id: p.trace.as_ref().map(|t| t.testcase_id.clone()),
            run_id: p.trace.as_ref().map(|t| t.run_id),
            errors: e,
            warnings: w,
        });
    }

    let mut sets = Vec::new();
    let traces: Vec<Trace> = parsed.iter().filter_map(|p| p.trace.clone()).collect();
    for (tc, runs) in by_testcase(traces) {
        let refs: Vec<&Trace> = runs.iter().collect();
        let findings = check_run_set(&refs, n_required);
        if !findings.is_empty() {
            println!("run set {tc}:");
            print_findings(&findings);
        }
        passed &= !findings
            .iter()
            .any(|f| f.severity == vista_core::parse::Severity::Error);
        sets.push(RunSetCheck {
            testcase_id: tc,
            runs: runs.len(),
            findings,
        });
    }
    // every input failed to parse: the run count is still unmet
    if sets.is_empty() && n_required > 0 {
        passed = false;
    }

    if let Some(dir) = &common.out {
        write_json(
            dir,
            "validation.json",
            &ValidationSummary {
                passed,
                f_min,
                n_required,
                runs: checks,
                run_sets: sets,
            },
        )?;
    }
    println!("validation {}", if passed { "passed" } else { "FAILED" });
    Ok(if unreadable(&parsed) {
        Status::Error
    } else if passed {
        Status::Ok
    } else {
        Status::Fail
    })
}

pub struct EvalOptions {
    pub rules: Option<PathBuf>,
    pub f_min: f64,
    pub n_required: usize,
    pub vut_class: VehicleClass,
    pub vut_length: Option<f64>,
    pub vut_width: Option<f64>,
}

impl EvalOptions {
    fn profile(&self) -> Result<VehicleProfile> {
        let base = VehicleProfile::for_class(self.vut_class);
        let length = self.vut_length.unwrap_or(base.length);
        let width = self.vut_width.unwrap_or(base.width);
        if !(length > 0.0 && width > 0.0 && length.is_finite() && width.is_finite()) {
            bail!("VUT dimensions must be positive");
        }
        Ok(VehicleProfile::rectangle(self.vut_class, length, width))
    }
}

#[derive(Serialize)]
struct EvaluationSummary<'a> {
    passed: bool,
    testcases: Vec<&'a TestCaseEvaluation>,
}

pub fn evaluate(common: &Common, paths: &[PathBuf], o: &EvalOptions) -> Result<Status> {
    let profile = o.profile()?;
    let config = match &o.rules {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("cannot read rule file {}", p.display()))?;
            RuleConfig::from_toml(&text)?
        }
        None => RuleConfig::default(),
    };
    let runs = inputs::expand(paths, common.layout)?;
    let mut parsed = inputs::parse_all(&runs, &parse_options(common));
    let mut invalid = false;
    for p in &mut parsed {
        if let Some(t) = &p.trace {
            p.report.extend(check_frequency(t, o.f_min));
        }
        if p.report.has_errors() {
            invalid = true;
            println!("{}: invalid", p.run.label());
            print_findings(&p.report.findings);
        }
    }
    if invalid {
        eprintln!("error: inputs failed validation; run `vista validate` for details");
        return Ok(Status::Error);
    }

    let traces = parsed.into_iter().filter_map(|p| p.trace);
    let cases = by_testcase(traces);
    let mut results = Vec::new();
    for (tc, runs) in &cases {
        let (rules, overrides) = config.rules_for(tc)?;
        let outputs = runs
            .par_iter()
            .map(|t| {
                evaluate_run(t, &profile, &rules, &ClearanceConfig::default())
                    .with_context(|| format!("evaluating {}", folder_name(tc, t.run_id)))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut evals: Vec<RunEvaluation> = Vec::with_capacity(outputs.len());
        for (t, mut out) in runs.iter().zip(outputs) {
            out.evaluation.overrides = overrides.clone();
            if let Some(dir) = &common.out {
                let stem = folder_name(tc, t.run_id);
                write_json(dir, &format!("{stem}.verdicts.json"), &out.evaluation)?;
                write_file(dir, &format!("{stem}.verdicts.txt"), &out.evaluation.render_text())?;
                write_file(dir, &format!("{stem}.clearance.csv"), &clearance_csv(&out.series)?)?;
                write_file(dir, &format!("{stem}.kinematics.csv"), &kinematics_csv(t)?)?;
            }
            log::info!("{}", out.evaluation.render_text().trim_end());
            evals.push(out.evaluation);
        }
        let summary = aggregate(tc, &evals, o.n_required);
        print!("{}", summary.render_text());
        if let Some(dir) = &common.out {
            write_json(dir, &format!("{tc}.summary.json"), &summary)?;
            write_file(dir, &format!("{tc}.summary.txt"), &summary.render_text())?;
        }
        results.push(summary);
    }

    let passed = results.iter().all(|r| r.passed);
    if let Some(dir) = &common.out {
        write_json(
            dir,
            "summary.json",
            &EvaluationSummary {
                passed,
                testcases: results.iter().collect(),
            },
        )?;
    }
    Ok(if passed { Status::Ok } else { Status::Fail })
}

fn parse_one(common: &Common, path: &Path) -> Result<Trace> {
    if !path.exists() {
        bail!("no such file or directory: {}", path.display());
    }
    let run = RunPath {
        path: path.to_path_buf(),
        kind: if path.is_dir() {
            RunKind::Distributed
        } else {
            RunKind::Flat
        },
    };
    let mut parsed = inputs::parse_all(std::slice::from_ref(&run), &parse_options(common));
    let p = parsed.pop().expect("one input");
    match p.trace {
        Some(t) => {
            for f in &p.report.findings {
                log::warn!("{}: {f}", run.label());
            }
            Ok(t)
        }
        None => {
            println!("{}: invalid", run.label());
            print_findings(&p.report.findings);
            bail!("{} failed validation", run.label())
        }
    }
}

pub fn fidelity(
    common: &Common,
    virtual_run: &Path,
    reference_run: &Path,
    tolerances: Option<&Path>,
) -> Result<Status> {
    let tol = match tolerances {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("cannot read tolerance file {}", p.display()))?;
            Tolerances::from_toml(&text).with_context(|| format!("in {}", p.display()))?
        }
        None => Tolerances::default(),
    };
    let v = parse_one(common, virtual_run)?;
    let r = parse_one(common, reference_run)?;
    let report = fidelity::compare(&v, &r, &tol)?;
    print!("{}", report.render_text());
    if let Some(dir) = &common.out {
        write_json(dir, "fidelity.json", &report)?;
        write_file(dir, "fidelity.txt", &report.render_text())?;
    }
    Ok(if report.passed { Status::Ok } else { Status::Fail })
}

fn cases(arg: &str) -> Result<Vec<Case>> {
    if arg.eq_ignore_ascii_case("all") {
        return Ok(Case::ALL.to_vec());
    }
    arg.split(',')
        .map(|s| s.trim().parse::<Case>().map_err(|e| anyhow::anyhow!(e)))
        .collect()
}

pub fn generate(
    common: &Common,
    case: &str,
    spec_path: Option<&Path>,
    runs: Option<u32>,
    seed: Option<u64>,
) -> Result<Status> {
    let Some(out) = &common.out else {
        bail!("generate needs an output directory (--out)");
    };
    let mut spec = match spec_path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("cannot read scenario file {}", p.display()))?;
            ScenarioSpec::from_toml(&text).with_context(|| format!("in {}", p.display()))?
        }
        None => ScenarioSpec::default(),
    };
    if let Some(n) = runs {
        spec.runs = n;
    }
    if let Some(s) = seed {
        spec.seed = s;
    }
    let kind = match common.layout {
        LayoutHint::Auto | LayoutHint::Flat => LayoutKind::Flat,
        LayoutHint::Distributed => LayoutKind::Distributed,
    };
    let wo = WriteOptions {
        axis_order: common.axis_order,
        emit_count: true,
    };
    let cases = cases(case)?;
    // one case per directory: every case shares the test case id
    let split = cases.len() > 1;
    for c in cases {
        spec.validate(c)?;
        let dir = if split { out.join(c.tag()) } else { out.clone() };
        std::fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let traces = (1..=spec.runs)
            .into_par_iter()
            .map(|run| synthesize_run(&spec, c, run))
            .collect::<Result<Vec<_>, _>>()?;
        for t in &traces {
            let layout = FileLayout::in_dir(kind, &dir, &t.testcase_id, t.run_id);
            write_trace(t, &layout, &wo)?;
            println!("{}", layout.root.display());
        }
    }
    Ok(Status::Ok)
}

pub fn subset(ids: &[String], fraction: f64, seed: u64) -> Result<Status> {
    for id in fidelity::select_recalibration_subset(ids, fraction, seed)? {
        println!("{id}");
    }
    Ok(Status::Ok)
}
