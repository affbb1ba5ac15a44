//! Integrity findings and the run-level checks (logging frequency, run count).

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FindingCode {
    UnreadableFile,
    InvalidEncoding,
    MissingHeader,
    UnknownColumn,
    DuplicateColumn,
    UngroupedColumn,
    GroupOrder,
    MissingMandatoryColumn,
    RaggedRow,
    MalformedValue,
    InvalidValue,
    MalformedArray,
    CountMismatch,
    EmptyArray,
    InvalidPolygon,
    NonMonotoneTime,
    NonMonotoneStep,
    DuplicateStep,
    StartTimeNotZero,
    EmptyTrace,
    DuplicateEntityRecord,
    BadFileName,
    MissingVutFile,
    OrphanStep,
    RoleFileMisnamed,
    UnmatchedPerceived,
    TimeMismatch,
    FrequencyTooLow,
    JitterExceeded,
    InsufficientRuns,
    DuplicateRun,
    MixedTestCase,
}

impl fmt::Display for FindingCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Location {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    /// 1-based line number in the file; the header is line 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
}

impl Location {
    pub fn file(file: impl Into<String>) -> Self {
        Location {
            file: Some(file.into()),
            ..Default::default()
        }
    }

    pub fn row(mut self, row: u64) -> Self {
        self.row = Some(row);
        self
    }

    pub fn column(mut self, column: impl Into<String>) -> Self {
        self.column = Some(column.into());
        self
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(file) = &self.file {
            parts.push(file.clone());
        }
        if let Some(row) = self.row {
            parts.push(format!("line {row}"));
        }
        if let Some(col) = &self.column {
            parts.push(format!("column {col}"));
        }
        if parts.is_empty() {
            f.write_str("-")
        } else {
            f.write_str(&parts.join(", "))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub code: FindingCode,
    pub message: String,
    pub location: Location,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev} [{}] {} ({})", self.code, self.message, self.location)
    }
}

/// Cap on stored findings per code, so a systematically broken file does not
/// produce one finding per cell.
const MAX_PER_CODE: usize = 50;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegrityReport {
    pub findings: Vec<Finding>,
    /// Findings dropped because their code hit the per-code cap.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub suppressed: BTreeMap<FindingCode, usize>,
}

impl IntegrityReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, finding: Finding) {
        let seen = self.findings.iter().filter(|f| f.code == finding.code).count();
        if seen >= MAX_PER_CODE {
            *self.suppressed.entry(finding.code).or_default() += 1;
        } else {
            self.findings.push(finding);
        }
    }

    pub fn error(&mut self, code: FindingCode, message: impl Into<String>, location: Location) {
        self.push(Finding {
            severity: Severity::Error,
            code,
            message: message.into(),
            location,
        });
    }

    pub fn warning(&mut self, code: FindingCode, message: impl Into<String>, location: Location) {
        self.push(Finding {
            severity: Severity::Warning,
            code,
            message: message.into(),
            location,
        });
    }

    pub fn extend(&mut self, findings: impl IntoIterator<Item = Finding>) {
        for f in findings {
            self.push(f);
        }
    }

    pub fn merge(&mut self, other: IntegrityReport) {
        self.extend(other.findings);
        for (code, n) in other.suppressed {
            *self.suppressed.entry(code).or_default() += n;
        }
    }

    pub fn has_errors(&self) -> bool {
        self.findings.iter().any(|f| f.severity == Severity::Error)
    }

    pub fn error_count(&self) -> usize {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Error)
            .count()
    }

    pub fn warning_count(&self) -> usize {
        self.findings.len() - self.error_count()
    }

    pub fn contains(&self, code: FindingCode) -> bool {
        self.findings.iter().any(|f| f.code == code)
    }
}

/// Relative tolerance on sample spacing before a jitter warning.
pub const JITTER_TOLERANCE: f64 = 0.10;

/// Checks that VUT records arrive at `f_min` Hz or faster, at equal spacing.
pub fn check_frequency(trace: &Trace, f_min: f64) -> Vec<Finding> {
    let mut out = Vec::new();
    let loc = Location::file(crate::parse::naming::flat_file_name(
        &trace.testcase_id,
        trace.run_id,
    ));
    let Some(period) = trace.median_period() else {
        return out;
    };
    if !(period > 0.0) {
        return out;
    }
    let rate = 1.0 / period;
    // allow for the rounding of logged timestamps
    if rate < f_min * (1.0 - 1e-6) {
        out.push(Finding {
            severity: Severity::Error,
            code: FindingCode::FrequencyTooLow,
            message: format!("median logging rate {rate:.3} Hz is below the required {f_min} Hz"),
            location: loc.clone().column("Time"),
        });
    }
    let mut jitter = trace
        .vut
        .windows(2)
        .filter(|w| ((w[1].time - w[0].time) - period).abs() > JITTER_TOLERANCE * period);
    if let Some(w) = jitter.next() {
        let n = 1 + jitter.count();
        out.push(Finding {
            severity: Severity::Warning,
            code: FindingCode::JitterExceeded,
            message: format!(
                "{n} sample interval(s) deviate from the median period {period:.4} s by more than {:.0}%; first at step {} ({:.4} s)",
                JITTER_TOLERANCE * 100.0,
                w[1].step,
                w[1].time - w[0].time
            ),
            location: loc.column("Time"),
        });
    }
    out
}

/// Checks that a test case was run at least `n_required` distinct times.
pub fn check_run_set(runs: &[&Trace], n_required: usize) -> Vec<Finding> {
    let mut out = Vec::new();
    let Some(first) = runs.first() else {
        if n_required > 0 {
            out.push(Finding {
                severity: Severity::Error,
                code: FindingCode::InsufficientRuns,
                message: format!("no runs supplied, {n_required} required"),
                location: Location::default(),
            });
        }
        return out;
    };
    let tc = &first.testcase_id;
    let loc = Location::file(tc.clone());
    if let Some(other) = runs.iter().find(|r| &r.testcase_id != tc) {
        out.push(Finding {
            severity: Severity::Error,
            code: FindingCode::MixedTestCase,
            message: format!("run set mixes test cases `{tc}` and `{}`", other.testcase_id),
            location: loc.clone(),
        });
    }
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for r in runs {
        *counts.entry(r.run_id).or_default() += 1;
    }
    for (run, n) in counts.iter().filter(|(_, n)| **n > 1) {
        out.push(Finding {
            severity: Severity::Warning,
            code: FindingCode::DuplicateRun,
            message: format!("run r{run:02} of `{tc}` supplied {n} times"),
            location: loc.clone(),
        });
    }
    if counts.len() < n_required {
        out.push(Finding {
            severity: Severity::Error,
            code: FindingCode::InsufficientRuns,
            message: format!(
                "`{tc}` has {} distinct run(s), {n_required} required",
                counts.len()
            ),
            location: loc,
        });
    }
    out
}
