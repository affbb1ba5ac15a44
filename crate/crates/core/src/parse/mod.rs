//! Reading and writing result files, and integrity validation.

pub mod array;
mod decode;
pub mod distributed;
pub mod flat;
pub mod integrity;
pub mod naming;
pub mod schema;
pub mod write;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use array::{parse_position_array, serialize_position_array, ArrayError, AxisOrder};
pub use distributed::{parse_distributed, parse_distributed_files};
pub use flat::{parse_flat, parse_flat_bytes};
pub use integrity::{
    check_frequency, check_run_set, Finding, FindingCode, IntegrityReport, Location, Severity,
};
pub use naming::{FileLayout, LayoutKind};
pub use write::{render_distributed, render_flat, write_trace, WriteError};

use crate::model::Trace;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseOptions {
    pub axis_order: AxisOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WriteOptions {
    pub axis_order: AxisOrder,
    /// Prefix position arrays with `< n`.
    pub emit_count: bool,
}

impl Default for WriteOptions {
    fn default() -> Self {
        WriteOptions {
            axis_order: AxisOrder::default(),
            emit_count: true,
        }
    }
}

/// A parsed run. `trace` is present only when `report` holds no errors.
#[derive(Debug, Clone)]
pub struct ParseOutcome {
    pub trace: Option<Trace>,
    pub report: IntegrityReport,
}

/// Parses whichever layout `path` holds: a directory is read as a
/// distributed run, anything else as a flat file.
pub fn parse_path(path: &Path, opts: &ParseOptions) -> ParseOutcome {
    if path.is_dir() {
        parse_distributed(path, opts)
    } else {
        parse_flat(path, opts)
    }
}

/// Decodes CSV records with their 1-based line numbers. Fails only on
/// encoding problems, which are reported.
fn read_records(
    file: &str,
    bytes: &[u8],
    report: &mut IntegrityReport,
) -> Option<Vec<(u64, csv::StringRecord)>> {
    let text = match std::str::from_utf8(bytes) {
        Ok(s) => s,
        Err(e) => {
            report.error(
                FindingCode::InvalidEncoding,
                format!("not valid UTF-8 ({e})"),
                Location::file(file),
            );
            return None;
        }
    };
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in reader.records() {
        match rec {
            Ok(r) => {
                let line = r.position().map(|p| p.line()).unwrap_or(0);
                // a line holding only whitespace is not a record
                if r.len() == 1 && r[0].trim().is_empty() {
                    continue;
                }
                out.push((line, r));
            }
            Err(e) => {
                let line = e.position().map(|p| p.line());
                let mut loc = Location::file(file);
                loc.row = line;
                report.error(FindingCode::UnreadableFile, format!("CSV error: {e}"), loc);
                return None;
            }
        }
    }
    Some(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::model::*;

    /// Three VUT steps at 10 Hz, no environment.
    pub(crate) fn small_trace() -> Trace {
        let mut t = Trace::new("T", 1);
        for i in 0..3u64 {
            t.vut.push(VutState {
                time: i as f64 * 0.1,
                step: i,
                pos: GeoPosition::new(1.354 + i as f64 * 1e-5, 103.69),
                travelled: i as f64 * 1.1,
                speed: 11.0,
                acc_lat: 0.0,
                acc_long: -0.25,
                yaw_rate: 0.5,
                pitch_rate: None,
                roll_rate: Some(0.01),
                heading: HeadingDeg::new(359.5),
                indicators: Indicators {
                    left_front: i == 1,
                    ..Default::default()
                },
                throttle: 0.3,
                brake: 0.0,
                steering_angle: -1.5,
                drive_status: DriveStatus::Autonomous,
                special_op: SpecialOp::Extension("custom_op".into()),
            });
        }
        t
    }

    #[test]
    fn flat_and_distributed_agree() {
        let t = small_trace();
        let flat = render_flat(&t, &WriteOptions::default()).unwrap();
        let a = parse_flat_bytes("results_T_r01.csv", flat.as_bytes(), &ParseOptions::default());
        let files = render_distributed(&t, &WriteOptions::default())
            .unwrap()
            .into_iter()
            .map(|(k, v)| (k, v.into_bytes()))
            .collect();
        let b = parse_distributed_files("T_r01", &files, &ParseOptions::default());
        assert_eq!(a.trace.as_ref(), Some(&t));
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn frequency_checks() {
        let mut t = small_trace();
        assert!(check_frequency(&t, 10.0).is_empty());
        assert_eq!(check_frequency(&t, 20.0)[0].code, FindingCode::FrequencyTooLow);
        for (i, s) in t.vut.iter_mut().enumerate() {
            s.time = i as f64 * 0.2;
        }
        assert_eq!(check_frequency(&t, 10.0)[0].code, FindingCode::FrequencyTooLow);
    }

    #[test]
    fn run_set_checks() {
        let mk = |r: u32| {
            let mut t = small_trace();
            t.run_id = r;
            t
        };
        let runs: Vec<Trace> = (1..=10).map(mk).collect();
        let refs: Vec<&Trace> = runs.iter().collect();
        assert!(check_run_set(&refs, 10).is_empty());
        assert!(check_run_set(&refs[..1], 1).is_empty());
        let runs = [mk(1), mk(1), mk(2)];
        let refs: Vec<&Trace> = runs.iter().collect();
        let f = check_run_set(&refs, 3);
        assert!(f.iter().any(|f| f.code == FindingCode::DuplicateRun && f.severity == Severity::Warning));
        assert!(f.iter().any(|f| f.code == FindingCode::InsufficientRuns && f.severity == Severity::Error));
    }
}
