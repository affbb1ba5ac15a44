//! Finding runs on disk and parsing them.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use vista_core::parse::distributed::ROLE_FILES;
use vista_core::parse::{parse_distributed, parse_flat, IntegrityReport, ParseOptions};
use vista_core::model::Trace;

use crate::LayoutHint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RunKind {
    Flat,
    Distributed,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RunPath {
    pub path: PathBuf,
    pub kind: RunKind,
}

impl RunPath {
    /// File or folder name, used to label reports.
    pub fn label(&self) -> String {
        self.path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.path.display().to_string())
    }
}

/// A folder holding any of the distributed role files.
fn is_run_folder(dir: &Path) -> bool {
    ROLE_FILES.iter().any(|f| dir.join(f).is_file())
}

/// Expands the command-line paths into runs, sorted by path. A directory is
/// a distributed run when it holds any role file, otherwise its `.csv` files and
/// sub-directories are taken as runs.
pub fn expand(paths: &[PathBuf], hint: LayoutHint) -> Result<Vec<RunPath>> {
    let mut out = Vec::new();
    for p in paths {
        if !p.exists() {
            bail!("no such file or directory: {}", p.display());
        }
        if p.is_file() {
            out.push(RunPath {
                path: p.clone(),
                kind: RunKind::Flat,
            });
        } else if is_run_folder(p) {
            out.push(RunPath {
                path: p.clone(),
                kind: RunKind::Distributed,
            });
        } else {
            let mut entries: Vec<PathBuf> = std::fs::read_dir(p)
                .with_context(|| format!("cannot list {}", p.display()))?
                .map(|e| e.map(|e| e.path()))
                .collect::<Result<_, _>>()?;
            entries.sort();
            for e in entries {
                if e.is_dir() && is_run_folder(&e) {
                    out.push(RunPath {
                        path: e,
                        kind: RunKind::Distributed,
                    });
                } else if e.is_file() && e.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")) {
                    out.push(RunPath {
                        path: e,
                        kind: RunKind::Flat,
                    });
                }
            }
        }
    }
    out.retain(|r| match hint {
        LayoutHint::Auto => true,
        LayoutHint::Flat => r.kind == RunKind::Flat,
        LayoutHint::Distributed => r.kind == RunKind::Distributed,
    });
    out.sort();
    out.dedup();
    if out.is_empty() {
        bail!("no result files found");
    }
    Ok(out)
}

pub struct Parsed {
    pub run: RunPath,
    pub trace: Option<Trace>,
    pub report: IntegrityReport,
}

pub fn parse_all(runs: &[RunPath], opts: &ParseOptions) -> Vec<Parsed> {
    runs.par_iter()
        .map(|r| {
            let out = match r.kind {
                RunKind::Flat => parse_flat(&r.path, opts),
                RunKind::Distributed => parse_distributed(&r.path, opts),
            };
            Parsed {
                run: r.clone(),
                trace: out.trace,
                report: out.report,
            }
        })
        .collect()
}
