//! Result file and folder naming: `results_<testcase_id>_r<run_id>.csv` and
//! `<testcase_id>_r<run_id>/`.

use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

static FLAT_NAME: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^results_(.+)_r(\d{1,3})\.csv$").unwrap());
static FOLDER_NAME: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(?:results_)?(.+)_r(\d{1,3})$").unwrap());

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutKind {
    Flat,
    Distributed,
}

impl std::str::FromStr for LayoutKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "flat" => Ok(LayoutKind::Flat),
            "distributed" => Ok(LayoutKind::Distributed),
            other => Err(format!("unknown layout `{other}` (use flat or distributed)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RunName {
    pub testcase_id: String,
    pub run_id: u32,
}

pub fn parse_flat_name(name: &str) -> Option<RunName> {
    let c = FLAT_NAME.captures(name)?;
    Some(RunName {
        testcase_id: c[1].to_string(),
        run_id: c[2].parse().ok()?,
    })
}

pub fn parse_folder_name(name: &str) -> Option<RunName> {
    let c = FOLDER_NAME.captures(name)?;
    Some(RunName {
        testcase_id: c[1].to_string(),
        run_id: c[2].parse().ok()?,
    })
}

pub fn flat_file_name(testcase_id: &str, run_id: u32) -> String {
    format!("results_{testcase_id}_r{run_id:02}.csv")
}

pub fn folder_name(testcase_id: &str, run_id: u32) -> String {
    format!("{testcase_id}_r{run_id:02}")
}

/// A located result artifact: a flat file or a distributed folder.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FileLayout {
    pub kind: LayoutKind,
    pub root: std::path::PathBuf,
    pub testcase_id: String,
    pub run_id: u32,
}

impl FileLayout {
    /// Layout for writing a run under `dir`.
    pub fn in_dir(kind: LayoutKind, dir: &Path, testcase_id: &str, run_id: u32) -> Self {
        let name = match kind {
            LayoutKind::Flat => flat_file_name(testcase_id, run_id),
            LayoutKind::Distributed => folder_name(testcase_id, run_id),
        };
        FileLayout {
            kind,
            root: dir.join(name),
            testcase_id: testcase_id.to_string(),
            run_id,
        }
    }

    /// Recognizes an existing path by its name. Directories are distributed,
    /// files are flat.
    pub fn detect(path: &Path) -> Option<Self> {
        let name = path.file_name()?.to_str()?;
        let (kind, run) = if path.is_dir() {
            (LayoutKind::Distributed, parse_folder_name(name)?)
        } else {
            (LayoutKind::Flat, parse_flat_name(name)?)
        };
        Some(FileLayout {
            kind,
            root: path.to_path_buf(),
            testcase_id: run.testcase_id,
            run_id: run.run_id,
        })
    }
}
