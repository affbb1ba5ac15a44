//! Fixtures and a runner for the `vista` binary.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use vista_core::parse::naming::{flat_file_name, folder_name};
use vista_core::parse::{render_distributed, render_flat, WriteOptions};
use vista_core::synth::{synthesize_run, Case, ScenarioSpec};

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn vista(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_vista"))
        .args(args)
        .env_remove("VISTA_OUT")
        .env_remove("VISTA_LAYOUT")
        .output()
        .expect("spawn vista");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn flat_text(spec: &ScenarioSpec, case: Case, run: u32) -> (String, String) {
    let t = synthesize_run(spec, case, run).unwrap();
    (
        flat_file_name(&t.testcase_id, t.run_id),
        render_flat(&t, &WriteOptions::default()).unwrap(),
    )
}

/// A valid flat file for `case` in `dir`.
pub fn valid_flat(dir: &Path, case: Case, run: u32) -> PathBuf {
    let (name, text) = flat_text(&ScenarioSpec::default(), case, run);
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

/// Logged at 5 Hz.
pub fn slow_flat(dir: &Path) -> PathBuf {
    let spec = ScenarioSpec {
        sample_rate: 5.0,
        ..ScenarioSpec::default()
    };
    let (name, text) = flat_text(&spec, Case::Case3, 1);
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

/// Two data rows swapped, so time runs backwards once.
pub fn non_monotone_flat(dir: &Path) -> PathBuf {
    let (name, text) = flat_text(&ScenarioSpec::default(), Case::Case3, 1);
    let mut lines: Vec<&str> = text.lines().collect();
    lines.swap(10, 11);
    let p = dir.join(name);
    std::fs::write(&p, lines.join("\n") + "\n").unwrap();
    p
}

/// A distributed run whose VUT log lacks one step the actor log has.
pub fn unsynced_folder(dir: &Path) -> PathBuf {
    let t = synthesize_run(&ScenarioSpec::default(), Case::Case3, 1).unwrap();
    let root = dir.join(folder_name(&t.testcase_id, t.run_id));
    std::fs::create_dir_all(&root).unwrap();
    for (file, text) in render_distributed(&t, &WriteOptions::default()).unwrap() {
        let text = if file == vista_core::parse::distributed::VUT_FILE {
            let mut lines: Vec<&str> = text.lines().collect();
            lines.remove(20);
            lines.join("\n") + "\n"
        } else {
            text
        };
        std::fs::write(root.join(file), text).unwrap();
    }
    root
}

/// A valid trace under a name outside the convention.
pub fn misnamed_flat(dir: &Path) -> PathBuf {
    let (_, text) = flat_text(&ScenarioSpec::default(), Case::Case3, 1);
    let p = dir.join("case3_run1.csv");
    std::fs::write(&p, text).unwrap();
    p
}

/// Runs 1..=n of case 3 as flat files.
pub fn run_set(dir: &Path, n: u32) {
    for r in 1..=n {
        valid_flat(dir, Case::Case3, r);
    }
}

pub fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

/// Finding codes of every report in a validation output directory.
pub fn finding_codes(out: &Path) -> Vec<String> {
    let mut codes = Vec::new();
    let mut entries: Vec<_> = std::fs::read_dir(out).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for p in entries {
        let name = p.file_name().unwrap().to_string_lossy().into_owned();
        let v = read_json(&p);
        let list = if name == "validation.json" {
            v["run_sets"]
                .as_array()
                .unwrap()
                .iter()
                .flat_map(|s| s["findings"].as_array().unwrap().clone())
                .collect()
        } else if name.ends_with(".integrity.json") {
            v["findings"].as_array().unwrap().clone()
        } else {
            continue;
        };
        codes.extend(list.iter().map(|f| f["code"].as_str().unwrap().to_string()));
    }
    codes
}

/// Lateral clearance spread for one entity from an evaluation `summary.json`.
pub fn lateral_spread(summary: &Value, entity: &str) -> (f64, f64) {
    let tc = &summary["testcases"][0];
    let row = tc["spread"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["rule"] == "lateral_clearance" && r["entity"] == entity)
        .expect("lateral spread");
    (row["min"].as_f64().unwrap(), row["max"].as_f64().unwrap())
}

pub fn spread(summary: &Value, rule: &str) -> (f64, f64) {
    let tc = &summary["testcases"][0];
    let row = tc["spread"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["rule"] == rule)
        .expect("spread row");
    (row["min"].as_f64().unwrap(), row["max"].as_f64().unwrap())
}
