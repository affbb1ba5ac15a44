//! Report files and plot-ready series.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use vista_core::clearance::ClearanceSeries;
use vista_core::geo::LocalFrame;
use vista_core::model::Trace;
use vista_core::parse::write::fmt_f64;

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(path)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_file(dir, name, &s)
}

fn to_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// One row per entity and step: the clearance plots.
pub fn clearance_csv(series: &[ClearanceSeries]) -> Result<String> {
    let header = [
        "entity",
        "step",
        "time",
        "lateral",
        "longitudinal",
        "euclidean_min",
        "ntd",
        "zone_incursion",
        "zone_depth",
    ];
    let rows = series.iter().flat_map(|s| {
        s.samples.iter().map(|x| {
            vec![
                x.entity_id.clone(),
                x.step.to_string(),
                fmt_f64(x.time),
                fmt_f64(x.lateral),
                fmt_f64(x.longitudinal),
                fmt_f64(x.euclidean_min),
                fmt_f64(x.ntd),
                x.zone_incursion.to_string(),
                fmt_f64(x.zone_depth),
            ]
        })
    });
    to_csv(&header, rows)
}

/// Speed, acceleration and the trajectory in meters east/north of the first
/// VUT position.
pub fn kinematics_csv(t: &Trace) -> Result<String> {
    let header = [
        "step", "time", "speed", "acc_long", "acc_lat", "heading", "east", "north", "lat", "lon",
    ];
    let Some(first) = t.vut.first() else {
        return to_csv(&header, Vec::new());
    };
    let frame = LocalFrame::new(first.pos);
    let mut rows = Vec::with_capacity(t.vut.len());
    for s in &t.vut {
        let [e, n] = frame.to_local(s.pos)?;
        rows.push(vec![
            s.step.to_string(),
            fmt_f64(s.time),
            fmt_f64(s.speed),
            fmt_f64(s.acc_long),
            fmt_f64(s.acc_lat),
            fmt_f64(s.heading.degrees()),
            fmt_f64(e),
            fmt_f64(n),
            fmt_f64(s.pos.lat),
            fmt_f64(s.pos.lon),
        ]);
    }
    to_csv(&header, rows)
}
