//! Folder layout: one file per role, joined on `Step_number`.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use super::decode::{self, ColumnMap, Collected, Decoder, Row};
use super::integrity::{FindingCode, IntegrityReport, Location};
use super::naming::parse_folder_name;
use super::schema::{self, Group, Role};
use super::{read_records, ParseOptions, ParseOutcome};
use crate::model::Frame;

pub const VUT_FILE: &str = "VUT_status.csv";
pub const ACTORS_TRUE: &str = "Environment_actors_true.csv";
pub const ACTORS_PERCEIVED: &str = "Environment_actors_perceived.csv";
pub const OBSTACLES_TRUE: &str = "Environment_obstacles_true.csv";
pub const OBSTACLES_PERCEIVED: &str = "Environment_obstacles_perceived.csv";
pub const LIGHTS_TRUE: &str = "TrafficLight_true.csv";
pub const LIGHTS_PERCEIVED: &str = "TrafficLight_perceived.csv";

pub const ROLE_FILES: [&str; 7] = [
    VUT_FILE,
    ACTORS_TRUE,
    ACTORS_PERCEIVED,
    OBSTACLES_TRUE,
    OBSTACLES_PERCEIVED,
    LIGHTS_TRUE,
    LIGHTS_PERCEIVED,
];

fn role_files(group: Group) -> (&'static str, &'static str) {
    match group {
        Group::Actor => (ACTORS_TRUE, ACTORS_PERCEIVED),
        Group::Obstacle => (OBSTACLES_TRUE, OBSTACLES_PERCEIVED),
        Group::TrafficLight => (LIGHTS_TRUE, LIGHTS_PERCEIVED),
    }
}

pub fn parse_distributed(folder: &Path, opts: &ParseOptions) -> ParseOutcome {
    let name = folder
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or_default()
        .to_string();
    let mut report = IntegrityReport::new();
    let mut files = BTreeMap::new();
    match std::fs::read_dir(folder) {
        Ok(entries) => {
            for entry in entries.flatten() {
                let path = entry.path();
                if !path.is_file() {
                    continue;
                }
                let Some(fname) = path.file_name().and_then(|n| n.to_str()) else {
                    continue;
                };
                match std::fs::read(&path) {
                    Ok(bytes) => {
                        files.insert(fname.to_string(), bytes);
                    }
                    Err(e) => report.error(
                        FindingCode::UnreadableFile,
                        format!("cannot read: {e}"),
                        Location::file(path.display().to_string()),
                    ),
                }
            }
        }
        Err(e) => {
            report.error(
                FindingCode::UnreadableFile,
                format!("cannot list folder: {e}"),
                Location::file(folder.display().to_string()),
            );
            return ParseOutcome {
                trace: None,
                report,
            };
        }
    }
    let mut out = parse_distributed_files(&name, &files, opts);
    report.merge(out.report);
    if report.has_errors() {
        out.trace = None;
    }
    out.report = report;
    out
}

/// Parses a distributed run from in-memory files keyed by file name.
pub fn parse_distributed_files(
    folder_name: &str,
    files: &BTreeMap<String, Vec<u8>>,
    opts: &ParseOptions,
) -> ParseOutcome {
    let mut report = IntegrityReport::new();
    let ids = parse_folder_name(folder_name);
    if ids.is_none() {
        report.error(
            FindingCode::BadFileName,
            format!("folder `{folder_name}` does not match <testcase_id>_r<run_id>"),
            Location::file(folder_name),
        );
    }
    for fname in files.keys() {
        if ROLE_FILES.contains(&fname.as_str()) {
            continue;
        }
        let near = ROLE_FILES
            .iter()
            .find(|r| r.eq_ignore_ascii_case(fname) || r.trim_end_matches(".csv").eq_ignore_ascii_case(fname));
        let msg = match near {
            Some(r) => format!("`{fname}` looks like role file `{r}` but is misnamed; ignored"),
            None => format!("`{fname}` is not a role file; ignored"),
        };
        report.warning(FindingCode::RoleFileMisnamed, msg, Location::file(fname.clone()));
    }

    let Some(vut_bytes) = files.get(VUT_FILE) else {
        report.error(
            FindingCode::MissingVutFile,
            format!("{VUT_FILE} not found"),
            Location::file(folder_name),
        );
        return ParseOutcome {
            trace: None,
            report,
        };
    };

    let mut collected = Collected {
        vut_file: VUT_FILE.to_string(),
        ..Default::default()
    };
    read_vut(vut_bytes, opts, &mut report, &mut collected);
    for group in Group::ALL {
        let (true_file, perceived_file) = role_files(group);
        if let Some(bytes) = files.get(true_file) {
            read_entities(group, true_file, bytes, opts, &mut report, &mut collected);
        }
        if let Some(bytes) = files.get(perceived_file) {
            if !files.contains_key(true_file) {
                report.warning(
                    FindingCode::UnmatchedPerceived,
                    format!("{perceived_file} present without {true_file}; ignored"),
                    Location::file(perceived_file),
                );
                continue;
            }
            read_perceived(group, perceived_file, bytes, opts, &mut report, &mut collected);
        }
    }

    let trace = ids.and_then(|ids| decode::assemble(&ids.testcase_id, ids.run_id, collected, &mut report));
    ParseOutcome { trace, report }
}

/// Header map for a role file; unknown and out-of-role columns are warned.
fn header_map(
    file: &str,
    header: &csv::StringRecord,
    allowed: &[Role],
    extra: Option<&str>,
    report: &mut IntegrityReport,
) -> Option<ColumnMap> {
    if !header.iter().any(|c| decode::is_known(c.trim())) {
        report.error(
            FindingCode::MissingHeader,
            "first row holds no known column names",
            Location::file(file).row(1),
        );
        return None;
    }
    let mut cols = ColumnMap::new();
    for (i, cell) in header.iter().enumerate() {
        let col = cell.trim();
        let loc = Location::file(file).row(1).column(col);
        match schema::column(col) {
            Some(c) if c.role == Role::Common || allowed.contains(&c.role) || extra == Some(col) => {
                if cols.insert(col.to_string(), i).is_some() {
                    report.error(FindingCode::DuplicateColumn, format!("{col} repeated"), loc);
                }
            }
            _ => report.warning(
                FindingCode::UnknownColumn,
                format!("column {col} does not belong in {file}"),
                loc,
            ),
        }
    }
    Some(cols)
}

fn rows<'a>(
    file: &str,
    bytes: &[u8],
    report: &mut IntegrityReport,
) -> Option<(csv::StringRecord, Vec<(u64, csv::StringRecord)>)> {
    let mut records = read_records(file, bytes, report)?.into_iter();
    let Some((_, header)) = records.next() else {
        report.error(FindingCode::MissingHeader, "file is empty", Location::file(file));
        return None;
    };
    let width = header.len();
    let body = records
        .filter(|(line, r)| {
            if r.len() == width {
                return true;
            }
            report.error(
                FindingCode::RaggedRow,
                format!("row has {} cells, header has {width}", r.len()),
                Location::file(file).row(*line),
            );
            false
        })
        .collect();
    Some((header, body))
}

fn read_vut(bytes: &[u8], opts: &ParseOptions, report: &mut IntegrityReport, c: &mut Collected) {
    let Some((header, body)) = rows(VUT_FILE, bytes, report) else {
        return;
    };
    let Some(cols) = header_map(VUT_FILE, &header, &[Role::Vut], None, report) else {
        return;
    };
    decode::check_mandatory(
        report,
        VUT_FILE,
        schema::role_columns(Role::Common).chain(schema::role_columns(Role::Vut)),
        &cols,
        "",
    );
    for (line, record) in &body {
        let row = Row {
            file: VUT_FILE,
            line: *line,
            record,
            cols: &cols,
        };
        let mut d = Decoder::new(report, opts);
        let time = d.float(&row, schema::TIME);
        let step = d.unsigned(&row, schema::STEP);
        if d.take_failed() {
            continue;
        }
        if let Some(v) = decode::decode_vut(&mut d, &row, time, step) {
            c.vut.push((*line, v));
        }
    }
}

fn read_entities(
    group: Group,
    file: &str,
    bytes: &[u8],
    opts: &ParseOptions,
    report: &mut IntegrityReport,
    c: &mut Collected,
) {
    let Some((header, body)) = rows(file, bytes, report) else {
        return;
    };
    // perceived columns inside the true file are tolerated
    let allowed = [group.true_role(), group.perceived_role()];
    let Some(cols) = header_map(file, &header, &allowed, None, report) else {
        return;
    };
    decode::check_mandatory(
        report,
        file,
        schema::role_columns(Role::Common).chain(schema::role_columns(group.true_role())),
        &cols,
        "",
    );
    for (line, record) in &body {
        let row = Row {
            file,
            line: *line,
            record,
            cols: &cols,
        };
        let mut d = Decoder::new(report, opts);
        let time = d.float(&row, schema::TIME);
        let step = d.unsigned(&row, schema::STEP);
        if d.take_failed() {
            continue;
        }
        let loc = Location::file(file).row(*line).column(group.id_column());
        match group {
            Group::Actor => {
                if let Some(a) = decode::decode_actor(&mut d, &row, time, step) {
                    c.actors.push((loc, a));
                }
            }
            Group::Obstacle => {
                if let Some(o) = decode::decode_obstacle(&mut d, &row, time, step) {
                    c.obstacles.push((loc, o));
                }
            }
            Group::TrafficLight => {
                if let Some(t) = decode::decode_controller(&mut d, &row, time, step) {
                    c.controllers.push((loc, t));
                }
            }
        }
    }
}

fn read_perceived(
    group: Group,
    file: &str,
    bytes: &[u8],
    opts: &ParseOptions,
    report: &mut IntegrityReport,
    c: &mut Collected,
) {
    let Some((header, body)) = rows(file, bytes, report) else {
        return;
    };
    let allowed = [group.perceived_role()];
    // the id column belongs to the true role but keys the perceived rows
    let Some(cols) = header_map(file, &header, &allowed, Some(group.id_column()), report) else {
        return;
    };
    let required: Vec<_> = [schema::TIME, schema::STEP, group.id_column()]
        .into_iter()
        .filter_map(schema::column)
        .collect();
    decode::check_mandatory(report, file, required.into_iter(), &cols, "");

    // index true records by (id, step)
    let index: HashMap<(String, u64), usize> = match group {
        Group::Actor => key_index(c.actors.iter().map(|(_, a)| (&a.id, a.step))),
        Group::Obstacle => key_index(c.obstacles.iter().map(|(_, o)| (&o.id, o.step))),
        Group::TrafficLight => key_index(c.controllers.iter().map(|(_, t)| (&t.id, t.step))),
    };

    for (line, record) in &body {
        let row = Row {
            file,
            line: *line,
            record,
            cols: &cols,
        };
        let mut d = Decoder::new(report, opts);
        let step = d.unsigned(&row, schema::STEP);
        let id = d.string(&row, group.id_column());
        if d.take_failed() {
            continue;
        }
        let loc = Location::file(file).row(*line).column(group.id_column());
        let Some(&k) = index.get(&(id.clone(), step)) else {
            d.report.warning(
                FindingCode::UnmatchedPerceived,
                format!("no true record for {id} at step {step}; perceived row ignored"),
                loc,
            );
            continue;
        };
        match group {
            Group::Actor => {
                let frame = c.actors[k].1.pos.frame();
                let shape = d.shape(&row, "Actor_bbox_perceived", frame, false, false);
                if !d.take_failed() && shape.is_some() {
                    c.actors[k].1.bbox_perceived = shape;
                }
            }
            Group::Obstacle => {
                let frame: Frame = c.obstacles[k].1.pos.frame();
                let shape = d.shape(&row, "Obst_poly_perceived", frame, false, false);
                if !d.take_failed() && shape.is_some() {
                    c.obstacles[k].1.poly_perceived = shape;
                }
            }
            Group::TrafficLight => {
                if let Some(s) = row.cell("Traffic_Ctrl_phase_perceived").filter(|s| !s.is_empty()) {
                    c.controllers[k].1.phase_perceived = Some(crate::model::Phase::from_tag(s));
                }
            }
        }
    }
}

fn key_index<'a>(keys: impl Iterator<Item = (&'a String, u64)>) -> HashMap<(String, u64), usize> {
    let mut m = HashMap::new();
    for (i, (id, step)) in keys.enumerate() {
        m.entry((id.clone(), step)).or_insert(i);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::write::render_distributed;
    use crate::parse::WriteOptions;

    fn as_bytes(files: BTreeMap<String, String>) -> BTreeMap<String, Vec<u8>> {
        files.into_iter().map(|(k, v)| (k, v.into_bytes())).collect()
    }

    #[test]
    fn vut_only_folder() {
        let t = crate::parse::tests::small_trace();
        let files = render_distributed(&t, &WriteOptions::default()).unwrap();
        let names: Vec<_> = files.keys().cloned().collect();
        assert_eq!(
            names,
            vec![ACTORS_TRUE, OBSTACLES_TRUE, LIGHTS_TRUE, VUT_FILE]
        );
        let only_vut: BTreeMap<_, _> = files
            .into_iter()
            .filter(|(k, _)| k == VUT_FILE)
            .collect();
        let out = parse_distributed_files("T_r01", &as_bytes(only_vut), &ParseOptions::default());
        assert!(!out.report.has_errors(), "{:?}", out.report);
        assert_eq!(out.trace.unwrap(), t);
    }

    #[test]
    fn missing_vut_and_misnamed_role() {
        let t = crate::parse::tests::small_trace();
        let mut files = render_distributed(&t, &WriteOptions::default()).unwrap();
        let vut = files.remove(VUT_FILE).unwrap();
        files.insert("vut_status.csv".into(), vut);
        let out = parse_distributed_files("T_r01", &as_bytes(files), &ParseOptions::default());
        assert!(out.report.contains(FindingCode::MissingVutFile));
        assert!(out.report.contains(FindingCode::RoleFileMisnamed));
        assert!(out.trace.is_none());
    }

    #[test]
    fn orphan_step_is_an_error() {
        let t = crate::parse::tests::small_trace();
        let mut files = render_distributed(&t, &WriteOptions::default()).unwrap();
        files.insert(
            LIGHTS_TRUE.into(),
            "Time,Step_number,Traffic_Ctrl_Id,Traffic_Ctrl_phase\n0,0,TL,go\n9.9,99,TL,stop\n".into(),
        );
        let out = parse_distributed_files("T_r01", &as_bytes(files), &ParseOptions::default());
        let f = out
            .report
            .findings
            .iter()
            .find(|f| f.code == FindingCode::OrphanStep)
            .unwrap();
        assert_eq!(f.location.file.as_deref(), Some(LIGHTS_TRUE));
        assert_eq!(f.location.row, Some(3));
        assert!(out.trace.is_none());
    }

    #[test]
    fn time_mismatch_warns() {
        let t = crate::parse::tests::small_trace();
        let mut files = render_distributed(&t, &WriteOptions::default()).unwrap();
        files.insert(
            LIGHTS_TRUE.into(),
            "Time,Step_number,Traffic_Ctrl_Id,Traffic_Ctrl_phase\n0.3,0,TL,go\n".into(),
        );
        let out = parse_distributed_files("T_r01", &as_bytes(files), &ParseOptions::default());
        assert!(out.report.contains(FindingCode::TimeMismatch));
        assert!(!out.report.has_errors());
        let trace = out.trace.unwrap();
        assert_eq!(trace.controllers["TL"][0].time, 0.3);
    }
}
