//! Single-file layout: one row per step, VUT columns once, then repeated
//! entity groups each introduced by its id column.

use std::path::Path;

use super::decode::{self, ColumnMap, Collected, Decoder, Row};
use super::integrity::{FindingCode, IntegrityReport, Location};
use super::naming::parse_flat_name;
use super::schema::{self, Group, Role};
use super::{read_records, ParseOptions, ParseOutcome};

struct GroupSlot {
    group: Group,
    cols: ColumnMap,
    /// Record indices of this slot, to spot stray values in unused slots.
    indices: Vec<usize>,
}

struct Header {
    top: ColumnMap,
    groups: Vec<GroupSlot>,
    width: usize,
}

pub fn parse_flat(path: &Path, opts: &ParseOptions) -> ParseOutcome {
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or_default()
        .to_string();
    match std::fs::read(path) {
        Ok(bytes) => parse_flat_bytes(&name, &bytes, opts),
        Err(e) => {
            let mut report = IntegrityReport::new();
            report.error(
                FindingCode::UnreadableFile,
                format!("cannot read: {e}"),
                Location::file(path.display().to_string()),
            );
            ParseOutcome {
                trace: None,
                report,
            }
        }
    }
}

/// Parses flat-layout content; `name` is the file name carrying the ids.
pub fn parse_flat_bytes(name: &str, bytes: &[u8], opts: &ParseOptions) -> ParseOutcome {
    let mut report = IntegrityReport::new();
    let ids = parse_flat_name(name);
    if ids.is_none() {
        report.error(
            FindingCode::BadFileName,
            format!("`{name}` does not match results_<testcase_id>_r<run_id>.csv"),
            Location::file(name),
        );
    }
    let trace = read(name, bytes, opts, &mut report).and_then(|c| {
        let ids = ids?;
        decode::assemble(&ids.testcase_id, ids.run_id, c, &mut report)
    });
    ParseOutcome { trace, report }
}

fn read(
    name: &str,
    bytes: &[u8],
    opts: &ParseOptions,
    report: &mut IntegrityReport,
) -> Option<Collected> {
    let records = read_records(name, bytes, report)?;
    let mut it = records.into_iter();
    let Some((_, header)) = it.next() else {
        report.error(FindingCode::MissingHeader, "file is empty", Location::file(name));
        return None;
    };
    let header = classify_header(name, &header, report)?;

    let mut collected = Collected {
        vut_file: name.to_string(),
        ..Default::default()
    };
    for (line, record) in it {
        if record.len() != header.width {
            report.error(
                FindingCode::RaggedRow,
                format!("row has {} cells, header has {}", record.len(), header.width),
                Location::file(name).row(line),
            );
            continue;
        }
        let row = Row {
            file: name,
            line,
            record: &record,
            cols: &header.top,
        };
        let mut d = Decoder::new(report, opts);
        let time = d.float(&row, schema::TIME);
        let step = d.unsigned(&row, schema::STEP);
        if d.take_failed() {
            continue;
        }
        if let Some(v) = decode::decode_vut(&mut d, &row, time, step) {
            collected.vut.push((line, v));
        }
        for slot in &header.groups {
            let row = Row {
                file: name,
                line,
                record: &record,
                cols: &slot.cols,
            };
            let id_col = slot.group.id_column();
            if !row.has_value(id_col) {
                let stray = slot
                    .indices
                    .iter()
                    .any(|&i| record.get(i).is_some_and(|c| !c.trim().is_empty()));
                if stray {
                    report.error(
                        FindingCode::MalformedValue,
                        format!("values present in a group without {id_col}"),
                        Location::file(name).row(line).column(id_col),
                    );
                }
                continue;
            }
            let loc = Location::file(name).row(line).column(id_col);
            let mut d = Decoder::new(report, opts);
            match slot.group {
                Group::Actor => {
                    if let Some(a) = decode::decode_actor(&mut d, &row, time, step) {
                        collected.actors.push((loc, a));
                    }
                }
                Group::Obstacle => {
                    if let Some(o) = decode::decode_obstacle(&mut d, &row, time, step) {
                        collected.obstacles.push((loc, o));
                    }
                }
                Group::TrafficLight => {
                    if let Some(t) = decode::decode_controller(&mut d, &row, time, step) {
                        collected.controllers.push((loc, t));
                    }
                }
            }
        }
    }
    Some(collected)
}

fn classify_header(
    name: &str,
    header: &csv::StringRecord,
    report: &mut IntegrityReport,
) -> Option<Header> {
    if !header.iter().any(|c| decode::is_known(c.trim())) {
        report.error(
            FindingCode::MissingHeader,
            "first row holds no known column names",
            Location::file(name).row(1),
        );
        return None;
    }
    let mut top = ColumnMap::new();
    let mut groups: Vec<GroupSlot> = Vec::new();
    let mut open: Option<usize> = None;

    for (i, cell) in header.iter().enumerate() {
        let col = cell.trim();
        let loc = Location::file(name).row(1).column(col);
        let spec = schema::column(col);
        match spec.map(|c| c.role) {
            Some(Role::Common) | Some(Role::Vut) => {
                open = None;
                if top.insert(col.to_string(), i).is_some() {
                    report.error(FindingCode::DuplicateColumn, format!("{col} repeated"), loc);
                }
                continue;
            }
            _ => {}
        }
        let Some(group) = Group::of_column(col) else {
            open = None;
            report.warning(FindingCode::UnknownColumn, format!("unknown column {col}"), loc);
            continue;
        };
        if col == group.id_column() {
            groups.push(GroupSlot {
                group,
                cols: ColumnMap::new(),
                indices: Vec::new(),
            });
            open = Some(groups.len() - 1);
        }
        let Some(g) = open.filter(|&g| groups[g].group == group) else {
            report.error(
                FindingCode::UngroupedColumn,
                format!("{col} is not preceded by {}", group.id_column()),
                loc,
            );
            continue;
        };
        let slot = &mut groups[g];
        slot.indices.push(i);
        if spec.is_none() {
            report.warning(FindingCode::UnknownColumn, format!("unknown column {col}"), loc);
            continue;
        }
        if slot.cols.insert(col.to_string(), i).is_some() {
            report.error(
                FindingCode::DuplicateColumn,
                format!("{col} repeated within one group"),
                loc,
            );
        }
    }

    decode::check_mandatory(
        report,
        name,
        schema::role_columns(Role::Common).chain(schema::role_columns(Role::Vut)),
        &top,
        "",
    );
    for (k, slot) in groups.iter().enumerate() {
        let ctx = format!(" in group {} ({})", k + 1, slot.group.id_column());
        decode::check_mandatory(report, name, slot.group.flat_columns(), &slot.cols, &ctx);
        if slot.group == Group::Actor {
            let last = slot.indices.iter().max().and_then(|&i| header.get(i));
            if last.map(str::trim) != Some("Actor_TTC") {
                report.warning(
                    FindingCode::GroupOrder,
                    format!("actor group {} does not end with Actor_TTC", k + 1),
                    Location::file(name).row(1),
                );
            }
        }
    }
    Some(Header {
        top,
        groups,
        width: header.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::write::render_flat;
    use crate::parse::WriteOptions;

    const VUT_HEADER: &str = "Time,Step_number,VUT_pos_lat,VUT_pos_lon,VUT_travelled_dist,VUT_speed,VUT_acc_lat,VUT_acc_long,VUT_yaw_rate,VUT_heading,VUT_ind_left_front,VUT_ind_left_rear,VUT_ind_right_front,VUT_ind_right_rear,VUT_ind_brake,VUT_ind_reverse,VUT_ind_hazard,VUT_throttle,VUT_brake,VUT_steering_angle,VUT_drive_status,VUT_special_op";

    fn vut_row(t: f64, step: u64) -> String {
        format!("{t},{step},1.354,103.69,0,5,0,0,0,90,0,0,0,0,0,0,0,0.2,0,0,autonomous,normal")
    }

    fn file(rows: &[String]) -> String {
        let mut s = VUT_HEADER.to_string();
        for r in rows {
            s.push('\n');
            s.push_str(r);
        }
        s.push('\n');
        s
    }

    #[test]
    fn two_rows_vut_only() {
        let content = file(&[vut_row(0.0, 0), vut_row(0.1, 1)]);
        let out = parse_flat_bytes("results_T1_r01.csv", content.as_bytes(), &ParseOptions::default());
        assert!(!out.report.has_errors(), "{:?}", out.report);
        let t = out.trace.unwrap();
        assert_eq!(t.vut.len(), 2);
        assert!(!t.has_environment());
        assert_eq!(t.testcase_id, "T1");
        assert_eq!(t.run_id, 1);
        assert_eq!(t.vut[1].heading.degrees(), 90.0);
    }

    #[test]
    fn crlf_is_accepted() {
        let content = file(&[vut_row(0.0, 0), vut_row(0.1, 1)]).replace('\n', "\r\n");
        let out = parse_flat_bytes("results_T1_r01.csv", content.as_bytes(), &ParseOptions::default());
        assert!(out.trace.is_some(), "{:?}", out.report);
    }

    #[test]
    fn structural_errors_are_located() {
        let opts = ParseOptions::default();
        let out = parse_flat_bytes("results_T_r01.csv", b"", &opts);
        assert!(out.report.contains(FindingCode::MissingHeader));

        let content = format!("{}\n{}\n", vut_row(0.0, 0), vut_row(0.1, 1));
        let out = parse_flat_bytes("results_T_r01.csv", content.as_bytes(), &opts);
        assert!(out.report.contains(FindingCode::MissingHeader));
        assert!(out.trace.is_none());

        let content = file(&[vut_row(0.0, 0), vut_row(0.2, 1), vut_row(0.1, 2)]);
        let out = parse_flat_bytes("results_T_r01.csv", content.as_bytes(), &opts);
        let f = out
            .report
            .findings
            .iter()
            .find(|f| f.code == FindingCode::NonMonotoneTime)
            .unwrap();
        assert_eq!(f.location.row, Some(4));
        assert!(out.trace.is_none());

        let content = file(&[vut_row(0.0, 0), vut_row(0.1, 0)]);
        let out = parse_flat_bytes("results_T_r01.csv", content.as_bytes(), &opts);
        assert!(out.report.contains(FindingCode::DuplicateStep));

        let content = file(&[vut_row(0.0, 0)]).replace("VUT_speed,", "");
        let out = parse_flat_bytes("results_T_r01.csv", content.as_bytes(), &opts);
        assert!(out.report.contains(FindingCode::MissingMandatoryColumn));

        let content = file(&[vut_row(0.0, 0)]).replace("VUT_special_op", "VUT_mystery");
        let out = parse_flat_bytes("results_T_r01.csv", content.as_bytes(), &opts);
        assert!(out.report.contains(FindingCode::UnknownColumn));
        assert!(out.report.contains(FindingCode::MissingMandatoryColumn));

        let out = parse_flat_bytes("T_r01.csv", file(&[vut_row(0.0, 0)]).as_bytes(), &opts);
        assert!(out.report.contains(FindingCode::BadFileName));
        assert!(out.trace.is_none());
    }

    #[test]
    fn garbage_never_panics() {
        let opts = ParseOptions::default();
        for input in [
            &b"\xff\xfe\x00"[..],
            b"Time\n\"unterminated",
            b"Time,Step_number\n1,2,3\n",
            b"Actor_TTC,Time\n",
            b"Time,Step_number,Actor_Id,Actor_type\n0,0,a,tsv\n",
        ] {
            let out = parse_flat_bytes("results_T_r01.csv", input, &opts);
            assert!(out.report.has_errors());
            assert!(out.trace.is_none());
        }
    }

    #[test]
    fn entity_groups_round_trip() {
        use crate::model::*;
        let mut t = crate::parse::tests::small_trace();
        t.actors.insert(
            "ped".into(),
            vec![ActorState {
                id: "ped".into(),
                time: 0.1,
                step: 1,
                actor_type: ActorType::VruPedestrian,
                pos: Position::Vcs(VcsPosition::new(5.0, -2.0)),
                bbox_true: Some(BoundingShape::from_vcs([
                    VcsPosition::new(4.75, -2.25),
                    VcsPosition::new(5.25, -2.25),
                    VcsPosition::new(5.25, -1.75),
                    VcsPosition::new(4.75, -1.75),
                ])),
                bbox_perceived: None,
                speed: 1.2,
                vel_lat: 0.0,
                vel_long: 1.2,
                acc_lat: 0.0,
                acc_long: 0.0,
                heading: None,
                ttc: f64::INFINITY,
            }],
        );
        t.controllers.insert(
            "TL1".into(),
            vec![TrafficControllerState {
                id: "TL1".into(),
                time: 0.0,
                step: 0,
                phase: Phase::Stop,
                phase_perceived: Some(Phase::Go),
            }],
        );
        let content = render_flat(&t, &WriteOptions::default()).unwrap();
        let out = parse_flat_bytes("results_T_r01.csv", content.as_bytes(), &ParseOptions::default());
        assert!(!out.report.has_errors(), "{:#?}", out.report);
        assert_eq!(out.trace.unwrap(), t);
        assert_eq!(
            t.actors["ped"][0].bbox_true.as_ref().unwrap().frame,
            Frame::Vcs
        );
    }
}
