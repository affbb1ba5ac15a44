//! Cell and record decoding shared by the flat and distributed readers.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use csv::StringRecord;

use super::array::{parse_position_array, ArrayError};
use super::integrity::{FindingCode, IntegrityReport, Location};
use super::schema::{self, Group, Requirement};
use super::ParseOptions;
use crate::clearance::polygon;
use crate::model::{
    ActorState, ActorType, BoundingShape, DriveStatus, Frame, GeoPosition, HeadingDeg,
    Indicators, ObstacleState, ObstacleType, Phase, Position, SpecialOp, Trace,
    TrafficControllerState, VcsPosition, VutState,
};

/// Column name to record index.
pub(crate) type ColumnMap = HashMap<String, usize>;

/// One CSV record seen through a column map.
pub(crate) struct Row<'a> {
    pub file: &'a str,
    pub line: u64,
    pub record: &'a StringRecord,
    pub cols: &'a ColumnMap,
}

impl Row<'_> {
    /// `None` when the column is absent from the header.
    pub fn cell(&self, name: &str) -> Option<&str> {
        self.cols
            .get(name)
            .and_then(|&i| self.record.get(i))
            .map(str::trim)
    }

    pub fn has_value(&self, name: &str) -> bool {
        self.cell(name).is_some_and(|c| !c.is_empty())
    }

    fn loc(&self, column: &str) -> Location {
        Location::file(self.file).row(self.line).column(column)
    }
}

/// Accumulates findings while decoding; getters return a placeholder and
/// flag the record as failed instead of stopping at the first bad cell.
pub(crate) struct Decoder<'r> {
    pub report: &'r mut IntegrityReport,
    pub opts: &'r ParseOptions,
    failed: bool,
}

impl<'r> Decoder<'r> {
    pub fn new(report: &'r mut IntegrityReport, opts: &'r ParseOptions) -> Self {
        Decoder {
            report,
            opts,
            failed: false,
        }
    }

    fn fail(&mut self, code: FindingCode, msg: String, loc: Location) {
        self.failed = true;
        self.report.error(code, msg, loc);
    }

    /// Returns whether any getter failed since the last call, and resets.
    pub fn take_failed(&mut self) -> bool {
        std::mem::take(&mut self.failed)
    }

    /// Mandatory cell text. Absent columns were already reported at the header.
    fn text<'a>(&mut self, row: &'a Row, name: &str) -> Option<&'a str> {
        match row.cell(name) {
            None => {
                self.failed = true;
                None
            }
            Some("") => {
                self.fail(
                    FindingCode::MalformedValue,
                    format!("empty value in mandatory column {name}"),
                    row.loc(name),
                );
                None
            }
            Some(s) => Some(s),
        }
    }

    fn parse_f64(&mut self, row: &Row, name: &str, s: &str, allow_inf: bool) -> f64 {
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() || (allow_inf && v == f64::INFINITY) => v,
            Ok(v) => {
                self.fail(
                    FindingCode::InvalidValue,
                    format!("{name} must be finite, got {v}"),
                    row.loc(name),
                );
                f64::NAN
            }
            Err(_) => {
                self.fail(
                    FindingCode::MalformedValue,
                    format!("{name}: `{s}` is not a number"),
                    row.loc(name),
                );
                f64::NAN
            }
        }
    }

    pub fn float(&mut self, row: &Row, name: &str) -> f64 {
        match self.text(row, name) {
            Some(s) => self.parse_f64(row, name, s, false),
            None => f64::NAN,
        }
    }

    /// Non-negative float where `inf` means "never".
    pub fn time_to_contact(&mut self, row: &Row, name: &str) -> f64 {
        let Some(s) = self.text(row, name) else {
            return f64::NAN;
        };
        let v = self.parse_f64(row, name, s, true);
        if v < 0.0 {
            self.fail(
                FindingCode::InvalidValue,
                format!("{name} must be non-negative, got {v}"),
                row.loc(name),
            );
        }
        v
    }

    pub fn float_opt(&mut self, row: &Row, name: &str) -> Option<f64> {
        match row.cell(name) {
            None | Some("") => None,
            Some(s) => Some(self.parse_f64(row, name, s, false)),
        }
    }

    pub fn in_range(&mut self, row: &Row, name: &str, v: f64, lo: f64, hi: f64) -> f64 {
        if v.is_finite() && !(lo..=hi).contains(&v) {
            self.fail(
                FindingCode::InvalidValue,
                format!("{name} = {v} outside [{lo}, {hi}]"),
                row.loc(name),
            );
        }
        v
    }

    pub fn unsigned(&mut self, row: &Row, name: &str) -> u64 {
        let Some(s) = self.text(row, name) else {
            return 0;
        };
        match s.parse::<u64>() {
            Ok(v) => v,
            Err(_) => {
                self.fail(
                    FindingCode::MalformedValue,
                    format!("{name}: `{s}` is not a non-negative integer"),
                    row.loc(name),
                );
                0
            }
        }
    }

    pub fn boolean(&mut self, row: &Row, name: &str) -> bool {
        match self.text(row, name) {
            Some("1") | Some("true") | Some("TRUE") | Some("True") => true,
            Some("0") | Some("false") | Some("FALSE") | Some("False") => false,
            Some(s) => {
                let msg = format!("{name}: `{s}` is not 0/1");
                self.fail(FindingCode::MalformedValue, msg, row.loc(name));
                false
            }
            None => false,
        }
    }

    pub fn string(&mut self, row: &Row, name: &str) -> String {
        self.text(row, name).unwrap_or_default().to_string()
    }

    /// Entity position from whichever coordinate pair is filled.
    pub fn position(&mut self, row: &Row, group: Group) -> Option<Position> {
        let [lat, lon, elev, x, y, z] = schema::position_columns(group)?;
        let geo = row.has_value(lat) || row.has_value(lon);
        let vcs = row.has_value(x) || row.has_value(y);
        match (geo, vcs) {
            (true, true) => {
                self.fail(
                    FindingCode::InvalidValue,
                    "both WGS84 and VCS positions are filled".into(),
                    row.loc(lat),
                );
                None
            }
            (false, false) => {
                self.fail(
                    FindingCode::MalformedValue,
                    "no position given".into(),
                    row.loc(lat),
                );
                None
            }
            (true, false) => {
                let la = self.float(row, lat);
                let la = self.in_range(row, lat, la, -90.0, 90.0);
                let lo = self.float(row, lon);
                let lo = self.in_range(row, lon, lo, -180.0, 180.0);
                let el = self.float_opt(row, elev);
                Some(Position::Wgs84(GeoPosition {
                    lat: la,
                    lon: lo,
                    elev: el,
                }))
            }
            (false, true) => {
                let xv = self.float(row, x);
                let yv = self.float(row, y);
                let zv = self.float_opt(row, z);
                Some(Position::Vcs(VcsPosition {
                    x: xv,
                    y: yv,
                    z: zv,
                }))
            }
        }
    }

    /// Position array cell in `frame`. `required` turns an empty cell into
    /// an error; `strict` turns an invalid polygon into an error rather than
    /// a warning.
    pub fn shape(
        &mut self,
        row: &Row,
        name: &str,
        frame: Frame,
        required: bool,
        strict: bool,
    ) -> Option<BoundingShape> {
        let s = match row.cell(name) {
            None | Some("") if !required => return None,
            _ => self.text(row, name)?,
        };
        let vertices = match parse_position_array(s, frame, self.opts.axis_order) {
            Ok(v) => v,
            Err(e) => {
                let code = match e {
                    ArrayError::Malformed(_) => FindingCode::MalformedArray,
                    ArrayError::CountMismatch { .. } => FindingCode::CountMismatch,
                    ArrayError::Empty => FindingCode::EmptyArray,
                };
                self.fail(code, format!("{name}: {e}"), row.loc(name));
                return None;
            }
        };
        if let Some(bad) = vertices.iter().find(|p| !p.is_valid()) {
            self.fail(
                FindingCode::InvalidValue,
                format!("{name}: vertex {bad:?} out of range"),
                row.loc(name),
            );
            return None;
        }
        let shape = BoundingShape::new(frame, vertices);
        if let Err(e) = polygon::validate(&planar(&shape)) {
            let msg = format!("{name}: {e}");
            if strict {
                self.fail(FindingCode::InvalidPolygon, msg, row.loc(name));
                return None;
            }
            self.report
                .warning(FindingCode::InvalidPolygon, msg, row.loc(name));
        }
        Some(shape)
    }
}

/// Vertices as planar points relative to the first vertex, for shape checks.
fn planar(shape: &BoundingShape) -> Vec<polygon::Point> {
    let raw: Vec<[f64; 2]> = shape
        .vertices
        .iter()
        .map(|p| match *p {
            Position::Wgs84(g) => [g.lon, g.lat],
            Position::Vcs(v) => [v.x, v.y],
        })
        .collect();
    let o = raw.first().copied().unwrap_or([0.0; 2]);
    raw.iter().map(|p| [p[0] - o[0], p[1] - o[1]]).collect()
}

pub(crate) fn decode_vut(d: &mut Decoder, row: &Row, time: f64, step: u64) -> Option<VutState> {
    let lat = d.float(row, "VUT_pos_lat");
    let lat = d.in_range(row, "VUT_pos_lat", lat, -90.0, 90.0);
    let lon = d.float(row, "VUT_pos_lon");
    let lon = d.in_range(row, "VUT_pos_lon", lon, -180.0, 180.0);
    let elev = d.float_opt(row, "VUT_pos_elev");
    let travelled = d.float(row, "VUT_travelled_dist");
    let speed = d.float(row, "VUT_speed");
    let speed = d.in_range(row, "VUT_speed", speed, 0.0, f64::MAX);
    let acc_lat = d.float(row, "VUT_acc_lat");
    let acc_long = d.float(row, "VUT_acc_long");
    let yaw_rate = d.float(row, "VUT_yaw_rate");
    let pitch_rate = d.float_opt(row, "VUT_pitch_rate");
    let roll_rate = d.float_opt(row, "VUT_roll_rate");
    let heading = d.float(row, "VUT_heading");
    let indicators = Indicators {
        left_front: d.boolean(row, "VUT_ind_left_front"),
        left_rear: d.boolean(row, "VUT_ind_left_rear"),
        right_front: d.boolean(row, "VUT_ind_right_front"),
        right_rear: d.boolean(row, "VUT_ind_right_rear"),
        brake: d.boolean(row, "VUT_ind_brake"),
        reverse: d.boolean(row, "VUT_ind_reverse"),
        hazard: d.boolean(row, "VUT_ind_hazard"),
    };
    let throttle = d.float(row, "VUT_throttle");
    let throttle = d.in_range(row, "VUT_throttle", throttle, 0.0, 1.0);
    let brake = d.float(row, "VUT_brake");
    let brake = d.in_range(row, "VUT_brake", brake, 0.0, 1.0);
    let steering_angle = d.float(row, "VUT_steering_angle");
    let drive_status = DriveStatus::from_tag(&d.string(row, "VUT_drive_status"));
    let special_op = SpecialOp::from_tag(&d.string(row, "VUT_special_op"));
    if d.take_failed() {
        return None;
    }
    Some(VutState {
        time,
        step,
        pos: GeoPosition { lat, lon, elev },
        travelled,
        speed,
        acc_lat,
        acc_long,
        yaw_rate,
        pitch_rate,
        roll_rate,
        heading: HeadingDeg::new(heading),
        indicators,
        throttle,
        brake,
        steering_angle,
        drive_status,
        special_op,
    })
}

pub(crate) fn decode_actor(d: &mut Decoder, row: &Row, time: f64, step: u64) -> Option<ActorState> {
    let id = d.string(row, schema::ACTOR_ID);
    let type_tag = d.string(row, "Actor_type");
    let actor_type = ActorType::from_tag(&type_tag);
    if actor_type.is_none() && !type_tag.is_empty() {
        d.fail(
            FindingCode::MalformedValue,
            format!("Actor_type: unknown type `{type_tag}`"),
            row.loc("Actor_type"),
        );
    }
    let pos = d.position(row, Group::Actor);
    let frame = pos.map(|p| p.frame()).unwrap_or(Frame::Wgs84);
    let bbox_true = d.shape(row, "Actor_bbox_true", frame, false, true);
    let bbox_perceived = d.shape(row, "Actor_bbox_perceived", frame, false, false);
    let speed = d.float(row, "Actor_vel_abs");
    let speed = d.in_range(row, "Actor_vel_abs", speed, 0.0, f64::MAX);
    let vel_lat = d.float(row, "Actor_vel_lat");
    let vel_long = d.float(row, "Actor_vel_long");
    let acc_lat = d.float(row, "Actor_acc_lat");
    let acc_long = d.float(row, "Actor_acc_long");
    let heading = if row.cols.contains_key("Actor_heading") {
        d.float_opt(row, "Actor_heading").map(HeadingDeg::new)
    } else {
        d.float(row, "Actor_heading");
        None
    };
    let ttc = d.time_to_contact(row, "Actor_TTC");
    if d.take_failed() {
        return None;
    }
    Some(ActorState {
        id,
        time,
        step,
        actor_type: actor_type?,
        pos: pos?,
        bbox_true,
        bbox_perceived,
        speed,
        vel_lat,
        vel_long,
        acc_lat,
        acc_long,
        heading,
        ttc,
    })
}

pub(crate) fn decode_obstacle(
    d: &mut Decoder,
    row: &Row,
    time: f64,
    step: u64,
) -> Option<ObstacleState> {
    let id = d.string(row, schema::OBST_ID);
    let type_tag = d.string(row, "Obst_type");
    let obst_type = type_tag
        .parse::<u32>()
        .ok()
        .map(ObstacleType)
        .or_else(|| ObstacleType::from_name(&type_tag));
    if obst_type.is_none() && !type_tag.is_empty() {
        d.fail(
            FindingCode::MalformedValue,
            format!("Obst_type: unknown type `{type_tag}`"),
            row.loc("Obst_type"),
        );
    }
    let pos = d.position(row, Group::Obstacle);
    let frame = pos.map(|p| p.frame()).unwrap_or(Frame::Wgs84);
    let poly_true = d.shape(row, "Obst_poly_true", frame, true, true);
    let poly_perceived = d.shape(row, "Obst_poly_perceived", frame, false, false);
    let ntd = d.time_to_contact(row, "Obst_NTD");
    if d.take_failed() {
        return None;
    }
    Some(ObstacleState {
        id,
        time,
        step,
        obst_type: obst_type?,
        pos: pos?,
        poly_true: poly_true?,
        poly_perceived,
        ntd,
    })
}

pub(crate) fn decode_controller(
    d: &mut Decoder,
    row: &Row,
    time: f64,
    step: u64,
) -> Option<TrafficControllerState> {
    let id = d.string(row, schema::TRAFFIC_ID);
    let phase = Phase::from_tag(&d.string(row, "Traffic_Ctrl_phase"));
    let phase_perceived = match row.cell("Traffic_Ctrl_phase_perceived") {
        None | Some("") => None,
        Some(s) => Some(Phase::from_tag(s)),
    };
    if d.take_failed() {
        return None;
    }
    Some(TrafficControllerState {
        id,
        time,
        step,
        phase,
        phase_perceived,
    })
}

/// Reports mandatory columns of `columns` missing from `present`.
pub(crate) fn check_mandatory<'a>(
    report: &mut IntegrityReport,
    file: &str,
    columns: impl Iterator<Item = &'a schema::Column>,
    present: &ColumnMap,
    context: &str,
) {
    let mut pair_cols = Vec::new();
    for c in columns {
        match c.requirement {
            Requirement::Mandatory if !present.contains_key(c.name) => report.error(
                FindingCode::MissingMandatoryColumn,
                format!("mandatory column {} missing{context}", c.name),
                Location::file(file).column(c.name),
            ),
            Requirement::PositionPair => pair_cols.push(c.name),
            _ => {}
        }
    }
    if let [lat, lon, x, y] = pair_cols[..] {
        let geo = present.contains_key(lat) && present.contains_key(lon);
        let vcs = present.contains_key(x) && present.contains_key(y);
        if !geo && !vcs {
            report.error(
                FindingCode::MissingMandatoryColumn,
                format!("neither {lat}/{lon} nor {x}/{y} present{context}"),
                Location::file(file).column(lat),
            );
        }
    }
}

/// Whether a header cell names a known column or one of the allowed aliases.
pub(crate) fn is_known(name: &str) -> bool {
    schema::column(name).is_some()
}

/// Entity records decoded from one or more files, before assembly.
#[derive(Default)]
pub(crate) struct Collected {
    pub vut_file: String,
    /// `(line, state)` in file order.
    pub vut: Vec<(u64, VutState)>,
    pub actors: Vec<(Location, ActorState)>,
    pub obstacles: Vec<(Location, ObstacleState)>,
    pub controllers: Vec<(Location, TrafficControllerState)>,
}

/// Runs the cross-record checks and builds the trace when no error has been
/// reported.
pub(crate) fn assemble(
    testcase_id: &str,
    run_id: u32,
    c: Collected,
    report: &mut IntegrityReport,
) -> Option<Trace> {
    let vloc = |line: u64, col: &str| Location::file(&c.vut_file).row(line).column(col);
    if c.vut.is_empty() {
        report.error(
            FindingCode::EmptyTrace,
            "no VUT records",
            Location::file(&c.vut_file),
        );
    }
    if let Some((line, first)) = c.vut.first() {
        if first.time != 0.0 {
            report.warning(
                FindingCode::StartTimeNotZero,
                format!("first record at t = {} s", first.time),
                vloc(*line, schema::TIME),
            );
        }
    }
    let mut steps = BTreeSet::new();
    for (i, (line, s)) in c.vut.iter().enumerate() {
        if !steps.insert(s.step) {
            report.error(
                FindingCode::DuplicateStep,
                format!("step {} appears more than once", s.step),
                vloc(*line, schema::STEP),
            );
        } else if i > 0 && s.step < c.vut[i - 1].1.step {
            report.error(
                FindingCode::NonMonotoneStep,
                format!("step {} follows step {}", s.step, c.vut[i - 1].1.step),
                vloc(*line, schema::STEP),
            );
        }
        if i > 0 && s.time <= c.vut[i - 1].1.time {
            report.error(
                FindingCode::NonMonotoneTime,
                format!("time {} does not increase after {}", s.time, c.vut[i - 1].1.time),
                vloc(*line, schema::TIME),
            );
        }
    }

    let mut probe = Trace::new(testcase_id, run_id);
    probe.vut = c.vut.iter().map(|(_, s)| s.clone()).collect();
    let half_period = probe.median_period().map(|p| p / 2.0);
    let vut_time: HashMap<u64, f64> = probe.vut.iter().map(|s| (s.step, s.time)).collect();

    let mut entity_check = |kind: &str, id: &str, step: u64, time: f64, loc: &Location| {
        match vut_time.get(&step) {
            None => report.error(
                FindingCode::OrphanStep,
                format!("{kind} {id} has a record at step {step}, which the VUT log lacks"),
                loc.clone(),
            ),
            Some(&t) => {
                if let Some(h) = half_period {
                    if (time - t).abs() > h {
                        report.warning(
                            FindingCode::TimeMismatch,
                            format!(
                                "{kind} {id} at step {step} is stamped {time} s, VUT says {t} s"
                            ),
                            loc.clone(),
                        );
                    }
                }
            }
        }
    };
    for (loc, a) in &c.actors {
        entity_check("actor", &a.id, a.step, a.time, loc);
    }
    for (loc, o) in &c.obstacles {
        entity_check("obstacle", &o.id, o.step, o.time, loc);
    }
    for (loc, t) in &c.controllers {
        entity_check("traffic light", &t.id, t.step, t.time, loc);
    }

    let actors = group_records(report, "actor", c.actors, |a| (&a.id, a.step));
    let obstacles = group_records(report, "obstacle", c.obstacles, |o| (&o.id, o.step));
    let controllers = group_records(report, "traffic light", c.controllers, |t| (&t.id, t.step));

    if report.has_errors() {
        return None;
    }
    probe.actors = actors;
    probe.obstacles = obstacles;
    probe.controllers = controllers;
    Some(probe)
}

fn group_records<T>(
    report: &mut IntegrityReport,
    kind: &str,
    records: Vec<(Location, T)>,
    key: impl Fn(&T) -> (&String, u64),
) -> BTreeMap<String, Vec<T>> {
    let mut by_id: BTreeMap<String, BTreeMap<u64, T>> = BTreeMap::new();
    for (loc, r) in records {
        let (id, step) = key(&r);
        let id = id.clone();
        let slot = by_id.entry(id.clone()).or_default();
        if slot.contains_key(&step) {
            report.error(
                FindingCode::DuplicateEntityRecord,
                format!("{kind} {id} has more than one record at step {step}"),
                loc,
            );
        } else {
            slot.insert(step, r);
        }
    }
    by_id
        .into_iter()
        .map(|(id, recs)| (id, recs.into_values().collect()))
        .collect()
}
