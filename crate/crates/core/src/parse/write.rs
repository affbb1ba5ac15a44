//! Trace serialization in both layouts.

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use thiserror::Error;

use super::array::{serialize_position_array, ArrayError};
use super::distributed::{
    ACTORS_PERCEIVED, ACTORS_TRUE, LIGHTS_PERCEIVED, LIGHTS_TRUE, OBSTACLES_PERCEIVED,
    OBSTACLES_TRUE, VUT_FILE,
};
use super::naming::{FileLayout, LayoutKind};
use super::schema::{self, Group, Role};
use super::WriteOptions;
use crate::model::{
    ActorState, BoundingShape, ObstacleState, Position, Trace, TrafficControllerState, VutState,
};

#[derive(Debug, Error)]
pub enum WriteError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{entity}: {source}")]
    Shape {
        entity: String,
        #[source]
        source: ArrayError,
    },
}

/// Shortest decimal that reads back to the same `f64`; `inf` for infinity.
pub fn fmt_f64(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.into()
}

fn shape(s: Option<&BoundingShape>, id: &str, o: &WriteOptions) -> Result<String, WriteError> {
    match s {
        None => Ok(String::new()),
        Some(s) => serialize_position_array(&s.vertices, o.axis_order, o.emit_count, true)
            .map_err(|source| WriteError::Shape {
                entity: id.to_string(),
                source,
            }),
    }
}

fn vut_cell(v: &VutState, col: &str) -> String {
    match col {
        schema::TIME => fmt_f64(v.time),
        schema::STEP => v.step.to_string(),
        "VUT_pos_lat" => fmt_f64(v.pos.lat),
        "VUT_pos_lon" => fmt_f64(v.pos.lon),
        "VUT_pos_elev" => opt(v.pos.elev),
        "VUT_travelled_dist" => fmt_f64(v.travelled),
        "VUT_speed" => fmt_f64(v.speed),
        "VUT_acc_lat" => fmt_f64(v.acc_lat),
        "VUT_acc_long" => fmt_f64(v.acc_long),
        "VUT_yaw_rate" => fmt_f64(v.yaw_rate),
        "VUT_pitch_rate" => opt(v.pitch_rate),
        "VUT_roll_rate" => opt(v.roll_rate),
        "VUT_heading" => fmt_f64(v.heading.degrees()),
        "VUT_ind_left_front" => flag(v.indicators.left_front),
        "VUT_ind_left_rear" => flag(v.indicators.left_rear),
        "VUT_ind_right_front" => flag(v.indicators.right_front),
        "VUT_ind_right_rear" => flag(v.indicators.right_rear),
        "VUT_ind_brake" => flag(v.indicators.brake),
        "VUT_ind_reverse" => flag(v.indicators.reverse),
        "VUT_ind_hazard" => flag(v.indicators.hazard),
        "VUT_throttle" => fmt_f64(v.throttle),
        "VUT_brake" => fmt_f64(v.brake),
        "VUT_steering_angle" => fmt_f64(v.steering_angle),
        "VUT_drive_status" => v.drive_status.tag().to_string(),
        "VUT_special_op" => v.special_op.tag().to_string(),
        _ => String::new(),
    }
}

/// `(lat, lon, elev, x, y, z)` cells of a position.
fn position_cells(p: &Position) -> [String; 6] {
    match *p {
        Position::Wgs84(g) => [
            fmt_f64(g.lat),
            fmt_f64(g.lon),
            opt(g.elev),
            String::new(),
            String::new(),
            String::new(),
        ],
        Position::Vcs(v) => [
            String::new(),
            String::new(),
            String::new(),
            fmt_f64(v.x),
            fmt_f64(v.y),
            opt(v.z),
        ],
    }
}

fn position_cell(p: &Position, group: Group, col: &str) -> Option<String> {
    let names = schema::position_columns(group)?;
    let i = names.iter().position(|n| *n == col)?;
    let mut cells = position_cells(p);
    Some(std::mem::take(&mut cells[i]))
}

fn actor_cell(a: &ActorState, col: &str, o: &WriteOptions) -> Result<String, WriteError> {
    if let Some(c) = position_cell(&a.pos, Group::Actor, col) {
        return Ok(c);
    }
    Ok(match col {
        schema::TIME => fmt_f64(a.time),
        schema::STEP => a.step.to_string(),
        schema::ACTOR_ID => a.id.clone(),
        "Actor_type" => a.actor_type.tag(),
        "Actor_bbox_true" => shape(a.bbox_true.as_ref(), &a.id, o)?,
        "Actor_bbox_perceived" => shape(a.bbox_perceived.as_ref(), &a.id, o)?,
        "Actor_vel_abs" => fmt_f64(a.speed),
        "Actor_vel_lat" => fmt_f64(a.vel_lat),
        "Actor_vel_long" => fmt_f64(a.vel_long),
        "Actor_acc_lat" => fmt_f64(a.acc_lat),
        "Actor_acc_long" => fmt_f64(a.acc_long),
        "Actor_heading" => opt(a.heading.map(|h| h.degrees())),
        "Actor_TTC" => fmt_f64(a.ttc),
        _ => String::new(),
    })
}

fn obstacle_cell(ob: &ObstacleState, col: &str, o: &WriteOptions) -> Result<String, WriteError> {
    if let Some(c) = position_cell(&ob.pos, Group::Obstacle, col) {
        return Ok(c);
    }
    Ok(match col {
        schema::TIME => fmt_f64(ob.time),
        schema::STEP => ob.step.to_string(),
        schema::OBST_ID => ob.id.clone(),
        "Obst_type" => ob.obst_type.0.to_string(),
        "Obst_poly_true" => shape(Some(&ob.poly_true), &ob.id, o)?,
        "Obst_poly_perceived" => shape(ob.poly_perceived.as_ref(), &ob.id, o)?,
        "Obst_NTD" => fmt_f64(ob.ntd),
        _ => String::new(),
    })
}

fn controller_cell(t: &TrafficControllerState, col: &str) -> String {
    match col {
        schema::TIME => fmt_f64(t.time),
        schema::STEP => t.step.to_string(),
        schema::TRAFFIC_ID => t.id.clone(),
        "Traffic_Ctrl_phase" => t.phase.tag().to_string(),
        "Traffic_Ctrl_phase_perceived" => t
            .phase_perceived
            .as_ref()
            .map(|p| p.tag().to_string())
            .unwrap_or_default(),
        _ => String::new(),
    }
}

fn names(cols: impl Iterator<Item = &'static schema::Column>) -> Vec<&'static str> {
    cols.map(|c| c.name).collect()
}

fn to_csv(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8 cells")
}

fn vut_columns() -> Vec<&'static str> {
    names(schema::role_columns(Role::Common).chain(schema::role_columns(Role::Vut)))
}

fn by_step<T>(recs: &[T], step: impl Fn(&T) -> u64) -> HashMap<u64, &T> {
    recs.iter().map(|r| (step(r), r)).collect()
}

/// Flat layout: VUT columns then one group per entity, ids in sorted order.
pub fn render_flat(t: &Trace, o: &WriteOptions) -> Result<String, WriteError> {
    let mut header = vut_columns();
    let vut_width = header.len();
    let actor_cols = names(Group::Actor.flat_columns());
    let obst_cols = names(Group::Obstacle.flat_columns());
    let light_cols = names(Group::TrafficLight.flat_columns());
    for _ in &t.actors {
        header.extend(&actor_cols);
    }
    for _ in &t.obstacles {
        header.extend(&obst_cols);
    }
    for _ in &t.controllers {
        header.extend(&light_cols);
    }

    let actors: Vec<_> = t.actors.values().map(|r| by_step(r, |a| a.step)).collect();
    let obstacles: Vec<_> = t.obstacles.values().map(|r| by_step(r, |a| a.step)).collect();
    let lights: Vec<_> = t.controllers.values().map(|r| by_step(r, |a| a.step)).collect();

    let mut rows = Vec::with_capacity(t.vut.len());
    for v in &t.vut {
        let mut row: Vec<String> = header[..vut_width].iter().map(|c| vut_cell(v, c)).collect();
        for m in &actors {
            match m.get(&v.step) {
                Some(a) => {
                    for c in &actor_cols {
                        row.push(actor_cell(a, c, o)?);
                    }
                }
                None => row.extend(actor_cols.iter().map(|_| String::new())),
            }
        }
        for m in &obstacles {
            match m.get(&v.step) {
                Some(ob) => {
                    for c in &obst_cols {
                        row.push(obstacle_cell(ob, c, o)?);
                    }
                }
                None => row.extend(obst_cols.iter().map(|_| String::new())),
            }
        }
        for m in &lights {
            match m.get(&v.step) {
                Some(l) => row.extend(light_cols.iter().map(|c| controller_cell(l, c))),
                None => row.extend(light_cols.iter().map(|_| String::new())),
            }
        }
        rows.push(row);
    }
    Ok(to_csv(&header, rows))
}

/// Distributed layout as file name to content. The VUT file and the three
/// true-state files are always present; perceived files only when some
/// record carries perceived data.
pub fn render_distributed(t: &Trace, o: &WriteOptions) -> Result<BTreeMap<String, String>, WriteError> {
    let mut files = BTreeMap::new();
    let vcols = vut_columns();
    let rows = t
        .vut
        .iter()
        .map(|v| vcols.iter().map(|c| vut_cell(v, c)).collect())
        .collect();
    files.insert(VUT_FILE.to_string(), to_csv(&vcols, rows));

    let common = names(schema::role_columns(Role::Common));
    let with = |role: Role, id: Option<&'static str>| -> Vec<&'static str> {
        let mut h = common.clone();
        h.extend(id);
        h.extend(names(schema::role_columns(role)));
        h
    };

    // records in (step, id) order
    fn ordered<'a, T>(m: &'a BTreeMap<String, Vec<T>>, step: impl Fn(&T) -> u64) -> Vec<&'a T> {
        let mut v: Vec<(u64, &String, &T)> = m
            .iter()
            .flat_map(|(id, recs)| recs.iter().map(move |r| (id, r)))
            .map(|(id, r)| (step(r), id, r))
            .collect();
        v.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        v.into_iter().map(|(_, _, r)| r).collect()
    }

    let actors = ordered(&t.actors, |a| a.step);
    let h = with(Role::Actor, None);
    let rows = actors
        .iter()
        .map(|a| h.iter().map(|c| actor_cell(a, c, o)).collect())
        .collect::<Result<Vec<Vec<String>>, _>>()?;
    files.insert(ACTORS_TRUE.to_string(), to_csv(&h, rows));
    if actors.iter().any(|a| a.bbox_perceived.is_some()) {
        let h = with(Role::ActorPerceived, Some(schema::ACTOR_ID));
        let rows = actors
            .iter()
            .filter(|a| a.bbox_perceived.is_some())
            .map(|a| h.iter().map(|c| actor_cell(a, c, o)).collect())
            .collect::<Result<Vec<Vec<String>>, _>>()?;
        files.insert(ACTORS_PERCEIVED.to_string(), to_csv(&h, rows));
    }

    let obstacles = ordered(&t.obstacles, |ob| ob.step);
    let h = with(Role::Obstacle, None);
    let rows = obstacles
        .iter()
        .map(|ob| h.iter().map(|c| obstacle_cell(ob, c, o)).collect())
        .collect::<Result<Vec<Vec<String>>, _>>()?;
    files.insert(OBSTACLES_TRUE.to_string(), to_csv(&h, rows));
    if obstacles.iter().any(|ob| ob.poly_perceived.is_some()) {
        let h = with(Role::ObstaclePerceived, Some(schema::OBST_ID));
        let rows = obstacles
            .iter()
            .filter(|ob| ob.poly_perceived.is_some())
            .map(|ob| h.iter().map(|c| obstacle_cell(ob, c, o)).collect())
            .collect::<Result<Vec<Vec<String>>, _>>()?;
        files.insert(OBSTACLES_PERCEIVED.to_string(), to_csv(&h, rows));
    }

    let lights = ordered(&t.controllers, |l| l.step);
    let h = with(Role::TrafficLight, None);
    let rows = lights
        .iter()
        .map(|l| h.iter().map(|c| controller_cell(l, c)).collect())
        .collect();
    files.insert(LIGHTS_TRUE.to_string(), to_csv(&h, rows));
    if lights.iter().any(|l| l.phase_perceived.is_some()) {
        let h = with(Role::TrafficLightPerceived, Some(schema::TRAFFIC_ID));
        let rows = lights
            .iter()
            .filter(|l| l.phase_perceived.is_some())
            .map(|l| h.iter().map(|c| controller_cell(l, c)).collect())
            .collect();
        files.insert(LIGHTS_PERCEIVED.to_string(), to_csv(&h, rows));
    }
    Ok(files)
}

fn write_file(path: PathBuf, content: &str) -> Result<PathBuf, WriteError> {
    std::fs::write(&path, content).map_err(|source| WriteError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes `t` at `layout.root` and returns the paths written.
pub fn write_trace(t: &Trace, layout: &FileLayout, o: &WriteOptions) -> Result<Vec<PathBuf>, WriteError> {
    if let Some(parent) = layout.root.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|source| WriteError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    match layout.kind {
        LayoutKind::Flat => Ok(vec![write_file(layout.root.clone(), &render_flat(t, o)?)?]),
        LayoutKind::Distributed => {
            let files = render_distributed(t, o)?;
            std::fs::create_dir_all(&layout.root).map_err(|source| WriteError::Io {
                path: layout.root.clone(),
                source,
            })?;
            files
                .iter()
                .map(|(name, content)| write_file(layout.root.join(name), content))
                .collect()
        }
    }
}
