//! Consistency between a virtual run and a reference (physical) run of the
//! same test case.
//!
//! Both VUT tracks are sampled on a shared axis `u` where the virtual time is
//! `u - offset/2` and the reference time is `u + offset/2`. Swapping the two
//! traces negates the offset and reproduces the same sample pairs, so the
//! metrics are symmetric.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{GeoError, LocalFrame};
use crate::model::{GeoPosition, Trace};

/// Alignment search half-width, seconds.
pub const SEARCH_WINDOW_S: f64 = 5.0;
/// Alignment search step, seconds.
pub const SEARCH_STEP_S: f64 = 0.01;
pub const MAX_RESAMPLE_HZ: f64 = 100.0;
/// Required overlap as a fraction of the shorter trace.
pub const MIN_OVERLAP_FRACTION: f64 = 0.8;
/// Minimum VUT span of each trace, seconds.
pub const MIN_DURATION_S: f64 = 2.0;
/// Alignment candidates overlapping less than this fraction are skipped.
const MIN_ALIGN_FRACTION: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FidelityError {
    #[error("{which} trace spans {duration:.2} s of VUT data, need at least {MIN_DURATION_S} s")]
    TooShort { which: &'static str, duration: f64 },
    #[error("traces overlap for {overlap:.2} s, need {required:.2} s")]
    InsufficientOverlap { overlap: f64, required: f64 },
    #[error(transparent)]
    Geo(#[from] GeoError),
}

/// Placeholder limits; authorities are expected to supply their own.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Meters.
    pub position_rmse: f64,
    /// m/s.
    pub speed_rmse: f64,
    /// Degrees.
    pub heading_rmse: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            position_rmse: 0.5,
            speed_rmse: 0.5,
            heading_rmse: 5.0,
        }
    }
}

impl Tolerances {
    pub fn from_toml(s: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricFlags {
    pub position: bool,
    pub speed: bool,
    pub heading: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub virtual_run: String,
    pub reference_run: String,
    /// Reference time minus virtual time for matching events, seconds.
    pub offset: f64,
    pub resample_rate: f64,
    pub samples: usize,
    /// Seconds.
    pub overlap: f64,
    pub position_rmse: f64,
    pub speed_rmse: f64,
    pub heading_rmse: f64,
    pub max_position_deviation: f64,
    pub tolerances: Tolerances,
    pub pass: MetricFlags,
    pub passed: bool,
    /// The simulation should be recalibrated against physical data.
    pub recalibration_recommended: bool,
}

impl FidelityReport {
    pub fn render_text(&self) -> String {
        let mark = |ok: bool| if ok { "pass" } else { "FAIL" };
        let mut s = String::new();
        s.push_str(&format!(
            "fidelity {} vs {}: {}\n",
            self.virtual_run,
            self.reference_run,
            if self.passed { "PASS" } else { "FAIL" }
        ));
        s.push_str(&format!(
            "  offset {:.2} s, {} samples at {} Hz over {:.2} s\n",
            self.offset, self.samples, self.resample_rate, self.overlap
        ));
        s.push_str(&format!(
            "  position RMSE {:.3} m (tol {}) {}, max deviation {:.3} m\n",
            self.position_rmse,
            self.tolerances.position_rmse,
            mark(self.pass.position),
            self.max_position_deviation
        ));
        s.push_str(&format!(
            "  speed RMSE {:.3} m/s (tol {}) {}\n",
            self.speed_rmse,
            self.tolerances.speed_rmse,
            mark(self.pass.speed)
        ));
        s.push_str(&format!(
            "  heading RMSE {:.3} deg (tol {}) {}\n",
            self.heading_rmse,
            self.tolerances.heading_rmse,
            mark(self.pass.heading)
        ));
        if self.recalibration_recommended {
            s.push_str("  recalibration recommended\n");
        }
        s
    }
}

/// VUT track in a planar frame, ready for interpolation.
struct Track {
    t: Vec<f64>,
    en: Vec<[f64; 2]>,
    speed: Vec<f64>,
    heading: Vec<f64>,
}

#[derive(Clone, Copy)]
struct Sample {
    en: [f64; 2],
    speed: f64,
    heading: f64,
}

impl Track {
    fn new(trace: &Trace, frame: &LocalFrame) -> Result<Self, GeoError> {
        let mut track = Track {
            t: Vec::with_capacity(trace.vut.len()),
            en: Vec::with_capacity(trace.vut.len()),
            speed: Vec::with_capacity(trace.vut.len()),
            heading: Vec::with_capacity(trace.vut.len()),
        };
        for s in &trace.vut {
            track.t.push(s.time);
            track.en.push(frame.to_local(s.pos)?);
            track.speed.push(s.speed);
            track.heading.push(s.heading.degrees());
        }
        Ok(track)
    }

    fn start(&self) -> f64 {
        self.t[0]
    }

    fn end(&self) -> f64 {
        self.t[self.t.len() - 1]
    }

    fn duration(&self) -> f64 {
        self.end() - self.start()
    }

    /// Bracketing index and weight of the later sample.
    fn locate(&self, time: f64) -> (usize, f64) {
        let n = self.t.len();
        if n == 1 || time <= self.t[0] {
            return (0, 0.0);
        }
        if time >= self.t[n - 1] {
            return (n - 2, 1.0);
        }
        let i = self.t.partition_point(|&x| x <= time) - 1;
        let dt = self.t[i + 1] - self.t[i];
        (i, if dt > 0.0 { (time - self.t[i]) / dt } else { 0.0 })
    }

    fn speed_at(&self, time: f64) -> f64 {
        let (i, w) = self.locate(time);
        if w == 0.0 {
            return self.speed[i];
        }
        self.speed[i] + w * (self.speed[i + 1] - self.speed[i])
    }

    fn at(&self, time: f64) -> Sample {
        let (i, w) = self.locate(time);
        if w == 0.0 {
            return Sample {
                en: self.en[i],
                speed: self.speed[i],
                heading: self.heading[i],
            };
        }
        let lerp = |a: f64, b: f64| a + w * (b - a);
        let (a, b) = (self.en[i], self.en[i + 1]);
        let dh = wrap_degrees(self.heading[i + 1] - self.heading[i]);
        Sample {
            en: [lerp(a[0], b[0]), lerp(a[1], b[1])],
            speed: lerp(self.speed[i], self.speed[i + 1]),
            heading: self.heading[i] + w * dh,
        }
    }
}

/// Wraps an angle difference into (-180, 180].
fn wrap_degrees(d: f64) -> f64 {
    let r = d.rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

fn resample_rate(a: &Trace, b: &Trace) -> f64 {
    let native = a
        .sample_rate()
        .unwrap_or(0.0)
        .max(b.sample_rate().unwrap_or(0.0));
    if native > 0.0 {
        // median periods such as 0.1 s are not exact in binary
        ((native * 1e6).round() / 1e6).min(MAX_RESAMPLE_HZ)
    } else {
        MAX_RESAMPLE_HZ
    }
}

/// Points on the shared axis where both tracks have data, for `offset`.
fn grid(a: &Track, b: &Track, offset: f64, hz: f64) -> (Vec<f64>, f64) {
    let half = offset / 2.0;
    let lo = (a.start() + half).max(b.start() - half);
    let hi = (a.end() + half).min(b.end() - half);
    if hi < lo {
        return (Vec::new(), hi - lo);
    }
    let n = ((hi - lo) * hz + 1e-9).floor() as usize + 1;
    ((0..n).map(|k| lo + k as f64 / hz).collect(), hi - lo)
}

fn planar_frame(a: &Trace, b: &Trace) -> LocalFrame {
    let (pa, pb) = (a.vut[0].pos, b.vut[0].pos);
    LocalFrame::new(GeoPosition::new((pa.lat + pb.lat) / 2.0, (pa.lon + pb.lon) / 2.0))
}

fn tracks(virt: &Trace, reference: &Trace) -> Result<(Track, Track), FidelityError> {
    for (which, t) in [("virtual", virt), ("reference", reference)] {
        let duration = t.duration();
        if t.vut.len() < 2 || duration < MIN_DURATION_S {
            return Err(FidelityError::TooShort { which, duration });
        }
    }
    let frame = planar_frame(virt, reference);
    Ok((Track::new(virt, &frame)?, Track::new(reference, &frame)?))
}

/// Offset in seconds such that the reference at `t + offset` matches the
/// virtual run at `t`, chosen by least mean squared speed difference.
///
/// Ties go to the offset with the smallest magnitude.
pub fn align(virt: &Trace, reference: &Trace) -> Result<f64, FidelityError> {
    let (a, b) = tracks(virt, reference)?;
    align_tracks(&a, &b, resample_rate(virt, reference))
}

fn align_tracks(a: &Track, b: &Track, hz: f64) -> Result<f64, FidelityError> {
    let shorter = a.duration().min(b.duration());
    let needed = MIN_ALIGN_FRACTION * shorter;
    let steps = (SEARCH_WINDOW_S / SEARCH_STEP_S).round() as i64;
    let mut best: Option<(f64, f64)> = None;
    let mut widest = f64::NEG_INFINITY;
    // 0, +1, -1, +2, -2, ... so that strict improvement keeps the smallest |offset|.
    for k in (0..=2 * steps).map(|i| if i % 2 == 1 { (i + 1) / 2 } else { -(i / 2) }) {
        let offset = k as f64 * SEARCH_STEP_S;
        let (us, span) = grid(a, b, offset, hz);
        widest = widest.max(span);
        if span < needed || us.is_empty() {
            continue;
        }
        let half = offset / 2.0;
        let sse: f64 = us
            .iter()
            .map(|&u| {
                let d = a.speed_at(u - half) - b.speed_at(u + half);
                d * d
            })
            .sum();
        let mse = sse / us.len() as f64;
        if best.is_none_or(|(m, _)| mse < m) {
            best = Some((mse, offset));
        }
    }
    best.map(|(_, o)| o)
        .ok_or(FidelityError::InsufficientOverlap {
            overlap: widest.max(0.0),
            required: needed,
        })
}

/// Aligns the traces, then compares them.
pub fn compare(virt: &Trace, reference: &Trace, tol: &Tolerances) -> Result<FidelityReport, FidelityError> {
    let (a, b) = tracks(virt, reference)?;
    let hz = resample_rate(virt, reference);
    let offset = align_tracks(&a, &b, hz)?;
    compare_tracks(virt, reference, &a, &b, offset, hz, tol)
}

/// Compares the traces at a given offset.
pub fn compare_aligned(
    virt: &Trace,
    reference: &Trace,
    offset: f64,
    tol: &Tolerances,
) -> Result<FidelityReport, FidelityError> {
    let (a, b) = tracks(virt, reference)?;
    compare_tracks(virt, reference, &a, &b, offset, resample_rate(virt, reference), tol)
}

fn compare_tracks(
    virt: &Trace,
    reference: &Trace,
    a: &Track,
    b: &Track,
    offset: f64,
    hz: f64,
    tol: &Tolerances,
) -> Result<FidelityReport, FidelityError> {
    let (us, overlap) = grid(a, b, offset, hz);
    let required = MIN_OVERLAP_FRACTION * a.duration().min(b.duration());
    if us.is_empty() || overlap < required - 1e-9 {
        return Err(FidelityError::InsufficientOverlap {
            overlap: overlap.max(0.0),
            required,
        });
    }
    let half = offset / 2.0;
    let (mut pos, mut speed, mut heading, mut max_dev) = (0.0, 0.0, 0.0, 0.0f64);
    for &u in &us {
        let (sa, sb) = (a.at(u - half), b.at(u + half));
        let d2 = (sa.en[0] - sb.en[0]).powi(2) + (sa.en[1] - sb.en[1]).powi(2);
        pos += d2;
        max_dev = max_dev.max(d2.sqrt());
        speed += (sa.speed - sb.speed).powi(2);
        heading += wrap_degrees(sa.heading - sb.heading).powi(2);
    }
    let n = us.len() as f64;
    let position_rmse = (pos / n).sqrt();
    let speed_rmse = (speed / n).sqrt();
    let heading_rmse = (heading / n).sqrt();
    let pass = MetricFlags {
        position: position_rmse <= tol.position_rmse,
        speed: speed_rmse <= tol.speed_rmse,
        heading: heading_rmse <= tol.heading_rmse,
    };
    let passed = pass.position && pass.speed && pass.heading;
    Ok(FidelityReport {
        virtual_run: run_label(virt),
        reference_run: run_label(reference),
        offset,
        resample_rate: hz,
        samples: us.len(),
        overlap,
        position_rmse,
        speed_rmse,
        heading_rmse,
        max_position_deviation: max_dev,
        tolerances: *tol,
        pass,
        passed,
        recalibration_recommended: !passed,
    })
}

fn run_label(t: &Trace) -> String {
    format!("{}_r{:02}", t.testcase_id, t.run_id)
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("recalibration fraction must lie in (0, 1], got {0}")]
pub struct FractionError(pub f64);

/// Seeded choice of `ceil(fraction * N)` distinct test case ids.
///
/// The result depends only on the set of ids, the fraction and the seed; it
/// is returned in sorted order.
pub fn select_recalibration_subset(
    ids: &[String],
    fraction: f64,
    seed: u64,
) -> Result<Vec<String>, FractionError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(FractionError(fraction));
    }
    let mut pool: Vec<String> = ids.to_vec();
    pool.sort();
    pool.dedup();
    let k = ((fraction * pool.len() as f64) - 1e-9).ceil().max(0.0) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pool.shuffle(&mut rng);
    pool.truncate(k.min(pool.len()));
    pool.sort();
    Ok(pool)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::LocalFrame;
    use crate::model::*;

    /// Accelerate, cruise, brake: a speed profile with features to align on.
    fn profile(t: f64) -> f64 {
        if t < 3.0 {
            2.0 * t
        } else if t < 6.0 {
            6.0
        } else {
            (6.0 - 3.0 * (t - 6.0)).max(0.0)
        }
    }

    fn trace(shift: f64, lateral: f64) -> Trace {
        let frame = LocalFrame::new(GeoPosition::new(1.354, 103.69));
        let mut t = Trace::new("TC", 1);
        let dt = 0.01;
        let mut north = 0.0;
        for i in 0..=1000u64 {
            let time = i as f64 * 0.01;
            let v = profile(time - shift);
            if i % 10 == 0 {
                t.vut.push(VutState {
                    time,
                    step: i / 10,
                    pos: frame.to_geo([lateral, north]).unwrap(),
                    travelled: north,
                    speed: v,
                    acc_lat: 0.0,
                    acc_long: 0.0,
                    yaw_rate: 0.0,
                    pitch_rate: None,
                    roll_rate: None,
                    heading: HeadingDeg::new(0.0),
                    indicators: Indicators::default(),
                    throttle: 0.0,
                    brake: 0.0,
                    steering_angle: 0.0,
                    drive_status: DriveStatus::Autonomous,
                    special_op: SpecialOp::Normal,
                });
            }
            north += v * dt;
        }
        t
    }

    #[test]
    fn identical_traces() {
        let t = trace(0.0, 0.0);
        assert_eq!(align(&t, &t).unwrap(), 0.0);
        let r = compare(&t, &t, &Tolerances::default()).unwrap();
        assert_eq!(r.position_rmse, 0.0);
        assert_eq!(r.speed_rmse, 0.0);
        assert_eq!(r.heading_rmse, 0.0);
        assert!(r.passed && !r.recalibration_recommended);
        assert_eq!(r.resample_rate, 10.0);
    }

    #[test]
    fn recovers_shift() {
        let a = trace(0.0, 0.0);
        let b = trace(0.5, 0.0);
        let off = align(&a, &b).unwrap();
        assert!((off - 0.5).abs() <= 0.01, "{off}");
        let back = align(&b, &a).unwrap();
        assert!((back + 0.5).abs() <= 0.01, "{back}");
    }

    #[test]
    fn lateral_offset_shows_in_position_only() {
        let a = trace(0.0, 0.0);
        let b = trace(0.0, 0.3);
        let r = compare(&a, &b, &Tolerances::default()).unwrap();
        assert!((r.position_rmse - 0.3).abs() < 0.01, "{}", r.position_rmse);
        assert!(r.speed_rmse < 1e-12);
        let tight = Tolerances {
            position_rmse: 0.2,
            ..Tolerances::default()
        };
        let r = compare(&a, &b, &tight).unwrap();
        assert!(!r.pass.position && r.pass.speed && !r.passed && r.recalibration_recommended);
    }

    #[test]
    fn disjoint_spans_are_rejected() {
        let a = trace(0.0, 0.0);
        let mut b = a.clone();
        for s in &mut b.vut {
            s.time += 100.0;
        }
        assert!(matches!(
            compare(&a, &b, &Tolerances::default()),
            Err(FidelityError::InsufficientOverlap { .. })
        ));
        let mut short = a.clone();
        short.vut.truncate(10);
        assert!(matches!(align(&short, &a), Err(FidelityError::TooShort { .. })));
    }

    #[test]
    fn recalibration_subset() {
        let ids: Vec<String> = (1..=10).map(|i| format!("TC-{i:02}")).collect();
        let s = select_recalibration_subset(&ids, 0.20, 7).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s, select_recalibration_subset(&ids, 0.20, 7).unwrap());
        let mut rev = ids.clone();
        rev.reverse();
        assert_eq!(s, select_recalibration_subset(&rev, 0.20, 7).unwrap());
        assert_eq!(select_recalibration_subset(&ids, 0.25, 7).unwrap().len(), 3);
        assert_eq!(select_recalibration_subset(&ids[..1], 0.25, 7).unwrap().len(), 1);
        assert!(select_recalibration_subset(&ids, 0.0, 7).is_err());
        assert!(select_recalibration_subset(&ids, 1.5, 7).is_err());
    }

    #[test]
    fn tolerance_file() {
        let t = Tolerances::from_toml("position_rmse = 0.3").unwrap();
        assert_eq!(t.position_rmse, 0.3);
        assert_eq!(t.speed_rmse, 0.5);
        assert!(Tolerances::from_toml("bogus = 1").is_err());
    }
}
