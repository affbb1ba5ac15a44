//! Speed, deceleration and traffic light rules.

use crate::geo::LocalFrame;
use crate::model::{GeoPosition, HeadingDeg, Phase, Trace, VehicleProfile};

use super::config::{RuleSet, StopLine};
use super::verdict::{Attribution, Outcome, RuleId, RuleVerdict, StepRange};

pub fn evaluate_kinematics(trace: &Trace, rules: &RuleSet) -> Vec<RuleVerdict> {
    vec![speed_verdict(trace, rules), decel_verdict(trace, rules)]
}

fn step_range(steps: impl Iterator<Item = u64>) -> Option<StepRange> {
    let mut range: Option<StepRange> = None;
    for s in steps {
        match &mut range {
            None => range = Some(StepRange { first: s, last: s }),
            Some(r) => r.last = s,
        }
    }
    range
}

fn speed_verdict(trace: &Trace, rules: &RuleSet) -> RuleVerdict {
    let mut v = RuleVerdict::new(RuleId::SpeedLimit, Outcome::Pass, "m/s");
    if trace.vut.is_empty() {
        v.outcome = Outcome::NotApplicable;
        return v;
    }
    v.measured = Some(trace.vut.iter().map(|s| s.speed).fold(0.0, f64::max));
    v.threshold = Some(rules.speed_limit);
    let limit = rules.speed_limit + rules.speed_tolerance;
    if let Some(r) = step_range(trace.vut.iter().filter(|s| s.speed > limit).map(|s| s.step)) {
        v.outcome = Outcome::Fail;
        v.offending = Some(r);
        v.attribution = Some(Attribution::VutAction);
    }
    v
}

/// Hard braking is reported but never fails a run: it may come from the
/// vehicle dynamics model rather than the driving function.
fn decel_verdict(trace: &Trace, rules: &RuleSet) -> RuleVerdict {
    let mut v = RuleVerdict::new(RuleId::Deceleration, Outcome::Pass, "m/s^2");
    if trace.vut.is_empty() {
        v.outcome = Outcome::NotApplicable;
        return v;
    }
    v.measured = Some(trace.vut.iter().map(|s| s.acc_long).fold(f64::INFINITY, f64::min));
    v.threshold = Some(rules.decel_limit);
    let hard = trace
        .vut
        .iter()
        .filter(|s| s.acc_long <= rules.decel_limit)
        .map(|s| s.step);
    if let Some(r) = step_range(hard) {
        v.outcome = Outcome::Warning;
        v.offending = Some(r);
        v.notes.push(
            "deceleration at or beyond the limit; check the vehicle dynamics model fidelity".into(),
        );
    }
    v
}

/// Checks stop-line crossings against controller phases.
///
/// The VUT crosses a line when its front bumper passes from behind to
/// beyond it along the approach direction. The phase that counts is the
/// controller's last recorded phase at or before the step preceding the
/// crossing.
pub fn evaluate_traffic_lights(trace: &Trace, profile: &VehicleProfile, rules: &RuleSet) -> Vec<RuleVerdict> {
    if trace.controllers.is_empty() {
        return vec![RuleVerdict::not_applicable(
            RuleId::TrafficLight,
            "",
            "no traffic light controllers in trace",
        )];
    }
    let mut out = Vec::new();
    for (id, recs) in &trace.controllers {
        let lines: Vec<&StopLine> = rules.stop_lines.iter().filter(|l| &l.controller == id).collect();
        if lines.is_empty() {
            let mut v = RuleVerdict::not_applicable(
                RuleId::TrafficLight,
                "",
                format!("no stop line configured for controller {id}"),
            );
            v.entity = Some(id.clone());
            log::warn!("no stop line configured for controller {id}; rule not applied");
            out.push(v);
            continue;
        }
        for line in lines {
            out.push(check_line(trace, profile, id, recs, line));
        }
    }
    out
}

fn check_line(
    trace: &Trace,
    profile: &VehicleProfile,
    id: &str,
    recs: &[crate::model::TrafficControllerState],
    line: &StopLine,
) -> RuleVerdict {
    let mut v = RuleVerdict::new(RuleId::TrafficLight, Outcome::Pass, "");
    v.entity = Some(id.to_string());
    let frame = LocalFrame::new(GeoPosition::new(line.lat, line.lon));
    let approach = HeadingDeg::new(line.heading).radians();
    let dir = [approach.sin(), approach.cos()];
    let half = profile.length / 2.0;

    let mut signed = Vec::with_capacity(trace.vut.len());
    for s in &trace.vut {
        let Ok(c) = frame.to_local(s.pos) else {
            signed.push(None);
            continue;
        };
        let h = s.heading.radians();
        let front = [c[0] + half * h.sin(), c[1] + half * h.cos()];
        signed.push(Some(front[0] * dir[0] + front[1] * dir[1]));
    }

    let phase_at = |step: u64| -> Option<&Phase> {
        recs.iter()
            .take_while(|r| r.step <= step)
            .last()
            .map(|r| &r.phase)
    };

    let mut crossings = 0;
    for i in 1..trace.vut.len() {
        let (Some(a), Some(b)) = (signed[i - 1], signed[i]) else {
            continue;
        };
        if !(a < 0.0 && b >= 0.0) {
            continue;
        }
        crossings += 1;
        let before = trace.vut[i - 1].step;
        let at = trace.vut[i].step;
        if phase_at(before) == Some(&Phase::Stop) {
            v.outcome = Outcome::Fail;
            v.attribution = Some(Attribution::VutAction);
            v.offending.get_or_insert(StepRange { first: at, last: at }).last = at;
            v.notes.push(format!("crossed the stop line at step {at} during a stop phase"));
        }
    }
    if crossings == 0 {
        v.notes.push("stop line not crossed".into());
    }
    v
}
