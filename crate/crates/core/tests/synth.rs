use vista_core::clearance::ClearanceConfig;
use vista_core::model::Trace;
use vista_core::parse::naming::flat_file_name;
use vista_core::parse::{check_frequency, parse_flat_bytes, render_flat, ParseOptions, WriteOptions};
use vista_core::rules::{evaluate_run, Outcome, RuleId, RuleSet};
use vista_core::synth::overtake::TSV_ID;
use vista_core::synth::{perturb, synthesize_run, synthesize_runs, Case, Perturbation, ScenarioSpec};
use vista_testkit::vincenty_inverse;

#[test]
fn every_run_meets_its_case() {
    let spec = ScenarioSpec::default();
    let rules = RuleSet::default();
    for case in Case::ALL {
        let runs = synthesize_runs(&spec, case).unwrap();
        assert_eq!(runs.len(), 10);
        for t in &runs {
            let out = evaluate_run(t, &spec.vut_profile(), &rules, &ClearanceConfig::default()).unwrap();
            let ev = &out.evaluation;
            let lat = ev.verdict(RuleId::LateralClearance, Some(TSV_ID)).unwrap();
            let m = lat.measured.unwrap();
            assert!((m - case.target_clearance()).abs() <= 0.01, "{case} r{}: {m}", t.run_id);
            let want = if case == Case::Case3 { Outcome::Pass } else { Outcome::Fail };
            assert_eq!(lat.outcome, want, "{case}");
            let lon = ev.verdict(RuleId::LongitudinalClearance, Some(TSV_ID)).unwrap();
            assert_ne!(lon.outcome, Outcome::Fail, "{case}: {lon:?}");

            let speed = ev.verdict(RuleId::SpeedLimit, None).unwrap();
            assert_eq!(speed.outcome, Outcome::Pass);
            assert!(speed.measured.unwrap() <= 40.0 / 3.6);
            let decel = ev.verdict(RuleId::Deceleration, None).unwrap();
            assert_eq!(decel.outcome, Outcome::Warning, "{case}");
            assert_eq!(decel.measured, Some(-8.0));
        }
    }
}

#[test]
fn runs_are_reproducible_and_distinct() {
    let spec = ScenarioSpec::default();
    for case in Case::ALL {
        let a = synthesize_run(&spec, case, 3).unwrap();
        assert_eq!(a, synthesize_run(&spec, case, 3).unwrap());
        assert_ne!(a.vut, synthesize_run(&spec, case, 4).unwrap().vut);
    }
    let still = ScenarioSpec {
        jitter: false,
        ..ScenarioSpec::default()
    };
    let a = synthesize_run(&still, Case::Case1, 1).unwrap();
    let b = synthesize_run(&still, Case::Case1, 2).unwrap();
    assert_eq!(a.vut, b.vut);
}

fn kinematic_error(t: &Trace) -> f64 {
    let mut sq = 0.0;
    let mut n = 0;
    for w in t.vut.windows(2) {
        let dt = w[1].time - w[0].time;
        let (d, _) = vincenty_inverse(w[0].pos.lat, w[0].pos.lon, w[1].pos.lat, w[1].pos.lon).unwrap();
        let v = 0.5 * (w[0].speed + w[1].speed);
        if v > 1.0 {
            sq += ((d / dt - v) / v).powi(2);
            n += 1;
        }
    }
    (sq / n as f64).sqrt()
}

#[test]
fn positions_agree_with_speed() {
    let spec = ScenarioSpec::default();
    for case in Case::ALL {
        let t = synthesize_run(&spec, case, 1).unwrap();
        let e = kinematic_error(&t);
        assert!(e < 0.02, "{case}: {e}");
        // acceleration integrates to speed
        for w in t.vut.windows(2) {
            let dt = w[1].time - w[0].time;
            let dv = w[1].speed - w[0].speed;
            assert!(dv / dt >= -8.0 - 1e-6 && dv / dt <= 3.0, "{case}: {}", dv / dt);
        }
    }
}

#[test]
fn synthesized_runs_pass_integrity() {
    let spec = ScenarioSpec::default();
    for case in Case::ALL {
        let t = synthesize_run(&spec, case, 7).unwrap();
        assert!(check_frequency(&t, 10.0).is_empty());
        let text = render_flat(&t, &WriteOptions::default()).unwrap();
        let out = parse_flat_bytes(&flat_file_name(&t.testcase_id, t.run_id), text.as_bytes(), &ParseOptions::default());
        assert!(out.report.findings.is_empty(), "{:#?}", out.report);
        assert_eq!(out.trace.unwrap(), t);
    }
}

#[test]
fn infeasible_specs_are_rejected() {
    let mut spec = ScenarioSpec::default();
    spec.target_min_lateral_clearance = Some(spec.max_clearance() + 0.1);
    assert!(synthesize_run(&spec, Case::Case3, 1).is_err());
    let spec = ScenarioSpec {
        sample_rate: 0.0,
        ..ScenarioSpec::default()
    };
    assert!(synthesize_run(&spec, Case::Case1, 1).is_err());
}

#[test]
fn irregular_logging_is_a_warning() {
    let mut t = synthesize_run(&ScenarioSpec::default(), Case::Case1, 1).unwrap();
    // drop two samples: one 0.3 s interval in a 10 Hz log
    t.vut.remove(21);
    t.vut.remove(21);
    let f = check_frequency(&t, 10.0);
    assert_eq!(f.len(), 1, "{f:?}");
    assert_eq!(f[0].code, vista_core::parse::FindingCode::JitterExceeded);
    assert_eq!(f[0].severity, vista_core::parse::Severity::Warning);
}

#[test]
fn perturbation_keeps_the_timeline() {
    let t = synthesize_run(&ScenarioSpec::default(), Case::Case2, 1).unwrap();
    let p = perturb(
        &t,
        &Perturbation {
            position_sigma: 0.2,
            speed_sigma: 0.2,
            time_shift: -0.7,
            seed: 1,
        },
    );
    assert_eq!(p.vut.len(), t.vut.len());
    assert!(p.vut.iter().zip(&t.vut).all(|(a, b)| a.time == b.time && a.step == b.step));
    assert_eq!(p.actors, t.actors);
    assert!(p.vut.iter().all(|s| s.speed >= 0.0));
}
