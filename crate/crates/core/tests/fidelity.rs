use proptest::prelude::*;
use vista_core::fidelity::{align, compare, compare_aligned, select_recalibration_subset, Tolerances};
use vista_core::synth::{perturb, synthesize_run, Case, Perturbation, ScenarioSpec};

fn base(case: Case) -> vista_core::model::Trace {
    synthesize_run(&ScenarioSpec::default(), case, 1).unwrap()
}

#[test]
fn identical_traces_have_zero_error() {
    for case in Case::ALL {
        let t = base(case);
        let r = compare(&t, &t, &Tolerances::default()).unwrap();
        assert_eq!(r.offset, 0.0);
        assert_eq!(r.position_rmse, 0.0);
        assert_eq!(r.speed_rmse, 0.0);
        assert_eq!(r.heading_rmse, 0.0);
        assert!(r.passed && !r.recalibration_recommended);
    }
}

#[test]
fn shifted_noisy_twin_is_realigned() {
    let t = base(Case::Case1);
    let mut offsets = Vec::new();
    for seed in 0..50 {
        let twin = perturb(
            &t,
            &Perturbation {
                position_sigma: 0.1,
                speed_sigma: 0.0,
                time_shift: 0.5,
                seed,
            },
        );
        let r = compare(&t, &twin, &Tolerances::default()).unwrap();
        assert!((r.offset - 0.5).abs() <= 0.05, "seed {seed}: offset {}", r.offset);
        assert!(
            (0.08..=0.20).contains(&r.position_rmse),
            "seed {seed}: position rmse {}",
            r.position_rmse
        );
        offsets.push(r.offset);
    }
    assert!(offsets.iter().all(|o| (o - 0.5).abs() < 1e-9), "{offsets:?}");
}

#[test]
fn misaligned_comparison_shows_the_shift() {
    let t = base(Case::Case2);
    let twin = perturb(
        &t,
        &Perturbation {
            time_shift: 0.5,
            ..Perturbation::default()
        },
    );
    let raw = compare_aligned(&t, &twin, 0.0, &Tolerances::default()).unwrap();
    let fixed = compare(&t, &twin, &Tolerances::default()).unwrap();
    assert!(raw.speed_rmse > 10.0 * fixed.speed_rmse.max(1e-6));
    assert!(fixed.position_rmse < 1e-3, "{}", fixed.position_rmse);
}

#[test]
fn speed_noise_fails_a_tight_tolerance() {
    let t = base(Case::Case3);
    let twin = perturb(
        &t,
        &Perturbation {
            speed_sigma: 0.8,
            seed: 3,
            ..Perturbation::default()
        },
    );
    let r = compare(&t, &twin, &Tolerances::default()).unwrap();
    assert!(!r.passed && r.recalibration_recommended);
    assert!(!r.pass.speed && r.pass.position);
    // at the true offset no interpolation averages the noise away
    let at_zero = compare_aligned(&t, &twin, 0.0, &Tolerances::default()).unwrap();
    assert!((at_zero.speed_rmse - 0.8).abs() < 0.1, "{}", at_zero.speed_rmse);
    assert!(r.speed_rmse <= at_zero.speed_rmse + 1e-12);
}

#[test]
fn recalibration_subset_sizes() {
    for n in [4usize, 10, 40] {
        let ids: Vec<String> = (0..n).map(|i| format!("TC-{i:03}")).collect();
        for seed in 0..20 {
            let s = select_recalibration_subset(&ids, 0.20, seed).unwrap();
            let share = s.len() as f64 / n as f64;
            assert!((0.20..=0.25).contains(&share), "n={n}: {} ids", s.len());
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            assert!(s.iter().all(|x| ids.contains(x)));
            assert_eq!(s, select_recalibration_subset(&ids, 0.20, seed).unwrap());
        }
        for f in [0.05, 0.25, 0.5, 1.0] {
            let s = select_recalibration_subset(&ids, f, 1).unwrap();
            assert_eq!(s.len(), (f * n as f64 - 1e-9).ceil() as usize);
        }
    }
    assert_eq!(select_recalibration_subset(&["a".into()], 0.25, 0).unwrap().len(), 1);
    assert!(select_recalibration_subset(&["a".into()], 1.5, 0).is_err());
    assert!(select_recalibration_subset(&["a".into()], 0.0, 0).is_err());
}

#[test]
fn perturbed_case3_twin_is_within_tolerance() {
    let t = base(Case::Case3);
    let twin = perturb(
        &t,
        &Perturbation {
            position_sigma: 0.1,
            speed_sigma: 0.1,
            time_shift: 0.3,
            seed: 9,
        },
    );
    let r = compare(&t, &twin, &Tolerances::default()).unwrap();
    assert!(r.passed, "{}", r.render_text());
}

#[test]
fn rigid_offset_shows_as_position_rmse() {
    let t = base(Case::Case1);
    let mut moved = t.clone();
    let frame = vista_core::geo::LocalFrame::new(t.vut[0].pos);
    for s in &mut moved.vut {
        let [e, n] = frame.to_local(s.pos).unwrap();
        // 0.30 m to the right of the direction of travel
        let h = s.heading.radians();
        s.pos = frame.to_geo([e + 0.3 * h.cos(), n - 0.3 * h.sin()]).unwrap();
    }
    let r = compare(&t, &moved, &Tolerances::default()).unwrap();
    assert!((r.position_rmse - 0.30).abs() < 1e-3, "{}", r.position_rmse);
    assert_eq!(r.speed_rmse, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn comparison_is_symmetric(shift in -1.0f64..1.0, sigma in 0.0f64..0.3, seed in any::<u64>()) {
        let t = base(Case::Case1);
        let twin = perturb(&t, &Perturbation { position_sigma: sigma, speed_sigma: sigma, time_shift: shift, seed });
        let tol = Tolerances::default();
        let ab = compare(&t, &twin, &tol).unwrap();
        let ba = compare(&twin, &t, &tol).unwrap();
        prop_assert!((ab.offset + ba.offset).abs() < 1e-9);
        prop_assert!((ab.position_rmse - ba.position_rmse).abs() < 1e-9);
        prop_assert!((ab.speed_rmse - ba.speed_rmse).abs() < 1e-9);
        prop_assert!((ab.heading_rmse - ba.heading_rmse).abs() < 1e-9);
        prop_assert!((align(&t, &twin).unwrap() - shift).abs() <= 0.05 + sigma);
    }
}
