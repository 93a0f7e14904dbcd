mod common;

use std::f64::consts::PI;

use common::hill_slope;
use theta_maslov::harness::{check_monotonicity, check_slope_formula, coupled_spec, HarnessOptions};
use theta_maslov::oracle::{dlambda_dtheta, eigencurve, wronskian_check, OracleOptions};
use theta_maslov::potential::Potential;

#[test]
fn free_slope_matches_closed_form() {
    let pot = Potential::free(1, (0.0, 2.0 * PI)).unwrap();
    let curve = eigencurve(&pot, 0, (0.1, PI - 0.1), 19, &OracleOptions::default()).unwrap();
    for p in &curve {
        let s = dlambda_dtheta(&pot, p, &OracleOptions::default()).unwrap();
        let exact = p.theta / (2.0 * PI * PI);
        assert!((s.boundary - exact).abs() <= 1e-8, "θ = {}: {} vs {exact}", p.theta, s.boundary);
        assert!((s.crossing_form - exact).abs() <= 1e-8);
        assert!((s.finite_difference - exact).abs() <= 1e-5 * exact);
    }
    let mid = eigencurve(&pot, 0, (PI / 2.0, PI / 2.0 + 0.1), 1, &OracleOptions::default()).unwrap();
    let s = dlambda_dtheta(&pot, &mid[0], &OracleOptions::default()).unwrap();
    assert!((s.boundary - 1.0 / (4.0 * PI)).abs() < 1e-10);
    assert!((s.boundary - 0.0795775).abs() < 1e-7);
}

#[test]
fn mathieu_slopes_match_galerkin_hellmann_feynman() {
    let pot = Potential::mathieu(2.0, (0.0, 2.0 * PI)).unwrap();
    for k in 0..2 {
        let curve = eigencurve(&pot, k, (0.1, PI - 0.1), 19, &OracleOptions::default()).unwrap();
        for p in &curve {
            let s = dlambda_dtheta(&pot, p, &OracleOptions::default()).unwrap();
            let reference = hill_slope(2.0, p.theta, k);
            let scale = reference.abs().max(1e-3);
            for v in [s.boundary, s.crossing_form, s.finite_difference] {
                assert!((v - reference).abs() <= 1e-5 * scale, "k = {k}, θ = {}: {v} vs {reference}", p.theta);
            }
        }
    }
}

#[test]
fn three_way_agreement_on_the_required_presets() {
    let opts = HarnessOptions::default();
    for pot in [Potential::free(1, (0.0, 2.0 * PI)).unwrap(), Potential::mathieu(2.0, (0.0, 2.0 * PI)).unwrap()] {
        for k in 0..2 {
            let rep = check_slope_formula(&pot, k, (0.1, PI - 0.1), 20, &opts).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
    }
}

#[test]
fn scalar_branches_are_monotone_with_nonzero_wronskian() {
    let opts = HarnessOptions::default();
    for pot in [
        Potential::free(1, (0.0, 2.0 * PI)).unwrap(),
        Potential::mathieu(2.0, (0.0, 2.0 * PI)).unwrap(),
        Potential::diagonal_cosine(vec![0.3], vec![-1.2], vec![2.0], (0.0, 2.0 * PI)).unwrap(),
    ] {
        for k in 0..3 {
            let rep = check_monotonicity(&pot, k, (0.05, PI - 0.05), 40, &opts).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
    }
    let pot = Potential::mathieu(2.0, (0.0, 2.0 * PI)).unwrap();
    for p in eigencurve(&pot, 1, (0.2, 3.0), 8, &OracleOptions::default()).unwrap() {
        let w = wronskian_check(&p).unwrap();
        assert!(w.norm() > 1e-10);
    }
}

#[test]
fn coupled_channels_have_a_critical_point_with_zero_pairing() {
    let pot = coupled_spec(0.3).build().unwrap();
    let rep = check_monotonicity(&pot, 2, (0.1, PI - 0.1), 40, &HarnessOptions::default()).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert!(rep.notes.iter().any(|n| n.starts_with("critical point")), "{:?}", rep.notes);
}

#[test]
fn coarse_sampling_stays_on_the_branch() {
    // One step of nearly π: a linear predictor from θ = 0.1 overshoots onto
    // the neighbouring branch unless the step is subdivided.
    let pot = Potential::free(1, (0.0, 2.0 * PI)).unwrap();
    for k in 0..3 {
        let curve = eigencurve(&pot, k, (0.1, PI - 0.1), 1, &OracleOptions::default()).unwrap();
        for p in curve {
            let q = p.theta / (2.0 * PI);
            let exact = [q * q, (1.0 - q).powi(2), (1.0 + q).powi(2)][k];
            assert!((p.lambda - exact).abs() < 1e-9, "branch {k} at {}: {} vs {exact}", p.theta, p.lambda);
        }
    }
}
