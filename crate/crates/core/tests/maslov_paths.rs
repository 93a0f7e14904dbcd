use std::f64::consts::PI;

use nalgebra::DMatrix;
use theta_maslov::harness::{check_theta_count, run_path, HarnessOptions};
use theta_maslov::maslov::{rectangle_t, rectangle_theta, Backend, EngineOptions, MaslovEngine, Pairing, ParamPoint, PathSpec, Segment, Variable};
use theta_maslov::oracle::{count, lambda_infinity, OracleOptions};
use theta_maslov::potential::Potential;

fn free() -> Potential {
    Potential::free(1, (0.0, 2.0 * PI)).unwrap()
}

#[test]
fn free_theta_edge_has_one_crossing_of_index_two() {
    // (1 - θ/2π)² = 0.6 at θ* = 2π(1 - √0.6), inside (π/4, π/2).
    let pot = free();
    let seg = Segment::between("Γ2", Variable::Theta, ParamPoint { lambda: 0.6, theta: PI / 4.0, t: 1.0 }, PI / 2.0, 0.0).unwrap();
    let path = PathSpec::single(seg.clone());
    let engine = MaslovEngine::new(&pot, &path, Pairing::Doubled, EngineOptions::default()).unwrap();
    let cf = engine.segment_index(0, &seg, Backend::CrossingForm).unwrap();
    let sf = engine.segment_index(0, &seg, Backend::SpectralFlow).unwrap();
    assert_eq!(cf.index, 2);
    assert_eq!(sf.index, 2);
    assert_eq!(cf.crossings.len(), 1);
    let c = &cf.crossings[0];
    assert!((c.params.theta - 2.0 * PI * (1.0 - 0.6f64.sqrt())).abs() < 1e-8, "θ* = {}", c.params.theta);
    assert_eq!((c.dim_real, c.complex_kernel_dim), (2, 1));
}

#[test]
fn free_theta_count_identity_holds() {
    let rep = check_theta_count(&free(), PI / 4.0, PI / 2.0, 0.6, &HarnessOptions::default()).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert_eq!((rep.lhs, rep.rhs), (1.0, 1.0));
}

#[test]
fn closed_rectangles_have_zero_index() {
    let cases = [
        (free(), 0.3, 2.9, 1.7),
        (Potential::mathieu(2.0, (0.0, 2.0 * PI)).unwrap(), 0.5, 5.5, 2.2),
        (Potential::constant(DMatrix::from_row_slice(2, 2, &[0.3, 0.4, 0.4, -0.2]), (0.0, 2.0 * PI)).unwrap(), 1.0, 4.0, 1.3),
    ];
    for (pot, t1, t2, r) in cases {
        let path = rectangle_theta(&pot, t1, t2, r, lambda_infinity(&pot)).unwrap();
        let run = run_path(&pot, &path, Pairing::Doubled, &EngineOptions::default()).unwrap();
        assert!(run.backends_agree(), "{:?}", run.segments);
        assert_eq!(run.total(), 0, "{:?}", run.segments);
    }
}

#[test]
fn vertical_edges_count_eigenvalues_below_r() {
    let pot = Potential::mathieu(2.0, (0.0, 2.0 * PI)).unwrap();
    let (t1, t2, r) = (0.8, 2.6, 3.1);
    let path = rectangle_theta(&pot, t1, t2, r, lambda_infinity(&pot)).unwrap();
    let run = run_path(&pot, &path, Pairing::Doubled, &EngineOptions::default()).unwrap();
    let n1 = count(&pot, t1, 1.0, r, &OracleOptions::default()).unwrap() as i64;
    let n2 = count(&pot, t2, 1.0, r, &OracleOptions::default()).unwrap() as i64;
    assert_eq!(run.index(0), 2 * n1);
    assert_eq!(run.index(2), -2 * n2);
    assert_eq!(run.index(3), 0);
}

#[test]
fn square_well_conjugate_points() {
    // V = -5 on [-π, π] at θ = 0: H(t) has eigenvalues (k/t)² - 5, so
    // λ = 0 is hit at t = |k|/√5 with the double kernel of k = ±1, ±2.
    let pot = Potential::constant(DMatrix::from_element(1, 1, -5.0), (-PI, PI)).unwrap();
    let path = rectangle_t(&pot, 0.3, 0.0, lambda_infinity(&pot), 0.0).unwrap();
    let run = run_path(&pot, &path, Pairing::Relative, &EngineOptions::default()).unwrap();
    assert!(run.backends_agree());
    assert_eq!(run.total(), 0);
    let on_edge: Vec<_> = run.crossings.iter().filter(|c| c.segment_id == 1).collect();
    assert_eq!(on_edge.len(), 2);
    for (c, k) in on_edge.iter().zip([1.0, 2.0]) {
        assert!((c.params.t - k / 5f64.sqrt()).abs() < 1e-6, "t = {}", c.params.t);
        assert_eq!(c.complex_kernel_dim, 2);
        assert_eq!(c.dim_real, 4);
        assert!(c.form_eigenvalues.iter().all(|&e| e < 0.0), "{:?}", c.form_eigenvalues);
    }
    // ½ Mas(Σ₂) = N(0, τ) - N(0, 1) = 1 - 5.
    assert_eq!(run.index(1), -8);
}

#[test]
fn backends_agree_on_lambda_edges_with_multiple_crossings() {
    let pot = Potential::constant(DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 0.7]), (0.0, 2.0 * PI)).unwrap();
    let seg = Segment::between("Γ1", Variable::Lambda, ParamPoint { lambda: -2.0, theta: 1.3, t: 1.0 }, 6.0, -2.0).unwrap();
    let path = PathSpec::single(seg.clone());
    let engine = MaslovEngine::new(&pot, &path, Pairing::Relative, EngineOptions::default()).unwrap();
    let cf = engine.segment_index(0, &seg, Backend::CrossingForm).unwrap();
    let sf = engine.segment_index(0, &seg, Backend::SpectralFlow).unwrap();
    let n = count(&pot, 1.3, 1.0, 6.0, &OracleOptions::default()).unwrap() as i64;
    assert_eq!(cf.index, sf.index);
    assert_eq!(cf.index.abs(), 2 * n);
    assert_eq!(cf.crossings.len() as i64, n);
}
