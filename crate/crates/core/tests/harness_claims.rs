use std::f64::consts::PI;

use nalgebra::DMatrix;
use theta_maslov::harness::*;
use theta_maslov::potential::{Potential, PotentialSpec};

fn well() -> Potential {
    Potential::constant(DMatrix::from_element(1, 1, -5.0), (-PI, PI)).unwrap()
}

#[test]
fn souriau_identity_on_random_pairs() {
    for (m, seed) in [(2, 0), (4, 1), (8, 2)] {
        let rep = check_souriau_kernel(m, 100, seed).unwrap();
        assert!(rep.pass, "{rep:?}");
    }
}

#[test]
fn square_well_morse_difference_is_four() {
    let opts = HarnessOptions::default();
    assert_eq!(morse_hypothesis(&well(), 0.3).unwrap(), MorseCase::NonPositivePotential);
    let rep = check_morse_index(&well(), 0.3, 0.0, &opts).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert_eq!(rep.lhs, 4.0);
    let counted = check_rescaled_count(&well(), 0.3, 0.0, 0.0, &opts).unwrap();
    assert!(counted.pass, "{counted:?}");
    assert_eq!(counted.lhs, -4.0);
    assert!(check_realification(&counted.crossings).pass);
}

#[test]
fn unit_scaling_changes_nothing() {
    let rep = check_rescaled_count(&well(), 1.0, 0.0, 0.0, &HarnessOptions::default()).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert_eq!((rep.lhs, rep.rhs), (0.0, 0.0));
}

#[test]
fn indefinite_form_is_a_rejected_hypothesis() {
    let pot = Potential::mathieu(2.0, (-PI, PI)).unwrap();
    assert!(matches!(morse_hypothesis(&pot, 0.4), Err(theta_maslov::Error::Hypothesis(_))));
    let lopsided = Potential::free(1, (0.0, 1.0)).unwrap();
    assert!(morse_hypothesis(&lopsided, 0.5).is_err());
}

#[test]
fn positive_forms_count_the_other_way() {
    // V = 4 has 2tV(tx) = 8t > 0; Mor(H(τ)) - Mor(H) counts conjugate
    // points at λ = 0, of which there are none because H(t) ≥ 4.
    let pot = Potential::constant(DMatrix::from_element(1, 1, 4.0), (-PI, PI)).unwrap();
    assert_eq!(morse_hypothesis(&pot, 0.5).unwrap(), MorseCase::PositiveForm);
    let rep = check_morse_index(&pot, 0.5, 0.0, &HarnessOptions::default()).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert_eq!(rep.lhs, 0.0);
}

#[test]
fn interval_counts_along_theta_and_t() {
    let opts = HarnessOptions::default();
    let pot = Potential::mathieu(2.0, (0.0, 2.0 * PI)).unwrap();
    let rep = check_theta_interval_count(&pot, 0.4, 2.7, -0.3, 2.4, &opts).unwrap();
    assert!(rep.pass, "{rep:?}");
    let rep = check_rescaled_interval_count(&well(), 0.3, 0.0, -3.0, 0.5, &opts).unwrap();
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn count_bounds_hold_for_two_channels() {
    let pot = Potential::diagonal_cosine(vec![0.0, 0.5], vec![1.0, -1.5], vec![1.0, 2.0], (0.0, 2.0 * PI)).unwrap();
    let reps = check_count_bounds(&pot, &[0.2, 1.9], &HarnessOptions::default()).unwrap();
    assert!(!reps.is_empty());
    for r in reps {
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn configured_potential_without_symmetric_interval_is_rejected_not_failed() {
    let ctx = SuiteContext {
        potential: Some(PotentialSpec::Mathieu { amplitude: 1.0, n: 1, interval: (-PI, PI) }),
        ..SuiteContext::default()
    };
    let rep = run_suite(Suite::Morse, &ctx);
    assert_eq!(rep.failed(), 0, "{:?}", rep.reports.iter().filter(|r| !r.pass).collect::<Vec<_>>());
    assert!(!rep.rejected.is_empty());
    assert_eq!(rep.exit_code(), 2);
}

#[test]
fn free_suite_passes() {
    let rep = run_suite(Suite::Free, &SuiteContext::default());
    assert_eq!(rep.exit_code(), 0);
    assert_eq!(rep.passed(), 6);
}
