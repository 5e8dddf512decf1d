mod common;

use common::*;
use qgan_core::gradients::{finite_difference_gradient, parameter_shift_gradient};

#[test]
fn parameter_shift_matches_finite_differences() {
    let err = gradient_check_error(100);
    assert!(err < 1e-6, "worst deviation {err:e}");
}

#[test]
fn every_family_is_covered() {
    assert_eq!(ansatz_families().len(), 8);
}

#[test]
fn shift_is_exact_for_single_rotation_cosine() {
    let obj = |t: &[f64]| -> qgan_core::Result<f64> { Ok(t[0].cos() + 0.5 * t[1].sin()) };
    let theta = [0.3, -1.2];
    let ps = parameter_shift_gradient(&obj, &theta).unwrap();
    assert!((ps[0] + 0.3f64.sin()).abs() < 1e-15);
    assert!((ps[1] - 0.5 * (-1.2f64).cos()).abs() < 1e-15);
    assert!(finite_difference_gradient(&obj, &theta, 0.0).is_err());
}
