mod common;

use common::*;
use qgan_core::convexqgan::{circuit_update_step, extreme_eigvec_d, ConvexState};
use qgan_core::qcore::linalg::{max_abs_diff, trace};
use qgan_core::qcore::{
    helstrom_measurement, random_density_matrix, ComplexMatrix, DensityMatrix, PovmElement,
};

#[test]
fn partial_trace_matches_index_sum() {
    assert!(partial_trace_oracle_error(200) <= 1e-10);
}

#[test]
fn swap_channel_matches_two_register_construction() {
    assert!(swap_channel_oracle_error(200) <= 1e-10);
}

#[test]
fn helstrom_score_is_trace_distance() {
    assert!(helstrom_identity_error(200) <= 1e-10);
}

#[test]
fn composed_swap_matches_closed_form() {
    assert!(composed_swap_error(200) <= 1e-10);
}

/// `(update(beta) - rho) / beta` extrapolated to `beta -> 0`, with the
/// projector used by the update.
fn first_order_limit(
    rho_g: &DensityMatrix,
    rho_r: &DensityMatrix,
) -> (ComplexMatrix, ComplexMatrix) {
    let state =
        ConvexState::new(rho_g.clone(), helstrom_measurement(rho_r, rho_g).unwrap()).unwrap();
    let h = extreme_eigvec_d(rho_r, rho_g).unwrap().projector();
    let slope = |beta: f64| {
        let out = circuit_update_step(&state, rho_r, beta).unwrap();
        (out.rho_g.mat() - rho_g.mat()) / qgan_core::qcore::C64::new(beta, 0.0)
    };
    let b = 1e-3;
    let lim = slope(b / 2.0) * qgan_core::qcore::C64::new(2.0, 0.0) - slope(b);
    (lim, h)
}

#[test]
fn circuit_update_first_order_term() {
    for seed in 0..10 {
        let rho_r = random_density_matrix(2, 4, seed).unwrap();
        let rho_g = random_density_matrix(2, 4, seed + 100).unwrap();
        let (lim, h) = first_order_limit(&rho_g, &rho_r);
        let rho = rho_g.mat();
        let half = qgan_core::qcore::C64::new(0.5, 0.0);
        let expected = &h - rho
            + (&h * rho + rho * &h - &h * rho * &h * qgan_core::qcore::C64::new(2.0, 0.0)) * half;
        assert!(max_abs_diff(&lim, &expected) < 1e-5, "seed {seed}");
        assert!(trace(&lim).norm() < 1e-8);
    }
}

#[test]
#[ignore = "the printed first-order term H + Hρ + ρH − 2HρH − ρ lacks a factor 1/2 on the commutator part; the exact map gives the term asserted above"]
fn circuit_update_first_order_printed_term() {
    let rho_r = random_density_matrix(2, 4, 3).unwrap();
    let rho_g = random_density_matrix(2, 4, 103).unwrap();
    let (lim, h) = first_order_limit(&rho_g, &rho_r);
    let rho = rho_g.mat();
    let printed =
        &h + &h * rho + rho * &h - &h * rho * &h * qgan_core::qcore::C64::new(2.0, 0.0) - rho;
    assert!(max_abs_diff(&lim, &printed) < 1e-5);
}

#[test]
fn helstrom_element_is_valid_povm() {
    for seed in 0..50 {
        let r = random_density_matrix(2, 1 + seed as usize % 4, seed).unwrap();
        let g = random_density_matrix(2, 4, seed + 7).unwrap();
        let pi = helstrom_measurement(&r, &g).unwrap();
        assert!(PovmElement::new(pi.mat().clone()).is_ok());
    }
}
