//! Seeded random states. Every generator draws from a ChaCha8 stream keyed
//! by the caller's seed, so outputs are reproducible across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::linalg::{c, ComplexMatrix, ComplexVector};
use super::state::{DensityMatrix, PureState};
use crate::{Error, Result};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng) -> num_complex::Complex64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Normalized vector of i.i.d. complex Gaussians.
pub fn random_pure_state_with(n_qubits: usize, rng: &mut impl Rng) -> Result<PureState> {
    if n_qubits == 0 {
        return Err(Error::Argument("need at least one qubit".into()));
    }
    let dim = 1usize << n_qubits;
    PureState::normalized(ComplexVector::from_fn(dim, |_, _| gaussian(rng)))
}

pub fn random_pure_state(n_qubits: usize, seed: u64) -> Result<PureState> {
    random_pure_state_with(n_qubits, &mut rng_from_seed(seed))
}

/// Ginibre construction `G G^dagger / Tr(G G^dagger)` with `G` a
/// `2^n x rank` matrix of standard complex Gaussians.
pub fn random_density_matrix_with(
    n_qubits: usize,
    rank: usize,
    rng: &mut impl Rng,
) -> Result<DensityMatrix> {
    if n_qubits == 0 {
        return Err(Error::Argument("need at least one qubit".into()));
    }
    let dim = 1usize << n_qubits;
    if rank == 0 || rank > dim {
        return Err(Error::Argument(format!("rank {rank} outside 1..={dim}")));
    }
    let g = ComplexMatrix::from_fn(dim, rank, |_, _| gaussian(rng));
    Ok(DensityMatrix::from_raw_normalized(&g * g.adjoint()))
}

pub fn random_density_matrix(n_qubits: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_matrix_with(n_qubits, rank, &mut rng_from_seed(seed))
}
