use super::linalg::{
    c, cr, hermitian_eig, outer, trace_of_product, ComplexMatrix, HermitianEigen, TOL,
};
use super::state::{DensityMatrix, PovmElement};
use crate::error::check_dims;
use crate::{Error, Result};

/// Traces out every qubit not listed in `keep`, operating on a raw
/// `2^n x 2^n` matrix. Kept qubits appear in ascending index order.
pub fn partial_trace_matrix(
    m: &ComplexMatrix,
    n_qubits: usize,
    keep: &[usize],
) -> Result<ComplexMatrix> {
    if keep.is_empty() {
        return Err(Error::Argument("keep set is empty".into()));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() {
        return Err(Error::Argument("keep set has duplicate qubits".into()));
    }
    if let Some(&q) = kept.iter().find(|&&q| q >= n_qubits) {
        return Err(Error::Argument(format!(
            "qubit {q} out of range for {n_qubits} qubits"
        )));
    }
    let traced: Vec<usize> = (0..n_qubits).filter(|q| !kept.contains(q)).collect();
    let bit = |q: usize| 1usize << (n_qubits - 1 - q);
    let spread = |qubits: &[usize], value: usize| -> usize {
        let k = qubits.len();
        qubits
            .iter()
            .enumerate()
            .filter(|(i, _)| value >> (k - 1 - i) & 1 == 1)
            .map(|(_, &q)| bit(q))
            .sum()
    };

    let out_dim = 1usize << kept.len();
    let env_dim = 1usize << traced.len();
    let kept_offsets: Vec<usize> = (0..out_dim).map(|i| spread(&kept, i)).collect();
    let env_offsets: Vec<usize> = (0..env_dim).map(|e| spread(&traced, e)).collect();
    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    for (i, &ri) in kept_offsets.iter().enumerate() {
        for (j, &rj) in kept_offsets.iter().enumerate() {
            out[(i, j)] = env_offsets.iter().map(|&e| m[(ri | e, rj | e)]).sum();
        }
    }
    Ok(out)
}

/// Reduced state on the qubits in `keep`.
pub fn partial_trace(state: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let m = partial_trace_matrix(state.mat(), state.n_qubits(), keep)?;
    Ok(DensityMatrix::from_raw(m))
}

/// `1/2 ||a - b||_1`, clamped to `[0, 1]`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    let eig = hermitian_eig(&(a.mat() - b.mat()))?;
    let d = 0.5 * eig.values.iter().map(|x| x.abs()).sum::<f64>();
    Ok(d.clamp(0.0, 1.0))
}

/// Squared Uhlmann fidelity `(Tr |sqrt(a) sqrt(b)|)^2`, from the singular
/// values of `sqrt(a) sqrt(b)`, clamped to `[0, 1]`. Eigenvalues at or below
/// `TOL.eig_zero` are dropped from the square roots.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    let root = |m: &ComplexMatrix| -> Result<ComplexMatrix> {
        Ok(hermitian_eig(m)?.spectral_map(|x| if x > TOL.eig_zero { x.sqrt() } else { 0.0 }))
    };
    let prod = root(a.mat())? * root(b.mat())?;
    let root_trace: f64 = prod.singular_values().iter().sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

/// `Tr[rho^2]`
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.mat().iter().map(|z| z.norm_sqr()).sum()
}

/// Real part of `Tr[a b]` after checking the imaginary residue.
pub(crate) fn real_trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let t = trace_of_product(a, b);
    if t.im.abs() > TOL.imag {
        return Err(Error::Precondition(format!(
            "trace {t} should be real (imaginary residue above {:e})",
            TOL.imag
        )));
    }
    Ok(t.re)
}

/// The zero-sum score `Tr[pi_d (rho_r - rho_g)]`.
pub fn score(pi_d: &PovmElement, rho_g: &DensityMatrix, rho_r: &DensityMatrix) -> Result<f64> {
    check_dims(pi_d.dim(), rho_g.dim())?;
    check_dims(pi_d.dim(), rho_r.dim())?;
    real_trace_of_product(pi_d.mat(), &(rho_r.mat() - rho_g.mat()))
}

/// Projector onto the positive eigenspace of `rho_r - rho_g`. Eigenvalues
/// with `|lambda| <= 1e-12` go to the negative side.
pub fn helstrom_measurement(rho_r: &DensityMatrix, rho_g: &DensityMatrix) -> Result<PovmElement> {
    check_dims(rho_r.dim(), rho_g.dim())?;
    let eig = hermitian_eig(&(rho_r.mat() - rho_g.mat()))?;
    Ok(PovmElement::from_raw(positive_projector(&eig)))
}

pub(crate) fn positive_projector(eig: &HermitianEigen) -> ComplexMatrix {
    let n = eig.dim();
    eig.values
        .iter()
        .zip(&eig.vectors)
        .filter(|(lambda, _)| **lambda > TOL.eig_zero)
        .fold(ComplexMatrix::zeros(n, n), |acc, (_, v)| acc + outer(v))
}

/// `I/2 + a/(2 sqrt 2) (X + Y)` with `a = sqrt(2p - 1)`, the single-qubit
/// state of purity `p` on the Bloch equator along `(x + y)/sqrt 2`.
pub fn target_state_purity(p: f64) -> Result<DensityMatrix> {
    if !(0.5..=1.0).contains(&p) {
        return Err(Error::Argument(format!("purity {p} outside [0.5, 1]")));
    }
    let a = (2.0 * p - 1.0).sqrt();
    let k = a / (2.0 * std::f64::consts::SQRT_2);
    let m = ComplexMatrix::from_row_slice(2, 2, &[cr(0.5), c(k, -k), c(k, k), cr(0.5)]);
    Ok(DensityMatrix::from_raw(m))
}
