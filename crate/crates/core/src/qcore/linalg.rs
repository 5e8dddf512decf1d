//! Dense complex linear algebra on small Hermitian operators.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

pub type C64 = Complex64;
/// Square complex matrix, dimension `2^n` in every quantum use.
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Numerical tolerances shared by validation, eigensolver tie rules and
/// property tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max-entry deviation allowed between a matrix and its adjoint.
    pub hermitian: f64,
    /// Most negative eigenvalue tolerated for PSD operators.
    pub psd: f64,
    /// Allowed deviation of a density-matrix trace from one.
    pub trace: f64,
    /// Allowed deviation of a pure-state norm from one.
    pub norm: f64,
    /// Eigenvalues with magnitude at or below this count as zero; also the
    /// gap below which eigenvalues are treated as degenerate.
    pub eig_zero: f64,
    /// Largest imaginary residue discarded when a trace should be real.
    pub imag: f64,
}

pub const TOL: Tolerances = Tolerances {
    hermitian: 1e-10,
    psd: 1e-10,
    trace: 1e-10,
    norm: 1e-10,
    eig_zero: 1e-12,
    imag: 1e-10,
};

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[cr(0.0), c(0.0, -1.0), c(0.0, 1.0), cr(0.0)])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)])
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// `|v><v|`
pub fn outer(v: &ComplexVector) -> ComplexMatrix {
    v * v.adjoint()
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// `Tr[a b]` without forming the product.
pub fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

/// Largest entry-wise deviation `max |m - m^dagger|`.
pub fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(m + m^dagger) / 2`
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * cr(0.5)
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn is_power_of_two_dim(dim: usize) -> Option<usize> {
    if dim >= 2 && dim.is_power_of_two() {
        Some(dim.trailing_zeros() as usize)
    } else {
        None
    }
}

/// Spectral decomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted in descending order. Eigenvectors are brought to a
/// canonical form so that repeated runs (and different solvers) agree:
///
/// * inside a degenerate cluster (eigenvalue gap at most [`Tolerances::eig_zero`]
///   relative to the spectral scale) the solver basis is replaced by the
///   Gram-Schmidt orthonormalization of the projected computational basis
///   vectors, picking at each step the basis vector with the largest residual
///   and preferring the lowest index on ties;
/// * every vector is rephased so that its first entry of magnitude above
///   `1e-8` is real and positive.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<ComplexVector>,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `sum_i f(lambda_i) |v_i><v_i|`
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (lambda, v) in self.values.iter().zip(&self.vectors) {
            let w = f(*lambda);
            if w != 0.0 {
                out += outer(v) * cr(w);
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.spectral_map(|x| x)
    }
}

pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::Precondition(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let defect = hermiticity_defect(m);
    if defect > TOL.hermitian {
        return Err(Error::Precondition(format!(
            "matrix is not Hermitian (defect {defect:e})"
        )));
    }
    let n = m.nrows();
    let eig = hermitian_part(m).symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let raw: Vec<ComplexVector> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();

    let scale = values.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let gap = TOL.eig_zero * scale;
    let mut vectors = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end - 1] - values[end] <= gap {
            end += 1;
        }
        if end - start == 1 {
            vectors.push(rephase(raw[start].clone()));
        } else {
            vectors.extend(canonical_basis(&raw[start..end]));
        }
        start = end;
    }
    Ok(HermitianEigen { values, vectors })
}

/// Deterministic orthonormal basis of the span of `cluster`.
fn canonical_basis(cluster: &[ComplexVector]) -> Vec<ComplexVector> {
    let n = cluster[0].len();
    let k = cluster.len();
    let projector = cluster
        .iter()
        .fold(ComplexMatrix::zeros(n, n), |acc, v| acc + outer(v));
    let mut basis: Vec<ComplexVector> = Vec::with_capacity(k);
    let mut used = vec![false; n];
    while basis.len() < k {
        let mut best: Option<(usize, ComplexVector, f64)> = None;
        for j in (0..n).filter(|&j| !used[j]) {
            let mut w = projector.column(j).into_owned();
            // two passes of classical Gram-Schmidt for stability
            for _ in 0..2 {
                for u in &basis {
                    let overlap = u.dotc(&w);
                    w -= u * overlap;
                }
            }
            let norm = w.norm();
            let better = match &best {
                None => true,
                Some((_, _, b)) => norm > b * (1.0 + 1e-12),
            };
            if better {
                best = Some((j, w, norm));
            }
        }
        let (j, w, norm) = best.expect("cluster rank exceeds dimension");
        used[j] = true;
        basis.push(rephase(w / cr(norm)));
    }
    basis
}

fn rephase(mut v: ComplexVector) -> ComplexVector {
    if let Some(pivot) = v.iter().find(|z| z.norm() > 1e-8).copied() {
        let phase = pivot.conj() / cr(pivot.norm());
        v *= phase;
    }
    v
}
