use super::linalg::{
    cr, hermitian_eig, hermiticity_defect, identity, is_power_of_two_dim, outer, pauli_x, pauli_y,
    pauli_z, trace, ComplexMatrix, ComplexVector, TOL,
};
use crate::{Error, Result};

fn qubits_for(dim: usize) -> Result<usize> {
    is_power_of_two_dim(dim)
        .ok_or_else(|| Error::Argument(format!("dimension {dim} is not 2^n with n >= 1")))
}

/// Normalized state vector on `n_qubits` qubits. Qubit 0 is the most
/// significant bit of the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: ComplexVector,
    n_qubits: usize,
}

impl PureState {
    pub fn new(amplitudes: ComplexVector) -> Result<Self> {
        let n_qubits = qubits_for(amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > TOL.norm {
            return Err(Error::Argument(format!("state norm {norm} is not 1")));
        }
        Ok(Self {
            amplitudes,
            n_qubits,
        })
    }

    /// Normalizes `amplitudes` before wrapping them.
    pub fn normalized(amplitudes: ComplexVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Argument("cannot normalize a zero vector".into()));
        }
        Self::new(amplitudes / cr(norm))
    }

    pub(crate) fn from_raw(amplitudes: ComplexVector) -> Self {
        let n_qubits = amplitudes.len().trailing_zeros() as usize;
        Self {
            amplitudes,
            n_qubits,
        }
    }

    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::Argument("need at least one qubit".into()));
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::Argument(format!("basis index {index} >= {dim}")));
        }
        let mut amps = ComplexVector::zeros(dim);
        amps[index] = cr(1.0);
        Ok(Self {
            amplitudes: amps,
            n_qubits,
        })
    }

    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> ComplexVector {
        self.amplitudes
    }

    pub fn projector(&self) -> ComplexMatrix {
        outer(&self.amplitudes)
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            mat: self.projector(),
            n_qubits: self.n_qubits,
        }
    }

    /// `<self|other>`
    pub fn inner(&self, other: &PureState) -> num_complex::Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    n_qubits: usize,
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity and unit trace at the default
    /// tolerances.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::Argument("density matrix must be square".into()));
        }
        let n_qubits = qubits_for(mat.nrows())?;
        let defect = hermiticity_defect(&mat);
        if defect > TOL.hermitian {
            return Err(Error::Argument(format!(
                "not Hermitian (defect {defect:e})"
            )));
        }
        let tr = trace(&mat);
        if (tr.re - 1.0).abs() > TOL.trace || tr.im.abs() > TOL.trace {
            return Err(Error::Argument(format!("trace {tr} is not 1")));
        }
        let eig = hermitian_eig(&mat)?;
        let min = eig.values.last().copied().unwrap_or(0.0);
        if min < -TOL.psd {
            return Err(Error::Argument(format!(
                "not positive semidefinite (min eigenvalue {min:e})"
            )));
        }
        Ok(Self { mat, n_qubits })
    }

    /// Wraps a matrix that is valid by construction. The Hermitian part is
    /// kept so rounding never accumulates anti-Hermitian drift.
    pub(crate) fn from_raw(mat: ComplexMatrix) -> Self {
        let n_qubits = mat.nrows().trailing_zeros() as usize;
        let mat = (&mat + mat.adjoint()) * cr(0.5);
        Self { mat, n_qubits }
    }

    /// Divides by the trace, then wraps.
    pub(crate) fn from_raw_normalized(mat: ComplexMatrix) -> Self {
        let tr = trace(&mat).re;
        Self::from_raw(mat / cr(tr))
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::Argument("need at least one qubit".into()));
        }
        let dim = 1usize << n_qubits;
        Ok(Self {
            mat: identity(dim) / cr(dim as f64),
            n_qubits,
        })
    }

    /// Single-qubit state `(I + r.sigma)/2`; requires `|r| <= 1`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        if norm > 1.0 + TOL.psd {
            return Err(Error::Argument(format!(
                "Bloch vector norm {norm} exceeds 1"
            )));
        }
        Ok(Self::from_raw(bloch_operator(1.0, r)))
    }

    /// Bloch vector `(Tr[rho X], Tr[rho Y], Tr[rho Z])` of a single-qubit state.
    pub fn bloch_vector(&self) -> Option<[f64; 3]> {
        if self.n_qubits != 1 {
            return None;
        }
        let m = &self.mat;
        Some([
            2.0 * m[(0, 1)].re,
            -2.0 * m[(0, 1)].im,
            (m[(0, 0)] - m[(1, 1)]).re,
        ])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> ComplexMatrix {
        self.mat
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eig(&self.mat)
            .map(|e| e.values.last().copied().unwrap_or(0.0))
            .unwrap_or(f64::NAN)
    }
}

/// Hermitian operator with spectrum in `[0, 1]`: one element of a
/// two-outcome POVM.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmElement {
    mat: ComplexMatrix,
    n_qubits: usize,
}

impl PovmElement {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::Argument("POVM element must be square".into()));
        }
        let n_qubits = qubits_for(mat.nrows())?;
        let defect = hermiticity_defect(&mat);
        if defect > TOL.hermitian {
            return Err(Error::Argument(format!(
                "not Hermitian (defect {defect:e})"
            )));
        }
        let eig = hermitian_eig(&mat)?;
        let max = eig.values[0];
        let min = *eig.values.last().unwrap();
        if min < -TOL.psd || max > 1.0 + TOL.psd {
            return Err(Error::Argument(format!(
                "spectrum [{min}, {max}] not inside [0, 1]"
            )));
        }
        Ok(Self { mat, n_qubits })
    }

    pub(crate) fn from_raw(mat: ComplexMatrix) -> Self {
        let n_qubits = mat.nrows().trailing_zeros() as usize;
        let mat = (&mat + mat.adjoint()) * cr(0.5);
        Self { mat, n_qubits }
    }

    pub fn identity(n_qubits: usize) -> Result<Self> {
        Self::scaled_identity(n_qubits, 1.0)
    }

    /// `w * I` for `w` in `[0, 1]`.
    pub fn scaled_identity(n_qubits: usize, w: f64) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::Argument("need at least one qubit".into()));
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::Argument(format!("weight {w} outside [0, 1]")));
        }
        let dim = 1usize << n_qubits;
        Ok(Self {
            mat: identity(dim) * cr(w),
            n_qubits,
        })
    }

    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::scaled_identity(n_qubits, 0.0)
    }

    /// Single-qubit element `(d0 I + d.sigma)/2`.
    pub fn from_bloch(d0: f64, d: [f64; 3]) -> Result<Self> {
        Self::new(bloch_operator(d0, d))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> ComplexMatrix {
        self.mat
    }

    /// Eigenvalues, descending.
    pub fn spectrum(&self) -> Vec<f64> {
        hermitian_eig(&self.mat)
            .map(|e| e.values)
            .unwrap_or_default()
    }
}

/// `(a0 I + a.sigma)/2`
pub fn bloch_operator(a0: f64, a: [f64; 3]) -> ComplexMatrix {
    (identity(2) * cr(a0) + pauli_x() * cr(a[0]) + pauli_y() * cr(a[1]) + pauli_z() * cr(a[2]))
        * cr(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::linalg::c;

    #[test]
    fn validation_rejects_bad_matrices() {
        let not_unit = identity(2);
        assert!(DensityMatrix::new(not_unit).is_err());
        let negative = ComplexMatrix::from_row_slice(2, 2, &[cr(1.5), cr(0.0), cr(0.0), cr(-0.5)]);
        assert!(DensityMatrix::new(negative).is_err());
        let skew =
            ComplexMatrix::from_row_slice(2, 2, &[cr(0.5), c(0.0, 0.1), c(0.0, 0.1), cr(0.5)]);
        assert!(DensityMatrix::new(skew).is_err());
        let three = ComplexMatrix::identity(3, 3) / cr(3.0);
        assert!(DensityMatrix::new(three).is_err());
    }

    #[test]
    fn povm_spectrum_bounds() {
        assert!(PovmElement::new(identity(2)).is_ok());
        assert!(PovmElement::new(identity(2) * cr(1.01)).is_err());
        assert!(PovmElement::from_bloch(1.0, [0.0, 0.0, 1.0]).is_ok());
        assert!(PovmElement::from_bloch(0.5, [0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn bloch_round_trip() {
        let rho = DensityMatrix::from_bloch([0.3, -0.2, 0.5]).unwrap();
        let r = rho.bloch_vector().unwrap();
        assert!((r[0] - 0.3).abs() < 1e-15);
        assert!((r[1] + 0.2).abs() < 1e-15);
        assert!((r[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pure_state_norm_checked() {
        let v = ComplexVector::from_vec(vec![cr(1.0), cr(1.0)]);
        assert!(PureState::new(v.clone()).is_err());
        let s = PureState::normalized(v).unwrap();
        assert!((s.amplitudes().norm() - 1.0).abs() < 1e-15);
        assert!(PureState::basis(2, 4).is_err());
    }
}
