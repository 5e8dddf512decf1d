//! Quantum-state data types, Hermitian linear algebra and the distance
//! measures used throughout the crate.

pub mod linalg;
pub mod metrics;
pub mod random;
pub mod state;

pub use linalg::{
    hermitian_eig, ComplexMatrix, ComplexVector, HermitianEigen, Tolerances, C64, TOL,
};
pub use metrics::{
    fidelity, helstrom_measurement, partial_trace, partial_trace_matrix, purity, score,
    target_state_purity, trace_distance,
};
pub use random::{random_density_matrix, random_pure_state};
pub use state::{DensityMatrix, PovmElement, PureState};
