//! Fixed-size complex matrix algebra for N ∈ {2, 3}: SU(N) group and
//! algebra elements, the matrix exponential, Hermitian eigendecomposition,
//! polar decomposition and the adjugate.

mod eigen;
mod matrix;
mod polar;
mod su;

use thiserror::Error;

pub use eigen::{hermitian_eigen, HermitianEigen};
pub use matrix::{ComplexMatrix, MAX_N};
pub use polar::{polar_decompose, unitary_phase, PolarPair, MIN_SINGULAR_RATIO};
pub use su::{
    exp_algebra, generators, random_algebra, reunitarize, unitarity_error, AlgebraElement,
    SpecialUnitary, DRIFT_TOLERANCE,
};

pub use num_complex::Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatAlgError {
    #[error("matrix exponential argument too large or non-finite (norm {norm:e})")]
    ExpOverflow { norm: f64 },
    #[error("link is {deviation:e} away from the unitary manifold")]
    Drift { deviation: f64 },
    #[error("polar decomposition failed: singular value {singular_value:e} vs largest {largest:e}")]
    SingularLink { singular_value: f64, largest: f64 },
}

/// adj(Z), with Z·adj(Z) = det(Z)·1.
pub fn adjugate(z: &ComplexMatrix) -> ComplexMatrix {
    z.adjugate()
}
