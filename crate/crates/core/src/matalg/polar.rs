use num_complex::Complex64;

use super::{hermitian_eigen, ComplexMatrix, MatAlgError};

/// Smallest admissible ratio σ_min/σ_max for [`polar_decompose`].
pub const MIN_SINGULAR_RATIO: f64 = 1e-10;

/// Factors of Z = √c·W·U.
#[derive(Clone, Copy, Debug)]
pub struct PolarPair {
    /// Hermitian positive-definite factor.
    pub w: ComplexMatrix,
    /// Unitary factor; its determinant is a free phase.
    pub u: ComplexMatrix,
}

impl PolarPair {
    /// √c·W·U
    pub fn reconstruct(&self, c: f64) -> ComplexMatrix {
        (self.w * self.u).scale(c.sqrt())
    }
}

/// Splits a complex link Z into Z = √c·W·U with W = √(ZZ†/c) and U = W⁻¹Z/√c.
pub fn polar_decompose(z: &ComplexMatrix, c: f64) -> Result<PolarPair, MatAlgError> {
    assert!(c > 0.0, "polar_decompose needs c > 0");
    let n = z.n();
    let eig = hermitian_eigen(&(*z * z.adjoint()));
    let lambda_max = eig.values[n - 1].max(0.0);
    let lambda_min = eig.values[0].max(0.0);
    let sigma_max = lambda_max.sqrt();
    let sigma_min = lambda_min.sqrt();
    if !(sigma_min > MIN_SINGULAR_RATIO * sigma_max) || !sigma_max.is_finite() {
        return Err(MatAlgError::SingularLink { singular_value: sigma_min, largest: sigma_max });
    }
    let w = eig.map_values(|l| (l / c).sqrt());
    let w_inv = eig.map_values(|l| (c / l).sqrt());
    let mut u = (w_inv * *z).scale(1.0 / c.sqrt());
    // Newton–Schulz polish; the eigensolver leaves U unitary only to ~κ(Z)²·ε.
    let three = ComplexMatrix::identity(n).scale(3.0);
    for _ in 0..2 {
        u = (u * (three - u.adjoint() * u)).scale(0.5);
    }
    // W is Hermitian by construction; remove rounding asymmetry.
    let w = w.hermitian_part();
    Ok(PolarPair { w, u })
}

/// det U of the unitary polar factor, computed without forming U:
/// det Z / |det Z|.
pub fn unitary_phase(z: &ComplexMatrix) -> Option<Complex64> {
    let d = z.det();
    let r = d.norm();
    (r > 0.0).then(|| d / r)
}
