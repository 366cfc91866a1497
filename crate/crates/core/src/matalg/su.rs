use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::Deref;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{ComplexMatrix, MatAlgError};

/// Tolerance on ‖U†U − 1‖_max accepted by [`reunitarize`].
pub const DRIFT_TOLERANCE: f64 = 1e-6;

/// Largest ‖sX‖_F for which the exponential is attempted.
const EXP_NORM_LIMIT: f64 = 1e6;

/// Element of SU(N).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpecialUnitary(ComplexMatrix);

/// Traceless anti-Hermitian matrix, an element of su(N).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlgebraElement(ComplexMatrix);

impl Deref for SpecialUnitary {
    type Target = ComplexMatrix;
    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

impl Deref for AlgebraElement {
    type Target = ComplexMatrix;
    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

impl SpecialUnitary {
    pub fn identity(n: usize) -> Self {
        Self(ComplexMatrix::identity(n))
    }

    /// Wraps a matrix the caller knows to be in SU(N).
    pub fn from_matrix_unchecked(m: ComplexMatrix) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> ComplexMatrix {
        self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// ‖U†U − 1‖_max.
    pub fn unitarity_error(&self) -> f64 {
        unitarity_error(&self.0)
    }

    /// |det U − 1|.
    pub fn det_error(&self) -> f64 {
        (self.0.det() - 1.0).norm()
    }

    pub fn dagger(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Group product; rounding drift is not removed.
    pub fn compose(&self, rhs: &SpecialUnitary) -> Self {
        Self(self.0 * rhs.0)
    }

    /// Center element e^{2πik/N}·1.
    pub fn center(n: usize, k: i64) -> Self {
        let phase = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64);
        Self(ComplexMatrix::scalar(n, phase))
    }

    /// Haar-distributed random element (QR of a complex Gaussian matrix).
    pub fn random_haar<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        loop {
            let g = ComplexMatrix::random_gaussian(rng, n);
            let mut q = ComplexMatrix::zeros(n);
            let mut ok = true;
            // modified Gram-Schmidt over columns
            for j in 0..n {
                let mut v: Vec<Complex64> = (0..n).map(|i| g.get(i, j)).collect();
                for k in 0..j {
                    let proj: Complex64 = (0..n).map(|i| q.get(i, k).conj() * v[i]).sum();
                    for (i, vi) in v.iter_mut().enumerate() {
                        *vi -= proj * q.get(i, k);
                    }
                }
                let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if norm < 1e-8 {
                    ok = false;
                    break;
                }
                for (i, vi) in v.iter().enumerate() {
                    q.set(i, j, vi / norm);
                }
            }
            if !ok {
                continue;
            }
            let phase = q.det().arg();
            let q = q.scale_c(Complex64::from_polar(1.0, -phase / n as f64));
            if let Ok(u) = reunitarize(&q) {
                return u;
            }
        }
    }

    /// exp(s·X) for a random algebra element X; a cheap near-identity generator.
    pub fn random_near_identity<R: Rng + ?Sized>(rng: &mut R, n: usize, spread: f64) -> Self {
        let x = random_algebra(rng, n);
        exp_algebra(&x, spread).expect("bounded random algebra element")
    }
}

impl AlgebraElement {
    pub fn zero(n: usize) -> Self {
        Self(ComplexMatrix::zeros(n))
    }

    pub fn from_matrix_unchecked(m: ComplexMatrix) -> Self {
        Self(m)
    }

    /// Traceless anti-Hermitian part of an arbitrary matrix,
    /// (M − M†)/2 − Tr(M − M†)/(2N)·1.
    pub fn project(m: &ComplexMatrix) -> Self {
        let n = m.n();
        let mut a = (*m - m.adjoint()).scale(0.5);
        let tr = a.trace() / n as f64;
        for i in 0..n {
            a.set(i, i, a.get(i, i) - tr);
        }
        Self(a)
    }

    pub fn matrix(&self) -> ComplexMatrix {
        self.0
    }

    /// self += s·other
    #[inline]
    pub fn add_scaled(&mut self, s: f64, other: &AlgebraElement) {
        self.0.axpy(s, &other.0);
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }

    /// Half the squared norm, ½ Σ_a p_a² = ½ Tr(X X†).
    pub fn kinetic(&self) -> f64 {
        0.5 * self.0.norm_sqr()
    }

    /// Coordinates p_a = Re Tr(T_a† X) in the orthonormal generator basis.
    pub fn coordinates(&self) -> Vec<f64> {
        generators(self.n())
            .iter()
            .map(|t| t.0.adjoint().re_trace_mul(&self.0))
            .collect()
    }

    /// Inner product Re Tr(A† B).
    pub fn dot(&self, other: &AlgebraElement) -> f64 {
        self.0.adjoint().re_trace_mul(&other.0)
    }

    /// max(‖X + X†‖_max, |Tr X|).
    pub fn algebra_error(&self) -> f64 {
        (self.0 + self.0.adjoint()).max_abs().max(self.0.trace().norm())
    }
}

/// ‖M†M − 1‖_max
pub fn unitarity_error(m: &ComplexMatrix) -> f64 {
    (m.adjoint() * *m).max_diff(&ComplexMatrix::identity(m.n()))
}

/// Orthonormal basis of su(N) with Tr(T_a T_b†) = δ_ab.
///
/// Ordering: for each pair i < j the symmetric then antisymmetric
/// off-diagonal generator, followed by the N − 1 diagonal ones.
pub fn generators(n: usize) -> Vec<AlgebraElement> {
    let i_unit = Complex64::new(0.0, 1.0);
    let mut out = Vec::with_capacity(n * n - 1);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut sym = ComplexMatrix::zeros(n);
            sym.set(i, j, i_unit * FRAC_1_SQRT_2);
            sym.set(j, i, i_unit * FRAC_1_SQRT_2);
            out.push(AlgebraElement(sym));
            let mut asym = ComplexMatrix::zeros(n);
            asym.set(i, j, Complex64::new(FRAC_1_SQRT_2, 0.0));
            asym.set(j, i, Complex64::new(-FRAC_1_SQRT_2, 0.0));
            out.push(AlgebraElement(asym));
        }
    }
    for k in 1..n {
        let norm = 1.0 / ((k * (k + 1)) as f64).sqrt();
        let mut d = ComplexMatrix::zeros(n);
        for l in 0..k {
            d.set(l, l, i_unit * norm);
        }
        d.set(k, k, i_unit * (-(k as f64) * norm));
        out.push(AlgebraElement(d));
    }
    out
}

/// X = Σ_a p_a T_a with i.i.d. standard normal p_a.
pub fn random_algebra<R: Rng + ?Sized>(rng: &mut R, n: usize) -> AlgebraElement {
    assert!(n >= 2, "su(N) needs N >= 2");
    let i_unit = Complex64::new(0.0, 1.0);
    let mut m = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let p_sym: f64 = rng.sample(StandardNormal);
            let p_asym: f64 = rng.sample(StandardNormal);
            let v = (i_unit * p_sym + p_asym) * FRAC_1_SQRT_2;
            m.set(i, j, v);
            m.set(j, i, -v.conj());
        }
    }
    for k in 1..n {
        let p: f64 = rng.sample(StandardNormal);
        let norm = p / ((k * (k + 1)) as f64).sqrt();
        for l in 0..k {
            m.set(l, l, m.get(l, l) + i_unit * norm);
        }
        m.set(k, k, m.get(k, k) - i_unit * (k as f64 * norm));
    }
    AlgebraElement(m)
}

/// exp(s·X) for X ∈ su(N).
///
/// SU(2) uses the closed form cos|x|·1 + sin|x|/|x|·X with |x|² = ½‖X‖²;
/// other sizes use scaling-and-squaring around a Taylor core.
pub fn exp_algebra(x: &AlgebraElement, s: f64) -> Result<SpecialUnitary, MatAlgError> {
    let m = x.0.scale(s);
    let norm = m.frobenius_norm();
    if !norm.is_finite() || norm > EXP_NORM_LIMIT {
        return Err(MatAlgError::ExpOverflow { norm });
    }
    let n = m.n();
    if n == 2 {
        let theta = (0.5 * m.norm_sqr()).sqrt();
        let sinc = if theta < 1e-8 { 1.0 - theta * theta / 6.0 } else { theta.sin() / theta };
        let mut r = m.scale(sinc);
        for i in 0..2 {
            r.set(i, i, r.get(i, i) + theta.cos());
        }
        return Ok(SpecialUnitary(r));
    }
    Ok(SpecialUnitary(expm_taylor(&m)))
}

fn expm_taylor(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.n();
    let norm = m.frobenius_norm();
    let mut squarings = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm > 0.25 {
        scaled_norm *= 0.5;
        squarings += 1;
    }
    let a = m.scale(0.5f64.powi(squarings as i32));
    let mut result = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=30 {
        term = (term * a).scale(1.0 / k as f64);
        result += term;
        if term.norm_sqr() < 1e-36 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result * result;
    }
    result
}

/// Projects a near-unitary matrix back onto SU(N).
///
/// Newton-Schulz iteration to the unitary polar factor, then division by the
/// principal-branch det^{1/N} phase.
pub fn reunitarize(u: &ComplexMatrix) -> Result<SpecialUnitary, MatAlgError> {
    let n = u.n();
    let id = ComplexMatrix::identity(n);
    let deviation = unitarity_error(u);
    if !(deviation <= DRIFT_TOLERANCE) {
        return Err(MatAlgError::Drift { deviation });
    }
    let mut x = *u;
    let mut dev = deviation;
    let mut iters = 0;
    while dev > 1e-15 && iters < 20 {
        let xtx = x.adjoint() * x;
        x = (x * (id.scale(3.0) - xtx)).scale(0.5);
        dev = unitarity_error(&x);
        iters += 1;
    }
    let phase = x.det().arg();
    if phase != 0.0 {
        x = x.scale_c(Complex64::from_polar(1.0, -phase / n as f64));
    }
    Ok(SpecialUnitary(x))
}
