use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Largest matrix size handled by the fixed-size storage.
pub const MAX_N: usize = 3;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense N×N complex matrix with N ≤ 3 chosen at runtime.
///
/// Entries live in a fixed 3×3 row-major array; only the leading `n`×`n`
/// block is meaningful and everything outside it stays zero.
#[derive(Clone, Copy, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    e: [Complex64; MAX_N * MAX_N],
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!((1..=MAX_N).contains(&n), "matrix size {n} not supported");
        Self { n, e: [ZERO; MAX_N * MAX_N] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.e[i * MAX_N + i] = ONE;
        }
        m
    }

    pub fn scalar(n: usize, s: Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.e[i * MAX_N + i] = s;
        }
        m
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &v) in entries.iter().enumerate() {
            m.e[i * MAX_N + i] = v;
        }
        m
    }

    /// Builds a matrix from row slices; panics if rows are ragged.
    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "row {i} has wrong length");
            for (j, &v) in row.iter().enumerate() {
                m.e[i * MAX_N + j] = v;
            }
        }
        m
    }

    /// Matrix with i.i.d. standard complex Gaussian entries (unit variance per component).
    pub fn random_gaussian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                m.e[i * MAX_N + j] = Complex64::new(re, im);
            }
        }
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        debug_assert!(i < self.n && j < self.n);
        self.e[i * MAX_N + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        debug_assert!(i < self.n && j < self.n);
        self.e[i * MAX_N + j] = v;
    }

    /// Conjugate transpose.
    #[inline]
    pub fn adjoint(&self) -> Self {
        let mut r = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                r.e[i * MAX_N + j] = self.e[j * MAX_N + i].conj();
            }
        }
        r
    }

    pub fn transpose(&self) -> Self {
        let mut r = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                r.e[i * MAX_N + j] = self.e[j * MAX_N + i];
            }
        }
        r
    }

    #[inline]
    pub fn trace(&self) -> Complex64 {
        let mut t = ZERO;
        for i in 0..self.n {
            t += self.e[i * MAX_N + i];
        }
        t
    }

    #[inline]
    pub fn re_trace(&self) -> f64 {
        self.trace().re
    }

    /// Re Tr(self · rhs) without forming the product.
    #[inline]
    pub fn re_trace_mul(&self, rhs: &Self) -> f64 {
        let n = self.n;
        let mut t = 0.0;
        for i in 0..n {
            for k in 0..n {
                let a = self.e[i * MAX_N + k];
                let b = rhs.e[k * MAX_N + i];
                t += a.re * b.re - a.im * b.im;
            }
        }
        t
    }

    /// Tr(self · self†) = squared Frobenius norm.
    #[inline]
    pub fn norm_sqr(&self) -> f64 {
        self.e.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.e.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.e.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn det(&self) -> Complex64 {
        let m = |i: usize, j: usize| self.e[i * MAX_N + j];
        match self.n {
            1 => m(0, 0),
            2 => m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0),
            3 => {
                m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
                    - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                    + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
            }
            _ => unreachable!(),
        }
    }

    /// Classical adjugate, adj(Z) with Z·adj(Z) = det(Z)·1. Defined for singular Z.
    pub fn adjugate(&self) -> Self {
        let m = |i: usize, j: usize| self.e[i * MAX_N + j];
        let mut r = Self::zeros(self.n);
        match self.n {
            1 => r.e[0] = ONE,
            2 => {
                r.set(0, 0, m(1, 1));
                r.set(0, 1, -m(0, 1));
                r.set(1, 0, -m(1, 0));
                r.set(1, 1, m(0, 0));
            }
            3 => {
                // adj(Z)_{ij} = cofactor C_{ji}
                for i in 0..3 {
                    for j in 0..3 {
                        let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                        let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                        r.set(i, j, m(r0, c0) * m(r1, c1) - m(r0, c1) * m(r1, c0));
                    }
                }
            }
            _ => unreachable!(),
        }
        r
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut r = *self;
        for z in r.e.iter_mut() {
            *z *= s;
        }
        r
    }

    pub fn scale_c(&self, s: Complex64) -> Self {
        let mut r = *self;
        for z in r.e.iter_mut() {
            *z *= s;
        }
        r
    }

    /// self += s · rhs
    #[inline]
    pub fn axpy(&mut self, s: f64, rhs: &Self) {
        debug_assert_eq!(self.n, rhs.n);
        for (a, b) in self.e.iter_mut().zip(rhs.e.iter()) {
            *a += b * s;
        }
    }

    /// Max-norm distance between two matrices.
    pub fn max_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }

    /// Hermitian part (M + M†)/2.
    pub fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()).scale(0.5)
    }

    /// Iterates the n² meaningful entries row by row.
    pub fn entries(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.n).flat_map(move |i| (0..self.n).map(move |j| self.e[i * MAX_N + j]))
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.n, self.n)?;
        for i in 0..self.n {
            write!(f, "  ")?;
            for j in 0..self.n {
                let z = self.get(i, j);
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Mul for ComplexMatrix {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl Mul<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    #[inline]
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        debug_assert_eq!(self.n, rhs.n);
        let mut r = ComplexMatrix::zeros(self.n);
        // fixed-size kernels let the compiler unroll the loops
        match self.n {
            1 => mul_into::<1>(&self.e, &rhs.e, &mut r.e),
            2 => mul_into::<2>(&self.e, &rhs.e, &mut r.e),
            3 => mul_into::<3>(&self.e, &rhs.e, &mut r.e),
            _ => unreachable!("unsupported matrix size"),
        }
        r
    }
}

#[inline(always)]
fn mul_into<const N: usize>(a: &[Complex64; MAX_N * MAX_N], b: &[Complex64; MAX_N * MAX_N], r: &mut [Complex64; MAX_N * MAX_N]) {
    for i in 0..N {
        for j in 0..N {
            let mut re = 0.0;
            let mut im = 0.0;
            for k in 0..N {
                let x = a[i * MAX_N + k];
                let y = b[k * MAX_N + j];
                re += x.re * y.re - x.im * y.im;
                im += x.re * y.im + x.im * y.re;
            }
            r[i * MAX_N + j] = Complex64::new(re, im);
        }
    }
}

impl MulAssign for ComplexMatrix {
    fn mul_assign(&mut self, rhs: Self) {
        *self = &*self * &rhs;
    }
}

impl Mul<f64> for ComplexMatrix {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.scale(s)
    }
}

impl Mul<Complex64> for ComplexMatrix {
    type Output = Self;
    fn mul(self, s: Complex64) -> Self {
        self.scale_c(s)
    }
}

impl Add for ComplexMatrix {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl AddAssign for ComplexMatrix {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        debug_assert_eq!(self.n, rhs.n);
        for (a, b) in self.e.iter_mut().zip(rhs.e.iter()) {
            *a += b;
        }
    }
}

impl Sub for ComplexMatrix {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: Self) -> Self {
        self -= rhs;
        self
    }
}

impl SubAssign for ComplexMatrix {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        debug_assert_eq!(self.n, rhs.n);
        for (a, b) in self.e.iter_mut().zip(rhs.e.iter()) {
            *a -= b;
        }
    }
}

impl Neg for ComplexMatrix {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}
