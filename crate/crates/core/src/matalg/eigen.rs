use num_complex::Complex64;

use super::ComplexMatrix;

const OFF_DIAGONAL_TOLERANCE: f64 = 1e-13;
const MAX_SWEEPS: usize = 60;

/// Eigendecomposition A = V·diag(λ)·V† of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Eigenvalues in ascending order; only the first `n` are meaningful.
    pub values: [f64; 3],
    /// Unitary matrix whose columns are the eigenvectors.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn n(&self) -> usize {
        self.vectors.n()
    }

    /// V·diag(f(λ))·V†
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.n();
        let v = &self.vectors;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    s += v.get(i, k) * v.get(j, k).conj() * f(self.values[k]);
                }
                out.set(i, j, s);
            }
        }
        out
    }
}

/// Hermitian eigendecomposition: closed form for 2×2, cyclic Jacobi otherwise.
/// Only the Hermitian part of `a` is used.
pub fn hermitian_eigen(a: &ComplexMatrix) -> HermitianEigen {
    let h = a.hermitian_part();
    match h.n() {
        1 => HermitianEigen { values: [h.get(0, 0).re, 0.0, 0.0], vectors: ComplexMatrix::identity(1) },
        2 => eigen_2x2(&h),
        _ => eigen_jacobi(&h),
    }
}

fn eigen_2x2(h: &ComplexMatrix) -> HermitianEigen {
    let a = h.get(0, 0).re;
    let d = h.get(1, 1).re;
    let b = h.get(0, 1);
    let mean = 0.5 * (a + d);
    let half_gap = 0.5 * (a - d);
    let r = half_gap.hypot(b.norm());
    let lo = mean - r;
    let hi = mean + r;
    if b.norm() <= f64::MIN_POSITIVE {
        let (values, vectors) = if a <= d {
            ([a, d, 0.0], ComplexMatrix::identity(2))
        } else {
            let mut v = ComplexMatrix::zeros(2);
            v.set(1, 0, Complex64::new(1.0, 0.0));
            v.set(0, 1, Complex64::new(1.0, 0.0));
            ([d, a, 0.0], v)
        };
        return HermitianEigen { values, vectors };
    }
    // Two candidate null vectors of (A − lo); keep the better conditioned one.
    let c1 = [b, Complex64::new(lo - a, 0.0)];
    let c2 = [Complex64::new(lo - d, 0.0), b.conj()];
    let n1 = c1[0].norm_sqr() + c1[1].norm_sqr();
    let n2 = c2[0].norm_sqr() + c2[1].norm_sqr();
    let (v, nv) = if n1 >= n2 { (c1, n1) } else { (c2, n2) };
    let nv = nv.sqrt();
    let v0 = v[0] / nv;
    let v1 = v[1] / nv;
    let mut vectors = ComplexMatrix::zeros(2);
    vectors.set(0, 0, v0);
    vectors.set(1, 0, v1);
    vectors.set(0, 1, -v1.conj());
    vectors.set(1, 1, v0.conj());
    HermitianEigen { values: [lo, hi, 0.0], vectors }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.n();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a.get(i, j).norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn eigen_jacobi(h: &ComplexMatrix) -> HermitianEigen {
    let n = h.n();
    let mut a = *h;
    let mut v = ComplexMatrix::identity(n);
    let scale = h.frobenius_norm().max(f64::MIN_POSITIVE);
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= OFF_DIAGONAL_TOLERANCE * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let r = apq.norm();
                if r <= f64::MIN_POSITIVE {
                    continue;
                }
                // Phase e^{-iφ} on column q turns a_pq real, then a real Jacobi rotation.
                let phase = apq / r;
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = D·R with D = diag(.., 1 at p, e^{-iφ} at q, ..), R the real rotation.
                let mut g = ComplexMatrix::identity(n);
                let conj_phase = phase.conj();
                g.set(p, p, Complex64::new(c, 0.0));
                g.set(p, q, Complex64::new(s, 0.0));
                g.set(q, p, conj_phase * (-s));
                g.set(q, q, conj_phase * c);
                a = g.adjoint() * a * g;
                v = v * g;
            }
        }
    }
    // Sort ascending.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).re.total_cmp(&a.get(j, j).re));
    let mut values = [0.0; 3];
    let mut vectors = ComplexMatrix::zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = a.get(src, src).re;
        for i in 0..n {
            vectors.set(i, dst, v.get(i, src));
        }
    }
    HermitianEigen { values, vectors }
}
