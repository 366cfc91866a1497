//! Orbifold lattice action: complex spatial links Z_j(n), SU(N) temporal
//! links U_t(n), and the two mass terms that pull Z toward √c·SU(N).
//!
//! With κ₁ = 1/a_t, κ₂ = g²a_t/(2a^d), κ₃ = 2g²a_t/a^d,
//! κ₄ = m²g²a_t·a^{2−d}/2 and κ₅ = m²_U(1)·a_t·a^{d−2}/(2g²):
//!
//! | term | density                                                        |
//! |------|----------------------------------------------------------------|
//! | T1   | κ₁ Σ_j ‖U_t(n)Z_j(n+t̂) − Z_j(n)U_t(n+ĵ)‖²                      |
//! | T2   | κ₂ ‖Σ_j (Z_j(n)Z_j(n)† − Z_j(n−ĵ)†Z_j(n−ĵ))‖²                    |
//! | T3   | κ₃ Σ_{j<k} ‖Z_j(n)Z_k(n+ĵ) − Z_k(n)Z_j(n+k̂)‖²                   |
//! | T4   | κ₄ Σ_j ‖Z_j(n)Z_j(n)† − c·1‖²                                   |
//! | T5   | κ₅ Σ_j |c^{−N/2} det Z_j(n) − 1|²                               |
//!
//! ‖M‖² = Tr(MM†). Force bookkeeping, D_j(m) ≡ ∂S/∂Z̄_j(m), using the rule
//! δS = 2κ Re Tr(δM·M†) with δM = L·δZ·R ⇒ D += κ L†·M·R†:
//!
//! | term | contribution to D_j(m)                                         |
//! |------|----------------------------------------------------------------|
//! | T1   | κ₁ [U_t(m−t̂)† M_j(m−t̂) − M_j(m) U_t(m+ĵ)†]                     |
//! | T2   | 2κ₂ [A(m) Z_j(m) − Z_j(m) A(m+ĵ)]                               |
//! | T3   | κ₃ Σ_{k≠j} [M_jk(m) Z_k(m+ĵ)† − Z_k(m−k̂)† M_jk(m−k̂)]           |
//! | T4   | 2κ₄ H_j(m) Z_j(m),  H = ZZ† − c                                 |
//! | T5   | κ₅ w c^{−N/2} adj(Z_j(m))†,  w = c^{−N/2} det Z − 1             |
//!
//! where M_j, A, M_jk are the matrices inside T1, T2, T3. The temporal link
//! only enters T1; along δU_t(n) = X·U_t(n) one finds δS = Re Tr(X·Q) with
//! Q = 2κ₁ Σ_j U_t(n)[Z_j(n+t̂) M_j(n)† − M_j(n−ĵ)† Z_j(n−ĵ)], and the force
//! is the traceless anti-Hermitian part of Q.

use std::ops::Index;
use std::sync::Arc;

use rand::Rng;

use crate::geometry::{Lattice, TIME};
use crate::hmc::{Fields, Force, Model};
use crate::matalg::{AlgebraElement, ComplexMatrix, MatAlgError, SpecialUnitary};
use crate::params::PhysParams;
use crate::wilson::{reunitarize_links, WilsonConfig};

/// Complex spatial links and unitary temporal links.
#[derive(Clone, Debug)]
pub struct OrbifoldConfig {
    lattice: Arc<Lattice>,
    n_colors: usize,
    /// Z_j(n) at `site * d + (j − 1)`.
    z: Vec<ComplexMatrix>,
    ut: Vec<SpecialUnitary>,
}

impl OrbifoldConfig {
    pub fn new(lattice: Arc<Lattice>, n_colors: usize, z: Vec<ComplexMatrix>, ut: Vec<SpecialUnitary>) -> Self {
        assert_eq!(z.len(), lattice.volume() * lattice.d());
        assert_eq!(ut.len(), lattice.volume());
        Self { lattice, n_colors, z, ut }
    }

    /// Z = √c·1, U_t = 1: the global minimum S = 0.
    pub fn frozen_identity(lattice: Arc<Lattice>, p: &PhysParams) -> Self {
        let n = p.n_colors;
        let z = ComplexMatrix::identity(n).scale(p.c().sqrt());
        let vol = lattice.volume();
        let d = lattice.d();
        Self { lattice, n_colors: n, z: vec![z; vol * d], ut: vec![SpecialUnitary::identity(n); vol] }
    }

    /// Z = √c·(1 + spread·G)·U with Haar U and complex Gaussian G; Haar U_t.
    pub fn random_near_frozen<R: Rng + ?Sized>(lattice: Arc<Lattice>, p: &PhysParams, spread: f64, rng: &mut R) -> Self {
        let n = p.n_colors;
        let sc = p.c().sqrt();
        let vol = lattice.volume();
        let d = lattice.d();
        let z = (0..vol * d)
            .map(|_| {
                let u = SpecialUnitary::random_haar(rng, n);
                let g = ComplexMatrix::random_gaussian(rng, n).scale(spread);
                ((ComplexMatrix::identity(n) + g) * u.matrix()).scale(sc)
            })
            .collect();
        let ut = (0..vol).map(|_| SpecialUnitary::random_haar(rng, n)).collect();
        Self { lattice, n_colors: n, z, ut }
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn n_colors(&self) -> usize {
        self.n_colors
    }

    /// Z_j(n), j ∈ 1..=d.
    #[inline]
    pub fn z(&self, site: usize, j: usize) -> &ComplexMatrix {
        &self.z[site * self.lattice.d() + j - 1]
    }

    pub fn set_z(&mut self, site: usize, j: usize, m: ComplexMatrix) {
        let d = self.lattice.d();
        self.z[site * d + j - 1] = m;
    }

    #[inline]
    pub fn ut(&self, site: usize) -> &SpecialUnitary {
        &self.ut[site]
    }

    pub fn set_ut(&mut self, site: usize, u: SpecialUnitary) {
        self.ut[site] = u;
    }

    pub fn z_links(&self) -> &[ComplexMatrix] {
        &self.z
    }

    pub fn temporal_links(&self) -> &[SpecialUnitary] {
        &self.ut
    }

    /// Z_j(n) → Ω(n)Z_j(n)Ω(n+ĵ)†, U_t(n) → Ω(n)U_t(n)Ω(n+t̂)†.
    pub fn gauge_transform(&self, omega: &[SpecialUnitary]) -> Self {
        let l = &self.lattice;
        assert_eq!(omega.len(), l.volume());
        let mut out = self.clone();
        for site in l.sites() {
            for j in 1..=l.d() {
                let m = omega[site].matrix() * *self.z(site, j) * omega[l.up(site, j)].adjoint();
                out.set_z(site, j, m);
            }
            let u = omega[site].matrix() * self.ut(site).matrix() * omega[l.up(site, TIME)].adjoint();
            out.ut[site] = SpecialUnitary::from_matrix_unchecked(u);
        }
        out
    }

    /// Multiplies U_t on time slice `t` by e^{2πik/N}.
    pub fn center_transform(&self, t: usize, k: i64) -> Self {
        let zc = SpecialUnitary::center(self.n_colors, k);
        let mut out = self.clone();
        for x in 0..self.lattice.shape().spatial_volume() {
            let site = self.lattice.site_at(t, x);
            out.ut[site] = zc.compose(self.ut(site));
        }
        out
    }

    /// Translation by one unit in +μ.
    pub fn translated(&self, mu: usize) -> Self {
        let src = self.lattice.translation_source(mu);
        let d = self.lattice.d();
        let mut z = Vec::with_capacity(self.z.len());
        for &s in &src {
            z.extend_from_slice(&self.z[s * d..(s + 1) * d]);
        }
        let ut = src.iter().map(|&s| self.ut[s]).collect();
        Self { lattice: self.lattice.clone(), n_colors: self.n_colors, z, ut }
    }

    pub fn reunitarize(&mut self) -> Result<(), (usize, MatAlgError)> {
        reunitarize_links(&mut self.ut)
    }
}

/// Index constants into [`TermMask`] and [`ActionTerms`].
pub mod term {
    pub const TEMPORAL: usize = 0;
    pub const MOMENT_MAP: usize = 1;
    pub const PLAQUETTE: usize = 2;
    pub const RADIAL_MASS: usize = 3;
    pub const DET_MASS: usize = 4;
    pub const NAMES: [&str; 5] = ["T1 temporal", "T2 moment map", "T3 plaquette", "T4 radial mass", "T5 det mass"];
}

/// Which of the five action terms are switched on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TermMask(pub [bool; 5]);

impl TermMask {
    pub fn all() -> Self {
        Self([true; 5])
    }

    pub fn only(t: usize) -> Self {
        let mut m = [false; 5];
        m[t] = true;
        Self(m)
    }

    pub fn with(mut self, t: usize, on: bool) -> Self {
        self.0[t] = on;
        self
    }

    #[inline]
    pub fn has(&self, t: usize) -> bool {
        self.0[t]
    }
}

impl Default for TermMask {
    fn default() -> Self {
        Self::all()
    }
}

/// The five terms of the orbifold action, each non-negative.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ActionTerms(pub [f64; 5]);

impl ActionTerms {
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl Index<usize> for ActionTerms {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[derive(Clone, Debug)]
pub struct OrbifoldAction {
    pub params: PhysParams,
    pub terms: TermMask,
}

struct Coefficients {
    k: [f64; 5],
    c: f64,
    c_det: f64,
}

impl OrbifoldAction {
    pub fn new(params: PhysParams) -> Self {
        Self { params, terms: TermMask::all() }
    }

    pub fn with_terms(params: PhysParams, terms: TermMask) -> Self {
        Self { params, terms }
    }

    fn coefficients(&self) -> Coefficients {
        let p = &self.params;
        let d = p.d as i32;
        let ad = p.a.powi(d);
        let c = p.c();
        Coefficients {
            k: [
                1.0 / p.a_t,
                p.g2 * p.a_t / (2.0 * ad),
                2.0 * p.g2 * p.a_t / ad,
                p.m2 * p.g2 * p.a_t * p.a.powi(2 - d) / 2.0,
                p.m2_u1 * p.a_t * p.a.powi(d - 2) / (2.0 * p.g2),
            ],
            c,
            c_det: c.powf(-(p.n_colors as f64) / 2.0),
        }
    }

    /// M_j(n) = U_t(n)Z_j(n+t̂) − Z_j(n)U_t(n+ĵ)
    fn temporal_hop(cfg: &OrbifoldConfig, site: usize, j: usize) -> ComplexMatrix {
        let l = cfg.lattice();
        cfg.ut(site).matrix() * *cfg.z(l.up(site, TIME), j) - *cfg.z(site, j) * cfg.ut(l.up(site, j)).matrix()
    }

    /// A(n) = Σ_j Z_j(n)Z_j(n)† − Z_j(n−ĵ)†Z_j(n−ĵ)
    fn moment_map(cfg: &OrbifoldConfig, site: usize) -> ComplexMatrix {
        let l = cfg.lattice();
        let mut a = ComplexMatrix::zeros(cfg.n_colors());
        for j in 1..=l.d() {
            let z = cfg.z(site, j);
            let zb = cfg.z(l.dn(site, j), j);
            a += *z * z.adjoint() - zb.adjoint() * *zb;
        }
        a
    }

    /// M_jk(n) = Z_j(n)Z_k(n+ĵ) − Z_k(n)Z_j(n+k̂)
    fn plaquette_defect(cfg: &OrbifoldConfig, site: usize, j: usize, k: usize) -> ComplexMatrix {
        let l = cfg.lattice();
        *cfg.z(site, j) * *cfg.z(l.up(site, j), k) - *cfg.z(site, k) * *cfg.z(l.up(site, k), j)
    }

    /// The five terms evaluated separately. Disabled terms are reported as 0.
    pub fn action_terms(&self, cfg: &OrbifoldConfig) -> ActionTerms {
        let co = self.coefficients();
        let l = cfg.lattice();
        let d = l.d();
        let n = cfg.n_colors();
        let mut t = [0.0; 5];
        let id_c = ComplexMatrix::identity(n).scale(co.c);
        for site in l.sites() {
            if self.terms.has(term::TEMPORAL) {
                for j in 1..=d {
                    t[0] += Self::temporal_hop(cfg, site, j).norm_sqr();
                }
            }
            if self.terms.has(term::MOMENT_MAP) {
                t[1] += Self::moment_map(cfg, site).norm_sqr();
            }
            if self.terms.has(term::PLAQUETTE) {
                for j in 1..=d {
                    for k in (j + 1)..=d {
                        t[2] += Self::plaquette_defect(cfg, site, j, k).norm_sqr();
                    }
                }
            }
            for j in 1..=d {
                let z = cfg.z(site, j);
                if self.terms.has(term::RADIAL_MASS) {
                    t[3] += (*z * z.adjoint() - id_c).norm_sqr();
                }
                if self.terms.has(term::DET_MASS) {
                    t[4] += (z.det() * co.c_det - 1.0).norm_sqr();
                }
            }
        }
        for (ti, ki) in t.iter_mut().zip(co.k) {
            *ti *= ki;
        }
        ActionTerms(t)
    }

    pub fn action(&self, cfg: &OrbifoldConfig) -> f64 {
        self.action_terms(cfg).total()
    }

    /// ∂S/∂Z̄_j(n) for every spatial link, laid out like the Z links.
    pub fn force_z(&self, cfg: &OrbifoldConfig) -> Vec<ComplexMatrix> {
        let co = self.coefficients();
        let l = cfg.lattice();
        let d = l.d();
        let n = cfg.n_colors();
        let vol = l.volume();
        let mut out = vec![ComplexMatrix::zeros(n); vol * d];

        if self.terms.has(term::TEMPORAL) {
            let hops: Vec<ComplexMatrix> =
                (0..vol).flat_map(|s| (1..=d).map(move |j| (s, j))).map(|(s, j)| Self::temporal_hop(cfg, s, j)).collect();
            for m in l.sites() {
                let back = l.dn(m, TIME);
                for j in 1..=d {
                    let g = cfg.ut(back).adjoint() * hops[back * d + j - 1]
                        - hops[m * d + j - 1] * cfg.ut(l.up(m, j)).adjoint();
                    out[m * d + j - 1].axpy(co.k[0], &g);
                }
            }
        }

        if self.terms.has(term::MOMENT_MAP) {
            let a: Vec<ComplexMatrix> = l.sites().map(|s| Self::moment_map(cfg, s)).collect();
            for m in l.sites() {
                for j in 1..=d {
                    let z = cfg.z(m, j);
                    let g = a[m] * *z - *z * a[l.up(m, j)];
                    out[m * d + j - 1].axpy(2.0 * co.k[1], &g);
                }
            }
        }

        if self.terms.has(term::PLAQUETTE) && d > 1 {
            // M_jk for all ordered pairs, index (site, j, k) → site*d*d + (j−1)*d + (k−1)
            let mut defects = vec![ComplexMatrix::zeros(n); vol * d * d];
            for s in l.sites() {
                for j in 1..=d {
                    for k in (j + 1)..=d {
                        let m = Self::plaquette_defect(cfg, s, j, k);
                        defects[s * d * d + (j - 1) * d + (k - 1)] = m;
                        defects[s * d * d + (k - 1) * d + (j - 1)] = -m;
                    }
                }
            }
            for m in l.sites() {
                for j in 1..=d {
                    let mut g = ComplexMatrix::zeros(n);
                    for k in (1..=d).filter(|&k| k != j) {
                        let back = l.dn(m, k);
                        g += defects[m * d * d + (j - 1) * d + (k - 1)] * cfg.z(l.up(m, j), k).adjoint();
                        g -= cfg.z(back, k).adjoint() * defects[back * d * d + (j - 1) * d + (k - 1)];
                    }
                    out[m * d + j - 1].axpy(co.k[2], &g);
                }
            }
        }

        if self.terms.has(term::RADIAL_MASS) || self.terms.has(term::DET_MASS) {
            let id_c = ComplexMatrix::identity(n).scale(co.c);
            for (i, z) in cfg.z.iter().enumerate() {
                if self.terms.has(term::RADIAL_MASS) {
                    let h = *z * z.adjoint() - id_c;
                    out[i].axpy(2.0 * co.k[3], &(h * *z));
                }
                if self.terms.has(term::DET_MASS) {
                    let w = z.det() * co.c_det - 1.0;
                    let g = z.adjugate().adjoint().scale_c(w * co.c_det);
                    out[i].axpy(co.k[4], &g);
                }
            }
        }
        out
    }

    /// Force on the temporal links (from T1 only); same sign convention as
    /// the Wilson force.
    pub fn force_ut(&self, cfg: &OrbifoldConfig) -> Vec<AlgebraElement> {
        let l = cfg.lattice();
        let n = cfg.n_colors();
        if !self.terms.has(term::TEMPORAL) {
            return vec![AlgebraElement::zero(n); l.volume()];
        }
        let co = self.coefficients();
        let d = l.d();
        let hops: Vec<ComplexMatrix> =
            (0..l.volume()).flat_map(|s| (1..=d).map(move |j| (s, j))).map(|(s, j)| Self::temporal_hop(cfg, s, j)).collect();
        l.sites()
            .map(|site| {
                let up_t = l.up(site, TIME);
                let mut inner = ComplexMatrix::zeros(n);
                for j in 1..=d {
                    let back = l.dn(site, j);
                    inner += *cfg.z(up_t, j) * hops[site * d + j - 1].adjoint();
                    inner -= hops[back * d + j - 1].adjoint() * *cfg.z(back, j);
                }
                let q = (cfg.ut(site).matrix() * inner).scale(2.0 * co.k[0]);
                AlgebraElement::project(&q)
            })
            .collect()
    }
}

pub fn orbifold_action(cfg: &OrbifoldConfig, p: &PhysParams) -> f64 {
    OrbifoldAction::new(p.clone()).action(cfg)
}

pub fn orbifold_force_z(cfg: &OrbifoldConfig, p: &PhysParams) -> Vec<ComplexMatrix> {
    OrbifoldAction::new(p.clone()).force_z(cfg)
}

pub fn orbifold_force_ut(cfg: &OrbifoldConfig, p: &PhysParams) -> Vec<AlgebraElement> {
    OrbifoldAction::new(p.clone()).force_ut(cfg)
}

/// Infinite-mass embedding of a Wilson configuration: Z_j = √c·U_j, U_t copied.
pub fn frozen_reduce(w: &WilsonConfig, p: &PhysParams) -> OrbifoldConfig {
    let l = w.lattice().clone();
    let sc = p.c().sqrt();
    let d = l.d();
    let mut z = Vec::with_capacity(l.volume() * d);
    let mut ut = Vec::with_capacity(l.volume());
    for site in l.sites() {
        ut.push(*w.link(site, TIME));
        for j in 1..=d {
            z.push(w.link(site, j).matrix().scale(sc));
        }
    }
    OrbifoldConfig { lattice: l, n_colors: w.n_colors(), z, ut }
}

impl Fields for OrbifoldConfig {
    fn n_colors(&self) -> usize {
        self.n_colors
    }
    fn group_links(&self) -> &[SpecialUnitary] {
        &self.ut
    }
    fn group_links_mut(&mut self) -> &mut [SpecialUnitary] {
        &mut self.ut
    }
    fn flat_links(&self) -> &[ComplexMatrix] {
        &self.z
    }
    fn flat_links_mut(&mut self) -> &mut [ComplexMatrix] {
        &mut self.z
    }
    fn group_links_per_site(&self) -> usize {
        1
    }
    fn flat_links_per_site(&self) -> usize {
        self.lattice.d()
    }
}

impl Model for OrbifoldAction {
    type Config = OrbifoldConfig;

    fn action(&self, cfg: &OrbifoldConfig) -> f64 {
        OrbifoldAction::action(self, cfg)
    }

    fn force(&self, cfg: &OrbifoldConfig) -> Force {
        Force { group: self.force_ut(cfg), flat_grad: self.force_z(cfg) }
    }
}
