//! Wilson plaquette action on the anisotropic lattice and its HMC force.
//!
//! S = −Σ_n [ β_t Σ_j Re Tr P_tj(n) + β_s Σ_{j<k} Re Tr P_jk(n) ]
//! with β_t = 2c/a_t and β_s = a_t·a^{d−4}/g². Summing a plaquette and its
//! reverse orientation gives 2 Re Tr of one orientation, which is what the
//! β's above absorb.

use std::sync::Arc;

use rand::Rng;

use crate::geometry::{Lattice, TIME};
use crate::hmc::{Fields, Force, Model};
use crate::matalg::{reunitarize, AlgebraElement, ComplexMatrix, MatAlgError, SpecialUnitary};
use crate::params::PhysParams;

/// One SU(N) link per (site, direction), direction 0 being time.
#[derive(Clone, Debug)]
pub struct WilsonConfig {
    lattice: Arc<Lattice>,
    n_colors: usize,
    links: Vec<SpecialUnitary>,
}

impl WilsonConfig {
    /// All links set to the identity.
    pub fn cold(lattice: Arc<Lattice>, n_colors: usize) -> Self {
        let n_links = lattice.volume() * lattice.n_dirs();
        Self { lattice, n_colors, links: vec![SpecialUnitary::identity(n_colors); n_links] }
    }

    /// Haar-random links.
    pub fn hot<R: Rng + ?Sized>(lattice: Arc<Lattice>, n_colors: usize, rng: &mut R) -> Self {
        let n_links = lattice.volume() * lattice.n_dirs();
        let links = (0..n_links).map(|_| SpecialUnitary::random_haar(rng, n_colors)).collect();
        Self { lattice, n_colors, links }
    }

    pub fn from_links(lattice: Arc<Lattice>, n_colors: usize, links: Vec<SpecialUnitary>) -> Self {
        assert_eq!(links.len(), lattice.volume() * lattice.n_dirs());
        Self { lattice, n_colors, links }
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn n_colors(&self) -> usize {
        self.n_colors
    }

    #[inline]
    pub fn link(&self, site: usize, mu: usize) -> &SpecialUnitary {
        &self.links[site * self.lattice.n_dirs() + mu]
    }

    pub fn set_link(&mut self, site: usize, mu: usize, u: SpecialUnitary) {
        let nd = self.lattice.n_dirs();
        self.links[site * nd + mu] = u;
    }

    pub fn links(&self) -> &[SpecialUnitary] {
        &self.links
    }

    /// U_μ(n)U_ν(n+μ̂)U_μ(n+ν̂)†U_ν(n)†
    pub fn plaquette(&self, site: usize, mu: usize, nu: usize) -> ComplexMatrix {
        let l = &self.lattice;
        let a = self.link(site, mu).matrix() * self.link(l.up(site, mu), nu).matrix();
        let b = self.link(site, nu).matrix() * self.link(l.up(site, nu), mu).matrix();
        a * b.adjoint()
    }

    /// U_μ(n) → Ω(n)U_μ(n)Ω(n+μ̂)†
    pub fn gauge_transform(&self, omega: &[SpecialUnitary]) -> Self {
        let l = &self.lattice;
        assert_eq!(omega.len(), l.volume());
        let mut out = self.clone();
        for site in l.sites() {
            for mu in 0..l.n_dirs() {
                let u = omega[site].matrix() * self.link(site, mu).matrix() * omega[l.up(site, mu)].adjoint();
                out.set_link(site, mu, SpecialUnitary::from_matrix_unchecked(u));
            }
        }
        out
    }

    /// Multiplies every temporal link on time slice `t` by e^{2πik/N}.
    pub fn center_transform(&self, t: usize, k: i64) -> Self {
        let z = SpecialUnitary::center(self.n_colors, k);
        let mut out = self.clone();
        for x in 0..self.lattice.shape().spatial_volume() {
            let site = self.lattice.site_at(t, x);
            out.set_link(site, TIME, z.compose(self.link(site, TIME)));
        }
        out
    }

    /// Translation by one lattice unit in +μ: U'_ν(n) = U_ν(n − μ̂).
    pub fn translated(&self, mu: usize) -> Self {
        let src = self.lattice.translation_source(mu);
        let nd = self.lattice.n_dirs();
        let mut links = Vec::with_capacity(self.links.len());
        for &s in &src {
            links.extend_from_slice(&self.links[s * nd..(s + 1) * nd]);
        }
        Self { lattice: self.lattice.clone(), n_colors: self.n_colors, links }
    }

    /// Worst ‖U†U − 1‖ and |det U − 1| over all links.
    pub fn max_group_error(&self) -> f64 {
        self.links.iter().map(|u| u.unitarity_error().max(u.det_error())).fold(0.0, f64::max)
    }

    pub fn reunitarize(&mut self) -> Result<(), (usize, MatAlgError)> {
        reunitarize_links(&mut self.links)
    }
}

pub(crate) fn reunitarize_links(links: &mut [SpecialUnitary]) -> Result<(), (usize, MatAlgError)> {
    for (i, u) in links.iter_mut().enumerate() {
        *u = reunitarize(&u.matrix()).map_err(|e| (i, e))?;
    }
    Ok(())
}

/// Wilson action with fixed physical parameters.
#[derive(Clone, Debug)]
pub struct WilsonAction {
    pub params: PhysParams,
}

impl WilsonAction {
    pub fn new(params: PhysParams) -> Self {
        Self { params }
    }

    fn beta(&self, mu: usize, nu: usize) -> f64 {
        if mu == TIME || nu == TIME {
            self.params.beta_temporal()
        } else {
            self.params.beta_spatial()
        }
    }

    /// Sum over sites of (Σ_j Re Tr P_tj, Σ_{j<k} Re Tr P_jk).
    pub fn plaquette_sums(&self, cfg: &WilsonConfig) -> (f64, f64) {
        let l = cfg.lattice();
        let d = l.d();
        let mut temporal = 0.0;
        let mut spatial = 0.0;
        for site in l.sites() {
            for j in 1..=d {
                temporal += cfg.plaquette(site, TIME, j).re_trace();
            }
            for j in 1..=d {
                for k in (j + 1)..=d {
                    spatial += cfg.plaquette(site, j, k).re_trace();
                }
            }
        }
        (temporal, spatial)
    }

    pub fn action(&self, cfg: &WilsonConfig) -> f64 {
        let (temporal, spatial) = self.plaquette_sums(cfg);
        -(self.params.beta_temporal() * temporal + self.params.beta_spatial() * spatial)
    }

    /// Weighted staple Σ with S = −Re Tr(U_μ(n)·Σ) + (terms without U_μ(n)).
    /// Temporal staples first, then spatial in ascending ν.
    pub fn staple(&self, cfg: &WilsonConfig, site: usize, mu: usize) -> ComplexMatrix {
        let l = cfg.lattice();
        let mut sum = ComplexMatrix::zeros(cfg.n_colors());
        for nu in 0..l.n_dirs() {
            if nu == mu {
                continue;
            }
            let beta = self.beta(mu, nu);
            let up_mu = l.up(site, mu);
            let up_nu = l.up(site, nu);
            let dn_nu = l.dn(site, nu);
            let up_mu_dn_nu = l.dn(up_mu, nu);
            let upper = cfg.link(up_mu, nu).matrix()
                * (cfg.link(site, nu).matrix() * cfg.link(up_nu, mu).matrix()).adjoint();
            let lower = (cfg.link(dn_nu, mu).matrix() * cfg.link(up_mu_dn_nu, nu).matrix()).adjoint()
                * cfg.link(dn_nu, nu).matrix();
            sum.axpy(beta, &(upper + lower));
        }
        sum
    }

    /// F_μ(n) = −TA[U_μ(n)·Σ_μ(n)], the negative gradient along left-invariant flows:
    /// d/dε S(exp(εX)U_μ(n)) = Re Tr(X·F_μ(n)).
    pub fn force(&self, cfg: &WilsonConfig) -> Vec<AlgebraElement> {
        let l = cfg.lattice();
        let mut out = Vec::with_capacity(cfg.links.len());
        for site in l.sites() {
            for mu in 0..l.n_dirs() {
                let m = cfg.link(site, mu).matrix() * self.staple(cfg, site, mu);
                out.push(AlgebraElement::project(&m).scaled(-1.0));
            }
        }
        out
    }
}

pub fn wilson_action(cfg: &WilsonConfig, p: &PhysParams) -> f64 {
    WilsonAction::new(p.clone()).action(cfg)
}

pub fn wilson_force(cfg: &WilsonConfig, p: &PhysParams) -> Vec<AlgebraElement> {
    WilsonAction::new(p.clone()).force(cfg)
}

impl Fields for WilsonConfig {
    fn n_colors(&self) -> usize {
        self.n_colors
    }
    fn group_links(&self) -> &[SpecialUnitary] {
        &self.links
    }
    fn group_links_mut(&mut self) -> &mut [SpecialUnitary] {
        &mut self.links
    }
    fn flat_links(&self) -> &[ComplexMatrix] {
        &[]
    }
    fn flat_links_mut(&mut self) -> &mut [ComplexMatrix] {
        &mut []
    }
    fn group_links_per_site(&self) -> usize {
        self.lattice.n_dirs()
    }
    fn flat_links_per_site(&self) -> usize {
        0
    }
}

impl Model for WilsonAction {
    type Config = WilsonConfig;

    fn action(&self, cfg: &WilsonConfig) -> f64 {
        WilsonAction::action(self, cfg)
    }

    fn force(&self, cfg: &WilsonConfig) -> Force {
        Force { group: WilsonAction::force(self, cfg), flat_grad: Vec::new() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::LatticeShape;
    use crate::matalg::{exp_algebra, random_algebra, Complex64};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(n: usize) -> (Arc<Lattice>, WilsonAction) {
        let lat = Arc::new(Lattice::new(LatticeShape::cubic(4, 2).unwrap()));
        let p = PhysParams::new(n, 2, 1.0, 0.3, 0.3).unwrap();
        (lat, WilsonAction::new(p))
    }

    fn random_config(lat: &Arc<Lattice>, n: usize, seed: u64, spread: f64) -> WilsonConfig {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let links = (0..lat.volume() * lat.n_dirs())
            .map(|_| SpecialUnitary::random_near_identity(&mut rng, n, spread))
            .collect();
        WilsonConfig::from_links(lat.clone(), n, links)
    }

    #[test]
    fn identity_configuration_closed_form() {
        // per site: −[2Nd·c/a_t + 2N·a_t a^{d−4}/(2g²)] = −(40/3 + 20/3) = −20
        let (lat, act) = setup(2);
        let cfg = WilsonConfig::cold(lat.clone(), 2);
        let s = act.action(&cfg);
        let expected = -20.0 * lat.volume() as f64;
        assert!((s - expected).abs() < 1e-12 * expected.abs(), "{s} vs {expected}");
    }

    #[test]
    fn gauge_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..=3 {
            let (lat, act) = setup(n);
            let cfg = WilsonConfig::hot(lat.clone(), n, &mut rng);
            let omega: Vec<_> = lat.sites().map(|_| SpecialUnitary::random_haar(&mut rng, n)).collect();
            let s0 = act.action(&cfg);
            let s1 = act.action(&cfg.gauge_transform(&omega));
            assert!((s0 - s1).abs() <= 1e-10 * s0.abs());
        }
    }

    #[test]
    fn center_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in 2..=3 {
            let (lat, act) = setup(n);
            let cfg = WilsonConfig::hot(lat, n, &mut rng);
            let s0 = act.action(&cfg);
            let s1 = act.action(&cfg.center_transform(2, 1));
            assert!((s0 - s1).abs() <= 1e-12 * s0.abs());
        }
    }

    #[test]
    fn translation_invariance_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (lat, act) = setup(3);
        let cfg = WilsonConfig::hot(lat, 3, &mut rng);
        let s0 = act.action(&cfg);
        for mu in 0..3 {
            let s1 = act.action(&cfg.translated(mu));
            assert!((s0 - s1).abs() <= 1e-12 * s0.abs());
        }
    }

    #[test]
    fn both_orientations_give_real_action() {
        let (lat, act) = setup(3);
        let cfg = random_config(&lat, 3, 8, 0.7);
        let mut total = Complex64::new(0.0, 0.0);
        for site in lat.sites() {
            for (mu, nu) in [(0, 1), (0, 2), (1, 2)] {
                total += cfg.plaquette(site, mu, nu).trace() + cfg.plaquette(site, nu, mu).trace();
            }
        }
        let s = act.action(&cfg);
        assert!(total.im.abs() <= 1e-12 * s.abs());
    }

    #[test]
    fn cold_force_vanishes() {
        let (lat, act) = setup(2);
        let f = act.force(&WilsonConfig::cold(lat, 2));
        assert!(f.iter().all(|x| x.max_abs() < 1e-15));
    }

    #[test]
    fn force_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 2..=3 {
            let (lat, act) = setup(n);
            let cfg = random_config(&lat, n, 10 + n as u64, 0.8);
            let force = act.force(&cfg);
            let eps = 1e-5;
            for _ in 0..20 {
                let site = rng.random_range(0..lat.volume());
                let mu = rng.random_range(0..lat.n_dirs());
                let x = random_algebra(&mut rng, n);
                let shifted = |s: f64| {
                    let mut c = cfg.clone();
                    let u = exp_algebra(&x, s).unwrap().compose(cfg.link(site, mu));
                    c.set_link(site, mu, u);
                    act.action(&c)
                };
                let fd = (shifted(eps) - shifted(-eps)) / (2.0 * eps);
                let analytic = x.re_trace_mul(&force[site * lat.n_dirs() + mu]);
                assert!((fd - analytic).abs() <= 1e-6 * analytic.abs().max(1.0), "fd {fd} analytic {analytic}");
                assert!(force[site * lat.n_dirs() + mu].algebra_error() < 1e-12);
            }
        }
    }

    #[test]
    fn force_is_gauge_covariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (lat, act) = setup(3);
        let cfg = random_config(&lat, 3, 12, 0.6);
        let omega: Vec<_> = lat.sites().map(|_| SpecialUnitary::random_haar(&mut rng, 3)).collect();
        let f0 = act.force(&cfg);
        let f1 = act.force(&cfg.gauge_transform(&omega));
        for site in lat.sites() {
            for mu in 0..3 {
                let i = site * 3 + mu;
                let rotated = omega[site].matrix() * f0[i].matrix() * omega[site].adjoint();
                assert!(rotated.max_diff(&f1[i]) < 1e-10);
            }
        }
    }
}
