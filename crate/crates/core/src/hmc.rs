//! Hybrid Monte Carlo over a mixed phase space of group-valued links
//! (momenta in su(N)) and flat complex links (complex matrix momenta).
//!
//! H = ½ Σ_a p_a² + Σ Tr(P†P) + S. Group links drift as U ← exp(dt·π)U and
//! flat links as Z ← Z + dt·P; the flat kick is P ← P − dt·∂S/∂Z̄, which with
//! the kinetic term above is an exact Hamiltonian flow.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::matalg::{exp_algebra, random_algebra, AlgebraElement, Complex64, ComplexMatrix, MatAlgError, SpecialUnitary};
use crate::observables::ObservableSnapshot;
use crate::wilson::reunitarize_links;

/// Generator used for every Markov chain.
pub type SimRng = ChaCha8Rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HmcError {
    #[error("non-finite {kind} force at site {site}")]
    NonFiniteForce { kind: &'static str, site: usize },
    #[error("group update failed at site {site}: {source}")]
    GroupUpdate { site: usize, source: MatAlgError },
    #[error("non-finite energy change in trajectory {trajectory}")]
    NonFiniteEnergy { trajectory: u64 },
    #[error("reunitarization drift in trajectory {trajectory} at site {site}: {source}")]
    Drift { trajectory: u64, site: usize, source: MatAlgError },
}

/// Access to the dynamical variables of a configuration.
pub trait Fields: Clone {
    fn n_colors(&self) -> usize;
    fn group_links(&self) -> &[SpecialUnitary];
    fn group_links_mut(&mut self) -> &mut [SpecialUnitary];
    fn flat_links(&self) -> &[ComplexMatrix];
    fn flat_links_mut(&mut self) -> &mut [ComplexMatrix];
    fn group_links_per_site(&self) -> usize;
    fn flat_links_per_site(&self) -> usize;
}

/// Forces on the two kinds of links.
#[derive(Clone, Debug)]
pub struct Force {
    /// Negative gradient on group links: d/dε S(exp(εX)U) = Re Tr(X·F).
    pub group: Vec<AlgebraElement>,
    /// Wirtinger derivative ∂S/∂Z̄ on flat links.
    pub flat_grad: Vec<ComplexMatrix>,
}

/// An action that can drive HMC.
pub trait Model {
    type Config: Fields;
    fn action(&self, cfg: &Self::Config) -> f64;
    fn force(&self, cfg: &Self::Config) -> Force;
}

#[derive(Clone, Debug, PartialEq)]
pub struct Momenta {
    pub group: Vec<AlgebraElement>,
    pub flat: Vec<ComplexMatrix>,
}

impl Momenta {
    pub fn zeros_like<F: Fields>(cfg: &F) -> Self {
        let n = cfg.n_colors();
        Self {
            group: vec![AlgebraElement::zero(n); cfg.group_links().len()],
            flat: vec![ComplexMatrix::zeros(n); cfg.flat_links().len()],
        }
    }

    /// Gaussian momenta for the kinetic term: p_a ~ N(0,1) on group links,
    /// real and imaginary parts ~ N(0,½) on flat links.
    pub fn refresh<F: Fields, R: Rng + ?Sized>(cfg: &F, rng: &mut R) -> Self {
        let n = cfg.n_colors();
        let group = (0..cfg.group_links().len()).map(|_| random_algebra(rng, n)).collect();
        let flat = (0..cfg.flat_links().len())
            .map(|_| {
                let mut p = ComplexMatrix::zeros(n);
                for i in 0..n {
                    for j in 0..n {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        p.set(i, j, Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2);
                    }
                }
                p
            })
            .collect();
        Self { group, flat }
    }

    pub fn kinetic(&self) -> f64 {
        self.group.iter().map(|p| p.kinetic()).sum::<f64>() + self.flat.iter().map(|p| p.norm_sqr()).sum::<f64>()
    }

    pub fn negate(&mut self) {
        for p in &mut self.group {
            *p = p.scaled(-1.0);
        }
        for p in &mut self.flat {
            *p = -*p;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HmcParams {
    pub dt: f64,
    pub n_md: usize,
    pub n_traj: u64,
    pub n_therm: u64,
    pub meas_every: u64,
    pub seed: u64,
}

impl HmcParams {
    /// τ = dt·n_md
    pub fn trajectory_length(&self) -> f64 {
        self.dt * self.n_md as f64
    }
}

impl Default for HmcParams {
    fn default() -> Self {
        Self { dt: 0.05, n_md: 20, n_traj: 10_000, n_therm: 1_000, meas_every: 1, seed: 1 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub index: u64,
    pub dh: f64,
    pub accepted: bool,
    pub observables: Option<ObservableSnapshot>,
}

fn kick<F: Fields>(cfg: &F, mom: &mut Momenta, force: &Force, dt: f64) -> Result<(), HmcError> {
    for (i, (p, f)) in mom.group.iter_mut().zip(&force.group).enumerate() {
        if !f.is_finite() {
            return Err(HmcError::NonFiniteForce { kind: "group", site: i / cfg.group_links_per_site() });
        }
        p.add_scaled(dt, f);
    }
    for (i, (p, g)) in mom.flat.iter_mut().zip(&force.flat_grad).enumerate() {
        if !g.is_finite() {
            return Err(HmcError::NonFiniteForce { kind: "flat", site: i / cfg.flat_links_per_site() });
        }
        p.axpy(-dt, g);
    }
    Ok(())
}

fn drift<F: Fields>(cfg: &mut F, mom: &Momenta, dt: f64) -> Result<(), HmcError> {
    let per_site = cfg.group_links_per_site().max(1);
    for (i, (u, p)) in cfg.group_links_mut().iter_mut().zip(&mom.group).enumerate() {
        let step = exp_algebra(p, dt).map_err(|source| HmcError::GroupUpdate { site: i / per_site, source })?;
        *u = step.compose(u);
    }
    for (z, p) in cfg.flat_links_mut().iter_mut().zip(&mom.flat) {
        z.axpy(dt, p);
    }
    Ok(())
}

/// Kick-drift-kick leapfrog with `n_md` steps of size `dt`.
pub fn leapfrog<M: Model>(
    model: &M,
    cfg: &mut M::Config,
    mom: &mut Momenta,
    dt: f64,
    n_md: usize,
) -> Result<(), HmcError> {
    let force = model.force(cfg);
    kick(cfg, mom, &force, 0.5 * dt)?;
    for step in 0..n_md {
        drift(cfg, mom, dt)?;
        let force = model.force(cfg);
        let h = if step + 1 == n_md { 0.5 * dt } else { dt };
        kick(cfg, mom, &force, h)?;
    }
    Ok(())
}

/// One HMC update: momentum refresh, leapfrog, Metropolis test.
///
/// On rejection the configuration is restored bit for bit; accepted
/// configurations have their group links reprojected onto SU(N).
pub fn hmc_trajectory<M: Model, R: Rng + ?Sized>(
    model: &M,
    cfg: &mut M::Config,
    hp: &HmcParams,
    rng: &mut R,
    index: u64,
) -> Result<TrajectoryRecord, HmcError> {
    let mut mom = Momenta::refresh(cfg, rng);
    let h0 = mom.kinetic() + model.action(cfg);
    let backup = cfg.clone();
    leapfrog(model, cfg, &mut mom, hp.dt, hp.n_md)?;
    let h1 = mom.kinetic() + model.action(cfg);
    let dh = h1 - h0;
    if !dh.is_finite() {
        *cfg = backup;
        return Err(HmcError::NonFiniteEnergy { trajectory: index });
    }
    let r: f64 = rng.random();
    let accepted = r < (-dh).exp();
    if accepted {
        let per_site = cfg.group_links_per_site().max(1);
        reunitarize_links(cfg.group_links_mut()).map_err(|(link, source)| HmcError::Drift {
            trajectory: index,
            site: link / per_site,
            source,
        })?;
    } else {
        *cfg = backup;
    }
    Ok(TrajectoryRecord { index, dh, accepted, observables: None })
}

/// ΔH of one leapfrog trajectory from fixed momenta, leaving `cfg` untouched.
pub fn energy_violation<M: Model>(model: &M, cfg: &M::Config, mom: &Momenta, dt: f64, n_md: usize) -> Result<f64, HmcError> {
    let mut work = cfg.clone();
    let mut p = mom.clone();
    let h0 = p.kinetic() + model.action(&work);
    leapfrog(model, &mut work, &mut p, dt, n_md)?;
    Ok(p.kinetic() + model.action(&work) - h0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Lattice, LatticeShape};
    use crate::orbifold::{OrbifoldAction, OrbifoldConfig};
    use crate::params::PhysParams;
    use crate::wilson::{WilsonAction, WilsonConfig};
    use rand::SeedableRng;
    use std::sync::Arc;

    fn lattice() -> Arc<Lattice> {
        Arc::new(Lattice::new(LatticeShape::cubic(4, 2).unwrap()))
    }

    fn max_link_diff<F: Fields>(a: &F, b: &F) -> f64 {
        let g = a
            .group_links()
            .iter()
            .zip(b.group_links())
            .map(|(x, y)| x.max_diff(y))
            .fold(0.0, f64::max);
        let f = a.flat_links().iter().zip(b.flat_links()).map(|(x, y)| x.max_diff(y)).fold(0.0, f64::max);
        g.max(f)
    }

    fn reversibility<M: Model>(model: &M, cfg: &M::Config, seed: u64) -> f64 {
        let mut rng = SimRng::seed_from_u64(seed);
        let mut mom = Momenta::refresh(cfg, &mut rng);
        let mut work = cfg.clone();
        leapfrog(model, &mut work, &mut mom, 0.05, 20).unwrap();
        mom.negate();
        leapfrog(model, &mut work, &mut mom, 0.05, 20).unwrap();
        max_link_diff(cfg, &work)
    }

    #[test]
    fn leapfrog_is_reversible_wilson() {
        let lat = lattice();
        let p = PhysParams::new(2, 2, 1.0, 0.3, 0.3).unwrap();
        let mut rng = SimRng::seed_from_u64(1);
        let cfg = WilsonConfig::hot(lat, 2, &mut rng);
        assert!(reversibility(&WilsonAction::new(p), &cfg, 2) < 1e-8);
    }

    #[test]
    fn leapfrog_is_reversible_orbifold() {
        let lat = lattice();
        let p = PhysParams::new(2, 2, 1.0, 0.3, 0.3).unwrap().with_mass(50.0);
        let mut rng = SimRng::seed_from_u64(3);
        let cfg = OrbifoldConfig::random_near_frozen(lat, &p, 0.05, &mut rng);
        assert!(reversibility(&OrbifoldAction::new(p), &cfg, 4) < 1e-8);
    }

    #[test]
    fn zero_momenta_at_fixed_point() {
        let lat = lattice();
        let p = PhysParams::new(3, 2, 1.0, 0.3, 0.3).unwrap().with_mass(100.0);
        let cfg = OrbifoldConfig::frozen_identity(lat, &p);
        let mut work = cfg.clone();
        let mut mom = Momenta::zeros_like(&cfg);
        leapfrog(&OrbifoldAction::new(p), &mut work, &mut mom, 0.1, 10).unwrap();
        // √c·1 is exact only up to rounding of √c, so forces are O(ε)
        assert!(max_link_diff(&cfg, &work) < 1e-14);
    }

    #[test]
    fn rejected_trajectory_restores_state() {
        let lat = lattice();
        let p = PhysParams::new(2, 2, 1.0, 0.3, 0.3).unwrap();
        let mut rng = SimRng::seed_from_u64(5);
        let cfg = WilsonConfig::hot(lat, 2, &mut rng);
        // huge step: certain rejection
        let hp = HmcParams { dt: 0.9, n_md: 3, ..Default::default() };
        let mut work = cfg.clone();
        let rec = hmc_trajectory(&WilsonAction::new(p), &mut work, &hp, &mut rng, 0).unwrap();
        assert!(!rec.accepted);
        assert_eq!(work.links(), cfg.links());
    }

    #[test]
    fn fixed_seed_is_bit_reproducible() {
        let lat = lattice();
        let p = PhysParams::new(2, 2, 1.0, 0.3, 0.3).unwrap();
        let act = WilsonAction::new(p);
        let hp = HmcParams { dt: 0.1, n_md: 10, ..Default::default() };
        let run = || {
            let mut rng = SimRng::seed_from_u64(42);
            let mut cfg = WilsonConfig::cold(lat.clone(), 2);
            let recs: Vec<_> = (0..5).map(|i| hmc_trajectory(&act, &mut cfg, &hp, &mut rng, i).unwrap()).collect();
            (recs, cfg)
        };
        let (r1, c1) = run();
        let (r2, c2) = run();
        assert_eq!(r1, r2);
        assert_eq!(c1.links(), c2.links());
    }

    #[test]
    fn flat_momentum_variance_is_one_half() {
        let lat = lattice();
        let p = PhysParams::new(2, 2, 1.0, 0.3, 0.3).unwrap();
        let cfg = OrbifoldConfig::frozen_identity(lat, &p);
        let mut rng = SimRng::seed_from_u64(6);
        let mut sum = 0.0;
        let mut count = 0.0;
        for _ in 0..50 {
            let m = Momenta::refresh(&cfg, &mut rng);
            for z in &m.flat {
                for e in z.entries() {
                    sum += e.re * e.re + e.im * e.im;
                    count += 2.0;
                }
            }
        }
        let var = sum / count;
        assert!((var - 0.5).abs() < 0.02, "variance {var}");
    }
}
