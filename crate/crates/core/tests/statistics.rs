use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use orbifold_lattice::analysis::{jackknife, quad_extrapolate, FitPoint};
use orbifold_lattice::geometry::{Lattice, LatticeShape};
use orbifold_lattice::hmc::{hmc_trajectory, HmcParams};
use orbifold_lattice::params::PhysParams;
use orbifold_lattice::wilson::{WilsonAction, WilsonConfig};

const M2_GRID: [f64; 5] = [250.0, 500.0, 1000.0, 2000.0, 4000.0];

#[test]
fn fit_matches_independent_least_squares() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let k = rng.random_range(4..9);
        let pts: Vec<FitPoint> = (0..k)
            .map(|i| FitPoint {
                x: (i as f64 + rng.random::<f64>()) * 1e-3,
                y: rng.random_range(-3.0..3.0),
                sigma: rng.random_range(0.01..0.5),
            })
            .collect();
        let a = DMatrix::from_fn(k, 3, |r, c| pts[r].x.powi(c as i32) / pts[r].sigma);
        let b = DVector::from_fn(k, |r, _| pts[r].y / pts[r].sigma);
        let coef = a.clone().svd(true, true).solve(&b, 1e-14).unwrap();
        let cov = (a.transpose() * &a).try_inverse().unwrap();

        let fit = quad_extrapolate(&pts).unwrap();
        let scale = coef.amax().max(1.0);
        assert!((fit.a0 - coef[0]).abs() <= 1e-9 * scale, "a0 {} vs {}", fit.a0, coef[0]);
        assert!((fit.a1 - coef[1]).abs() <= 1e-9 * scale * 1e3, "a1 {} vs {}", fit.a1, coef[1]);
        assert!((fit.a2 - coef[2]).abs() <= 1e-9 * scale * 1e6, "a2 {} vs {}", fit.a2, coef[2]);
        assert!((fit.a0_err - cov[(0, 0)].sqrt()).abs() <= 1e-9 * fit.a0_err);
        let resid = &a * &coef - &b;
        let chi2 = resid.norm_squared() / (k - 3) as f64;
        assert!((fit.chi2_per_dof - chi2).abs() <= 1e-8 * chi2.max(1.0));
    }
}

#[test]
fn synthetic_extrapolation_coverage() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (a0, a1, a2) = (1.7, -20.0, 3000.0);
    let reps = 100;
    let mut covered = 0;
    for _ in 0..reps {
        let pts: Vec<FitPoint> = M2_GRID
            .iter()
            .map(|&m2| {
                let x = 1.0 / m2;
                let truth = a0 + a1 * x + a2 * x * x;
                let series: Vec<f64> = (0..2000).map(|_| truth + 0.05 * rng.sample::<f64, _>(StandardNormal)).collect();
                let e = jackknife(&series, 20).unwrap();
                FitPoint { x, y: e.mean, sigma: e.err }
            })
            .collect();
        let fit = quad_extrapolate(&pts).unwrap();
        covered += usize::from((fit.a0 - a0).abs() <= fit.a0_err);
    }
    assert!(covered >= 60, "a0 within 1σ in {covered}/{reps} repetitions");
}

#[test]
fn small_energy_violation_means_high_acceptance() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let lat = Arc::new(Lattice::new(LatticeShape::cubic(4, 2).unwrap()));
    let act = WilsonAction::new(PhysParams::new(2, 2, 1.0, 0.3, 0.3).unwrap());
    let mut cfg = WilsonConfig::cold(lat, 2);
    let hp = HmcParams { dt: 0.01, n_md: 50, ..HmcParams::default() };
    for i in 0..200 {
        hmc_trajectory(&act, &mut cfg, &hp, &mut rng, i).unwrap();
    }
    let recs: Vec<_> = (0..500).map(|i| hmc_trajectory(&act, &mut cfg, &hp, &mut rng, i).unwrap()).collect();
    let worst = recs.iter().map(|r| r.dh.abs()).fold(0.0, f64::max);
    let acc = recs.iter().filter(|r| r.accepted).count() as f64 / recs.len() as f64;
    assert!(worst < 0.1, "max |dH| {worst}");
    assert!(acc > 0.9, "acceptance {acc}");
}
