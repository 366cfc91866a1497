use std::sync::Arc;

use orbifold_lattice::analysis::{quad_extrapolate, FitPoint};
use orbifold_lattice::geometry::{Lattice, LatticeShape, TIME};
use orbifold_lattice::matalg::{
    exp_algebra, generators, polar_decompose, reunitarize, unitarity_error, AlgebraElement, ComplexMatrix, Complex64,
};
use orbifold_lattice::observables::measure_orbifold;
use orbifold_lattice::orbifold::{OrbifoldAction, OrbifoldConfig};
use orbifold_lattice::params::PhysParams;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn algebra(n: usize, coords: &[f64]) -> AlgebraElement {
    let mut x = AlgebraElement::zero(n);
    for (g, c) in generators(n).iter().zip(coords) {
        x.add_scaled(*c, g);
    }
    x
}

fn matrix(n: usize, v: &[f64]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let k = 2 * (i * n + j);
            m.set(i, j, Complex64::new(v[k], v[k + 1]));
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exp_inverse(n in 2usize..=3, coords in prop::collection::vec(-3.0f64..3.0, 8), s in -2.0f64..2.0) {
        let x = algebra(n, &coords);
        let u = exp_algebra(&x, s).unwrap();
        let v = exp_algebra(&x, -s).unwrap();
        prop_assert!(u.compose(&v).max_diff(&ComplexMatrix::identity(n)) <= 1e-12);
        prop_assert!(unitarity_error(&u) <= 1e-12);
        prop_assert!((u.det() - 1.0).norm() <= 1e-12);
    }

    #[test]
    fn reunitarize_idempotent(n in 2usize..=3, coords in prop::collection::vec(-3.0f64..3.0, 8), eps in 0.0f64..1e-7) {
        let u = exp_algebra(&algebra(n, &coords), 1.0).unwrap();
        let once = reunitarize(&u.matrix().scale(1.0 + eps)).unwrap();
        let twice = reunitarize(&once.matrix()).unwrap();
        prop_assert!(once.max_diff(&twice) <= 1e-14);
        prop_assert!(once.max_diff(&u) <= 1e-10);
    }

    #[test]
    fn polar_reconstructs(n in 2usize..=3, v in prop::collection::vec(-1.0f64..1.0, 18), c in 0.1f64..2.0) {
        let z = matrix(n, &v) + ComplexMatrix::identity(n).scale(2.0);
        let p = polar_decompose(&z, c).unwrap();
        prop_assert!(p.reconstruct(c).max_diff(&z) <= 1e-10 * z.max_abs());
        prop_assert!(p.w.max_diff(&p.w.adjoint()) <= 1e-14);
        prop_assert!(unitarity_error(&p.u) <= 1e-12);
    }

    #[test]
    fn adjugate_identity(n in 2usize..=3, v in prop::collection::vec(-2.0f64..2.0, 18)) {
        let z = matrix(n, &v);
        let lhs = z * z.adjugate();
        let rhs = ComplexMatrix::identity(n).scale_c(z.det());
        prop_assert!(lhs.max_diff(&rhs) <= 1e-12 * z.det().norm().max(1e-300) + 1e-13);
    }

    #[test]
    fn fit_shift_equivariance(ys in prop::collection::vec(-2.0f64..2.0, 5), shift in -10.0f64..10.0, scale in 0.1f64..10.0) {
        let xs = [1.0 / 250.0, 1.0 / 500.0, 1.0 / 1000.0, 1.0 / 2000.0, 1.0 / 4000.0];
        let pts: Vec<FitPoint> = xs.iter().zip(&ys).map(|(&x, &y)| FitPoint { x, y, sigma: 0.01 }).collect();
        let base = quad_extrapolate(&pts).unwrap();
        let shifted: Vec<FitPoint> = pts.iter().map(|p| FitPoint { y: p.y + shift, ..*p }).collect();
        prop_assert!((quad_extrapolate(&shifted).unwrap().a0 - base.a0 - shift).abs() <= 1e-9 * (1.0 + shift.abs()));
        let scaled: Vec<FitPoint> = pts.iter().map(|p| FitPoint { sigma: p.sigma * scale, ..*p }).collect();
        let r = quad_extrapolate(&scaled).unwrap();
        prop_assert!((r.a0 - base.a0).abs() <= 1e-9);
        prop_assert!((r.a0_err / base.a0_err - scale).abs() <= 1e-9 * scale);
    }

    #[test]
    fn neighbours_invert(n_t in 2usize..6, n1 in 2usize..6, n2 in 2usize..6, site_seed in 0usize..1000) {
        let l = Lattice::new(LatticeShape::new(n_t, vec![n1, n2]).unwrap());
        let s = site_seed % l.volume();
        for mu in 0..3 {
            prop_assert_eq!(l.dn(l.up(s, mu), mu), s);
            prop_assert_eq!(l.up(l.up(s, mu), TIME), l.up(l.up(s, TIME), mu));
        }
    }

    #[test]
    fn orbifold_terms_non_negative_and_invariant(seed in 0u64..1000, spread in 0.0f64..0.6, n in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lat = Arc::new(Lattice::new(LatticeShape::cubic(3, 2).unwrap()));
        let p = PhysParams::new(n, 2, 1.0, 0.3, 0.3).unwrap().with_mass(500.0);
        let cfg = OrbifoldConfig::random_near_frozen(lat.clone(), &p, spread, &mut rng);
        let act = OrbifoldAction::new(p.clone());
        let terms = act.action_terms(&cfg);
        let s = terms.total();
        prop_assert!(terms.0.iter().all(|&t| t >= -1e-12 * s.abs()));
        let moved = cfg.translated(1);
        prop_assert!((act.action(&moved) - s).abs() <= 1e-12 * s.abs().max(1.0));
        if let (Ok(a), Ok(b)) = (measure_orbifold(&cfg, &p), measure_orbifold(&moved, &p)) {
            for (x, y) in a.values().iter().zip(b.values()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
    }
}
