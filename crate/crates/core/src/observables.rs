//! Measurements on Wilson and orbifold configurations.
//!
//! Traces are unnormalised (Tr, not Tr/N) and averaged over sites and
//! directions. For orbifold configurations the unitary parts of the spatial
//! links come from a polar decomposition Z = √c·W·U done at measurement time.

use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::{Lattice, TIME};
use crate::matalg::{polar_decompose, ComplexMatrix, MatAlgError, PolarPair, SpecialUnitary};
use crate::orbifold::OrbifoldConfig;
use crate::params::PhysParams;
use crate::wilson::WilsonConfig;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("polar decomposition failed at site {site}, direction {direction}: {source}")]
pub struct MeasureError {
    pub site: usize,
    pub direction: usize,
    pub source: MatAlgError,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObservableSnapshot {
    pub plaq_z: f64,
    pub plaq_u_spatial: f64,
    pub plaq_u_temporal: f64,
    pub tr_w_dev: f64,
    pub re_det_u: f64,
    pub im_det_u: f64,
    pub re_p: f64,
    pub im_p: f64,
    pub abs_p: f64,
}

impl ObservableSnapshot {
    pub const NAMES: [&'static str; 9] = [
        "plaq_z",
        "plaq_u_spatial",
        "plaq_u_temporal",
        "tr_w_dev",
        "re_det_u",
        "im_det_u",
        "re_p",
        "im_p",
        "abs_p",
    ];

    pub fn values(&self) -> [f64; 9] {
        [
            self.plaq_z,
            self.plaq_u_spatial,
            self.plaq_u_temporal,
            self.tr_w_dev,
            self.re_det_u,
            self.im_det_u,
            self.re_p,
            self.im_p,
            self.abs_p,
        ]
    }

    pub fn from_values(v: [f64; 9]) -> Self {
        Self {
            plaq_z: v[0],
            plaq_u_spatial: v[1],
            plaq_u_temporal: v[2],
            tr_w_dev: v[3],
            re_det_u: v[4],
            im_det_u: v[5],
            re_p: v[6],
            im_p: v[7],
            abs_p: v[8],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

/// Site-averaged Re Tr of the j<k spatial loops A_j(n)A_k(n+ĵ)A_j(n+k̂)†A_k(n)†.
/// Zero when d = 1.
fn spatial_loop_average(lat: &Lattice, link: impl Fn(usize, usize) -> ComplexMatrix) -> f64 {
    let d = lat.d();
    let pairs = d * (d - 1) / 2;
    if pairs == 0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for site in lat.sites() {
        for j in 1..=d {
            for k in (j + 1)..=d {
                let a = link(site, j) * link(lat.up(site, j), k);
                let b = link(site, k) * link(lat.up(site, k), j);
                sum += a.re_trace_mul(&b.adjoint());
            }
        }
    }
    sum / (lat.volume() * pairs) as f64
}

/// Site-averaged Re Tr of U_t(n)A_j(n+t̂)U_t(n+ĵ)†A_j(n)†.
fn temporal_loop_average(lat: &Lattice, ut: impl Fn(usize) -> ComplexMatrix, link: impl Fn(usize, usize) -> ComplexMatrix) -> f64 {
    let d = lat.d();
    let mut sum = 0.0;
    for site in lat.sites() {
        for j in 1..=d {
            let a = ut(site) * link(lat.up(site, TIME), j);
            let b = link(site, j) * ut(lat.up(site, j));
            sum += a.re_trace_mul(&b.adjoint());
        }
    }
    sum / (lat.volume() * d) as f64
}

/// (1/V_s) Σ_x (1/N) Tr Π_t U_t(t, x).
pub fn polyakov(lat: &Lattice, n_colors: usize, ut: &[SpecialUnitary]) -> Complex64 {
    let n_t = lat.shape().n_t();
    let vs = lat.shape().spatial_volume();
    let mut sum = Complex64::new(0.0, 0.0);
    for x in 0..vs {
        let mut line = ComplexMatrix::identity(n_colors);
        for t in 0..n_t {
            line *= ut[lat.site_at(t, x)].matrix();
        }
        sum += line.trace();
    }
    sum / (vs * n_colors) as f64
}

/// Polar parts of every spatial link, laid out like the Z links.
fn polar_parts(cfg: &OrbifoldConfig, c: f64) -> Result<Vec<PolarPair>, MeasureError> {
    let d = cfg.lattice().d();
    cfg.z_links()
        .iter()
        .enumerate()
        .map(|(i, z)| polar_decompose(z, c).map_err(|source| MeasureError { site: i / d, direction: i % d + 1, source }))
        .collect()
}

/// (plaq_z, plaq_u_spatial, plaq_u_temporal) for an orbifold configuration.
pub fn orbifold_plaquettes(cfg: &OrbifoldConfig, p: &PhysParams) -> Result<(f64, f64, f64), MeasureError> {
    let parts = polar_parts(cfg, p.c())?;
    Ok(plaquettes_from_parts(cfg, &parts))
}

fn plaquettes_from_parts(cfg: &OrbifoldConfig, parts: &[PolarPair]) -> (f64, f64, f64) {
    let lat = cfg.lattice();
    let d = lat.d();
    let u = |s: usize, j: usize| parts[s * d + j - 1].u;
    let plaq_z = spatial_loop_average(lat, |s, j| *cfg.z(s, j));
    let plaq_us = spatial_loop_average(lat, u);
    let plaq_ut = temporal_loop_average(lat, |s| cfg.ut(s).matrix(), u);
    (plaq_z, plaq_us, plaq_ut)
}

/// (plaq_z, plaq_u_spatial, plaq_u_temporal) for a Wilson configuration, with
/// plaq_z reported as c²·plaq_u_spatial.
pub fn wilson_plaquettes(cfg: &WilsonConfig, p: &PhysParams) -> (f64, f64, f64) {
    let lat = cfg.lattice();
    let link = |s: usize, mu: usize| cfg.link(s, mu).matrix();
    let us = spatial_loop_average(lat, link);
    let ut = temporal_loop_average(lat, |s| cfg.link(s, TIME).matrix(), link);
    let c = p.c();
    (c * c * us, us, ut)
}

/// Averages of Tr(W − 1)² and det U over sites and spatial directions.
pub fn w_and_det(cfg: &OrbifoldConfig, p: &PhysParams) -> Result<(f64, Complex64), MeasureError> {
    Ok(w_and_det_from_parts(&polar_parts(cfg, p.c())?))
}

fn w_and_det_from_parts(parts: &[PolarPair]) -> (f64, Complex64) {
    let mut dev = 0.0;
    let mut det = Complex64::new(0.0, 0.0);
    for pp in parts {
        let m = pp.w - ComplexMatrix::identity(pp.w.n());
        dev += m.re_trace_mul(&m);
        det += pp.u.det();
    }
    let n = parts.len() as f64;
    (dev / n, det / n)
}

pub fn measure_wilson(cfg: &WilsonConfig, p: &PhysParams) -> ObservableSnapshot {
    let (plaq_z, plaq_u_spatial, plaq_u_temporal) = wilson_plaquettes(cfg, p);
    let lat = cfg.lattice();
    let ut: Vec<SpecialUnitary> = lat.sites().map(|s| *cfg.link(s, TIME)).collect();
    let poly = polyakov(lat, cfg.n_colors(), &ut);
    ObservableSnapshot {
        plaq_z,
        plaq_u_spatial,
        plaq_u_temporal,
        tr_w_dev: 0.0,
        re_det_u: 1.0,
        im_det_u: 0.0,
        re_p: poly.re,
        im_p: poly.im,
        abs_p: poly.norm(),
    }
}

pub fn measure_orbifold(cfg: &OrbifoldConfig, p: &PhysParams) -> Result<ObservableSnapshot, MeasureError> {
    let parts = polar_parts(cfg, p.c())?;
    let (plaq_z, plaq_u_spatial, plaq_u_temporal) = plaquettes_from_parts(cfg, &parts);
    let (tr_w_dev, det) = w_and_det_from_parts(&parts);
    let poly = polyakov(cfg.lattice(), cfg.n_colors(), cfg.temporal_links());
    Ok(ObservableSnapshot {
        plaq_z,
        plaq_u_spatial,
        plaq_u_temporal,
        tr_w_dev,
        re_det_u: det.re,
        im_det_u: det.im,
        re_p: poly.re,
        im_p: poly.im,
        abs_p: poly.norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::LatticeShape;
    use crate::orbifold::frozen_reduce;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn lattice(n_t: usize, n_s: &[usize]) -> Arc<Lattice> {
        Arc::new(Lattice::new(LatticeShape::new(n_t, n_s.to_vec()).unwrap()))
    }

    fn params(n: usize) -> PhysParams {
        PhysParams::new(n, 2, 1.0, 0.3, 0.3).unwrap().with_mass(1000.0)
    }

    fn max_snapshot_diff(a: &ObservableSnapshot, b: &ObservableSnapshot) -> f64 {
        a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn cold_wilson_values() {
        let p = params(2);
        let s = measure_wilson(&WilsonConfig::cold(lattice(4, &[4, 4]), 2), &p);
        assert_eq!(s.plaq_u_spatial, 2.0);
        assert_eq!(s.plaq_u_temporal, 2.0);
        assert!((s.plaq_z - 0.5).abs() < 1e-15);
        assert_eq!((s.re_p, s.im_p, s.abs_p), (1.0, 0.0, 1.0));
    }

    #[test]
    fn identity_frozen_orbifold_values() {
        let p = params(2);
        let cfg = OrbifoldConfig::frozen_identity(lattice(4, &[4, 4]), &p);
        let s = measure_orbifold(&cfg, &p).unwrap();
        assert!((s.plaq_z - 0.5).abs() < 1e-14);
        assert!((4.0 * s.plaq_z - s.plaq_u_spatial).abs() < 1e-13);
        assert!((s.plaq_u_temporal - 2.0).abs() < 1e-13);
        assert!(s.tr_w_dev.abs() < 1e-20);
        assert!((s.re_det_u - 1.0).abs() < 1e-14 && s.im_det_u.abs() < 1e-14);
        assert!((s.abs_p - 1.0).abs() < 1e-14);
    }

    #[test]
    fn frozen_reduce_matches_wilson_measurement() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 2..=3 {
            let p = params(n);
            let w = WilsonConfig::hot(lattice(4, &[4, 4]), n, &mut rng);
            let a = measure_wilson(&w, &p);
            let b = measure_orbifold(&frozen_reduce(&w, &p), &p).unwrap();
            assert!(max_snapshot_diff(&a, &b) < 1e-10, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn polyakov_center_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = params(3);
        let cfg = OrbifoldConfig::random_near_frozen(lattice(4, &[3, 3]), &p, 0.2, &mut rng);
        let l = cfg.lattice();
        let p0 = polyakov(l, 3, cfg.temporal_links());
        let p1 = polyakov(l, 3, cfg.center_transform(2, 1).temporal_links());
        let phase = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        assert!((p1 - p0 * phase).norm() < 1e-14);
        assert!((p1.norm() - p0.norm()).abs() < 1e-14);
    }

    #[test]
    fn polyakov_brute_force_two_slices() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let l = lattice(2, &[3, 2]);
        let ut: Vec<_> = l.sites().map(|_| SpecialUnitary::random_haar(&mut rng, 2)).collect();
        let mut expect = Complex64::new(0.0, 0.0);
        for x0 in 0..3 {
            for x1 in 0..2 {
                let a = l.site_index(&[0, x0, x1]).0;
                let b = l.site_index(&[1, x0, x1]).0;
                expect += (ut[a].matrix() * ut[b].matrix()).trace() / 2.0;
            }
        }
        expect /= 6.0;
        assert!((polyakov(&l, 2, &ut) - expect).norm() < 1e-15);
    }

    #[test]
    fn perturbative_w_deviation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = params(2);
        let l = lattice(2, &[2, 2]);
        let mut cfg = OrbifoldConfig::frozen_identity(l.clone(), &p);
        // H = σ_z + 0.5 σ_x, Tr H² = 2.5
        let h = ComplexMatrix::from_rows(&[
            &[Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)],
            &[Complex64::new(0.5, 0.0), Complex64::new(-1.0, 0.0)],
        ]);
        let eps = 1e-4;
        for s in l.sites() {
            for j in 1..=2 {
                let u0 = SpecialUnitary::random_haar(&mut rng, 2);
                let z = ((ComplexMatrix::identity(2) + h.scale(eps)) * u0.matrix()).scale(p.c().sqrt());
                cfg.set_z(s, j, z);
            }
        }
        let (dev, det) = w_and_det(&cfg, &p).unwrap();
        assert!((dev - eps * eps * 2.5).abs() < 1e-3 * eps * eps * 2.5);
        assert!((det - 1.0).norm() < 1e-12);
    }

    #[test]
    fn invariances() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..=3 {
            let p = params(n);
            let cfg = OrbifoldConfig::random_near_frozen(lattice(4, &[4, 3]), &p, 0.3, &mut rng);
            let l = cfg.lattice().clone();
            let s0 = measure_orbifold(&cfg, &p).unwrap();
            let omega: Vec<_> = l.sites().map(|_| SpecialUnitary::random_haar(&mut rng, n)).collect();
            let g = measure_orbifold(&cfg.gauge_transform(&omega), &p).unwrap();
            assert!(max_snapshot_diff(&s0, &g) < 1e-10, "{s0:?}\n{g:?}");
            for mu in 0..3 {
                assert!(max_snapshot_diff(&s0, &measure_orbifold(&cfg.translated(mu), &p).unwrap()) < 1e-12);
            }
            let c = measure_orbifold(&cfg.center_transform(0, 1), &p).unwrap();
            for (i, (a, b)) in s0.values().iter().zip(c.values()).enumerate() {
                if !matches!(ObservableSnapshot::NAMES[i], "re_p" | "im_p") {
                    assert!((a - b).abs() < 1e-12, "{}", ObservableSnapshot::NAMES[i]);
                }
            }
            assert!(s0.tr_w_dev >= 0.0 && s0.re_det_u.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn singular_link_is_reported() {
        let p = params(2);
        let mut cfg = OrbifoldConfig::frozen_identity(lattice(2, &[2, 2]), &p);
        cfg.set_z(3, 2, ComplexMatrix::zeros(2));
        let e = measure_orbifold(&cfg, &p).unwrap_err();
        assert_eq!((e.site, e.direction), (3, 2));
    }
}
