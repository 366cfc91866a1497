//! Hybrid Monte Carlo for (d+1)-dimensional SU(N) lattice Yang-Mills theory
//! with two discretisations: the Wilson action on unitary links, and the
//! orbifold lattice action on unconstrained complex spatial links with mass
//! terms pulling them onto √c·SU(N). Large-mass runs of the latter are
//! extrapolated in 1/m² and compared against the former.

pub mod analysis;
pub mod geometry;
pub mod hmc;
pub mod matalg;
pub mod observables;
pub mod orbifold;
pub mod params;
pub mod runner;
pub mod wilson;

pub use geometry::{Lattice, LatticeShape, SiteIndex};
pub use matalg::{AlgebraElement, ComplexMatrix, SpecialUnitary};
pub use orbifold::{OrbifoldAction, OrbifoldConfig};
pub use params::PhysParams;
pub use wilson::{WilsonAction, WilsonConfig};
