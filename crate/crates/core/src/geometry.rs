//! Periodic (d+1)-dimensional lattice: site indexing and neighbour tables.
//!
//! Sites are stored row-major with time slowest, so the sites of one time
//! slice are contiguous and a Polyakov line steps by the spatial volume.
//! Direction 0 is time; directions 1..=d are spatial.

use thiserror::Error;

/// Index of the temporal direction.
pub const TIME: usize = 0;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("lattice extent {extent} in direction {direction} is below 2")]
    ExtentTooSmall { direction: usize, extent: usize },
    #[error("lattice needs at least one spatial direction")]
    NoSpatialDirections,
    #[error("lattice volume overflows the index type")]
    VolumeOverflow,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticeShape {
    n_t: usize,
    n_s: Vec<usize>,
}

impl LatticeShape {
    pub fn new(n_t: usize, n_s: Vec<usize>) -> Result<Self, GeometryError> {
        if n_s.is_empty() {
            return Err(GeometryError::NoSpatialDirections);
        }
        if n_t < 2 {
            return Err(GeometryError::ExtentTooSmall { direction: TIME, extent: n_t });
        }
        for (j, &e) in n_s.iter().enumerate() {
            if e < 2 {
                return Err(GeometryError::ExtentTooSmall { direction: j + 1, extent: e });
            }
        }
        n_s.iter()
            .try_fold(n_t, |acc, &e| acc.checked_mul(e))
            .ok_or(GeometryError::VolumeOverflow)?;
        Ok(Self { n_t, n_s })
    }

    /// Hypercubic L^{d+1} lattice.
    pub fn cubic(extent: usize, d: usize) -> Result<Self, GeometryError> {
        Self::new(extent, vec![extent; d])
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn n_s(&self) -> &[usize] {
        &self.n_s
    }

    /// Number of spatial dimensions.
    pub fn d(&self) -> usize {
        self.n_s.len()
    }

    pub fn extent(&self, mu: usize) -> usize {
        if mu == TIME {
            self.n_t
        } else {
            self.n_s[mu - 1]
        }
    }

    pub fn spatial_volume(&self) -> usize {
        self.n_s.iter().product()
    }

    pub fn volume(&self) -> usize {
        self.n_t * self.spatial_volume()
    }
}

/// Flat site label in [0, V).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SiteIndex(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Lattice shape with precomputed periodic neighbour tables.
#[derive(Clone, Debug)]
pub struct Lattice {
    shape: LatticeShape,
    strides: Vec<usize>,
    up: Vec<usize>,
    dn: Vec<usize>,
}

impl Lattice {
    pub fn new(shape: LatticeShape) -> Self {
        let dims = shape.d() + 1;
        let mut strides = vec![1; dims];
        for mu in (0..dims - 1).rev() {
            strides[mu] = strides[mu + 1] * shape.extent(mu + 1);
        }
        let volume = shape.volume();
        let mut lat = Self { shape, strides, up: vec![0; volume * dims], dn: vec![0; volume * dims] };
        for site in 0..volume {
            let coords = lat.coords(SiteIndex(site));
            for mu in 0..dims {
                let extent = lat.shape.extent(mu);
                let x = coords[mu];
                let fwd = (x + 1) % extent;
                let bwd = (x + extent - 1) % extent;
                lat.up[site * dims + mu] = site - x * lat.strides[mu] + fwd * lat.strides[mu];
                lat.dn[site * dims + mu] = site - x * lat.strides[mu] + bwd * lat.strides[mu];
            }
        }
        lat
    }

    pub fn shape(&self) -> &LatticeShape {
        &self.shape
    }

    pub fn d(&self) -> usize {
        self.shape.d()
    }

    /// Number of directions, d + 1.
    pub fn n_dirs(&self) -> usize {
        self.shape.d() + 1
    }

    pub fn volume(&self) -> usize {
        self.up.len() / self.n_dirs()
    }

    pub fn sites(&self) -> impl Iterator<Item = usize> {
        0..self.volume()
    }

    /// n + μ̂
    #[inline]
    pub fn up(&self, site: usize, mu: usize) -> usize {
        self.up[site * self.n_dirs() + mu]
    }

    /// n − μ̂
    #[inline]
    pub fn dn(&self, site: usize, mu: usize) -> usize {
        self.dn[site * self.n_dirs() + mu]
    }

    pub fn neighbor(&self, s: SiteIndex, mu: usize, sign: Sign) -> SiteIndex {
        assert!(mu < self.n_dirs(), "direction {mu} out of range");
        match sign {
            Sign::Plus => SiteIndex(self.up(s.0, mu)),
            Sign::Minus => SiteIndex(self.dn(s.0, mu)),
        }
    }

    /// Coordinates (t, x_1, …, x_d).
    pub fn coords(&self, s: SiteIndex) -> Vec<usize> {
        let mut rest = s.0;
        self.strides
            .iter()
            .map(|&stride| {
                let x = rest / stride;
                rest %= stride;
                x
            })
            .collect()
    }

    /// Flat index of (t, x_1, …, x_d); coordinates are wrapped periodically.
    pub fn site_index(&self, coords: &[usize]) -> SiteIndex {
        assert_eq!(coords.len(), self.n_dirs());
        SiteIndex(
            coords
                .iter()
                .enumerate()
                .map(|(mu, &x)| (x % self.shape.extent(mu)) * self.strides[mu])
                .sum(),
        )
    }

    /// Site of time slice `t` and spatial offset `x` (0 ≤ x < spatial volume).
    #[inline]
    pub fn site_at(&self, t: usize, x: usize) -> usize {
        t * self.strides[0] + x
    }

    pub fn time_of(&self, site: usize) -> usize {
        site / self.strides[0]
    }

    /// Permutation that translates a field by one unit in +μ: result[n] = n − μ̂,
    /// so that a shifted field reads f'(n) = f(n − μ̂).
    pub fn translation_source(&self, mu: usize) -> Vec<usize> {
        self.sites().map(|s| self.dn(s, mu)).collect()
    }
}
