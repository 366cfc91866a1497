use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("{name} must be positive, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("number of colours must be 2 or 3, got {0}")]
    UnsupportedColors(usize),
    #[error("spatial dimension must be at least 1")]
    NoSpatialDimensions,
}

/// Physical parameters shared by both actions.
///
/// `g2` is the coupling g_d² (mass dimension 3 − d), `a` and `a_t` the spatial
/// and temporal spacings, `m2` and `m2_u1` the masses of the orbifold
/// constraint terms (ignored by the Wilson action).
#[derive(Clone, Debug, PartialEq)]
pub struct PhysParams {
    pub n_colors: usize,
    pub d: usize,
    pub g2: f64,
    pub a: f64,
    pub a_t: f64,
    pub m2: f64,
    pub m2_u1: f64,
}

impl PhysParams {
    pub fn new(n_colors: usize, d: usize, g2: f64, a: f64, a_t: f64) -> Result<Self, ParamError> {
        let p = Self { n_colors, d, g2, a, a_t, m2: 0.0, m2_u1: 0.0 };
        p.validate()?;
        Ok(p)
    }

    /// Sets m² = m²_U(1) = `m2`.
    pub fn with_mass(mut self, m2: f64) -> Self {
        self.m2 = m2;
        self.m2_u1 = m2;
        self
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if !(2..=3).contains(&self.n_colors) {
            return Err(ParamError::UnsupportedColors(self.n_colors));
        }
        if self.d == 0 {
            return Err(ParamError::NoSpatialDimensions);
        }
        for (name, value) in [("g2", self.g2), ("a", self.a), ("a_t", self.a_t)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ParamError::NotPositive { name, value });
            }
        }
        for (name, value) in [("m2", self.m2), ("m2_u1", self.m2_u1)] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(ParamError::Negative { name, value });
            }
        }
        Ok(())
    }

    /// c = a^{d−2}/(2g²), the squared magnitude of a frozen link.
    pub fn c(&self) -> f64 {
        self.a.powi(self.d as i32 - 2) / (2.0 * self.g2)
    }

    /// T = 1/(n_t·a_t).
    pub fn temperature(&self, n_t: usize) -> f64 {
        1.0 / (n_t as f64 * self.a_t)
    }

    /// Coefficient of Re Tr of a temporal plaquette in the Wilson action, 2c/a_t.
    pub fn beta_temporal(&self) -> f64 {
        2.0 * self.c() / self.a_t
    }

    /// Coefficient of Re Tr of a spatial plaquette in the Wilson action, a_t·a^{d−4}/g².
    pub fn beta_spatial(&self) -> f64 {
        self.a_t * self.a.powi(self.d as i32 - 4) / self.g2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_constants() {
        let p = PhysParams::new(2, 2, 1.0, 0.3, 0.3).unwrap();
        assert!((p.c() - 0.5).abs() < 1e-15);
        assert!((p.temperature(4) - 1.0 / 1.2).abs() < 1e-15);
        let p3 = PhysParams::new(3, 3, 2.0, 0.5, 0.1).unwrap();
        assert!((p3.c() - 0.5 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(matches!(PhysParams::new(4, 2, 1.0, 0.3, 0.3), Err(ParamError::UnsupportedColors(4))));
        assert!(matches!(PhysParams::new(2, 2, 0.0, 0.3, 0.3), Err(ParamError::NotPositive { name: "g2", .. })));
        assert!(matches!(PhysParams::new(2, 2, 1.0, 0.3, -1.0), Err(ParamError::NotPositive { name: "a_t", .. })));
        let mut p = PhysParams::new(2, 2, 1.0, 0.3, 0.3).unwrap();
        p.m2 = -1.0;
        assert!(p.validate().is_err());
    }
}
