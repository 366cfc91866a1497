//! Binned jackknife errors and the weighted quadratic fit in x = 1/m².

use thiserror::Error;

pub const DEFAULT_BIN_SIZE: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("series of length {len} is too short for bin size {bin_size} (need at least two bins)")]
    InsufficientStatistics { len: usize, bin_size: usize },
    #[error("bin size must be at least 1")]
    ZeroBinSize,
    #[error("series have different lengths")]
    LengthMismatch,
    #[error("quadratic fit needs at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("point {index} has non-positive or non-finite error {sigma}")]
    BadSigma { index: usize, sigma: f64 },
    #[error("fit design matrix is singular (fewer than 3 distinct x values or degenerate data)")]
    SingularFit,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleEstimate {
    pub mean: f64,
    pub err: f64,
    pub n_bins: usize,
    pub bin_size: usize,
}

fn bin_means(series: &[f64], bin_size: usize) -> Result<Vec<f64>, AnalysisError> {
    if bin_size == 0 {
        return Err(AnalysisError::ZeroBinSize);
    }
    let n_bins = series.len() / bin_size;
    if n_bins < 2 {
        return Err(AnalysisError::InsufficientStatistics { len: series.len(), bin_size });
    }
    // trailing partial bin is dropped
    Ok(series.chunks_exact(bin_size).map(|c| c.iter().sum::<f64>() / bin_size as f64).collect())
}

/// Jackknife estimate of the mean of `series` over bins of `bin_size`.
pub fn jackknife(series: &[f64], bin_size: usize) -> Result<EnsembleEstimate, AnalysisError> {
    jackknife_derived(&[series], bin_size, |m| m[0])
}

/// Jackknife estimate of f(⟨x₀⟩, ⟨x₁⟩, …) for several equally long series
/// measured on the same configurations.
pub fn jackknife_derived<F>(series: &[&[f64]], bin_size: usize, f: F) -> Result<EnsembleEstimate, AnalysisError>
where
    F: Fn(&[f64]) -> f64,
{
    let len = series.first().map_or(0, |s| s.len());
    if series.iter().any(|s| s.len() != len) {
        return Err(AnalysisError::LengthMismatch);
    }
    let bins: Vec<Vec<f64>> = series.iter().map(|s| bin_means(s, bin_size)).collect::<Result<_, _>>()?;
    let n_bins = bins[0].len();
    let totals: Vec<f64> = bins.iter().map(|b| b.iter().sum()).collect();
    let full: Vec<f64> = totals.iter().map(|t| t / n_bins as f64).collect();
    let mean = f(&full);

    let mut loo = vec![0.0; series.len()];
    let estimates: Vec<f64> = (0..n_bins)
        .map(|i| {
            for (k, slot) in loo.iter_mut().enumerate() {
                *slot = (totals[k] - bins[k][i]) / (n_bins - 1) as f64;
            }
            f(&loo)
        })
        .collect();
    let jk_mean = estimates.iter().sum::<f64>() / n_bins as f64;
    let var = estimates.iter().map(|e| (e - jk_mean).powi(2)).sum::<f64>() * (n_bins - 1) as f64 / n_bins as f64;
    Ok(EnsembleEstimate { mean, err: var.sqrt(), n_bins, bin_size })
}

/// ⟨|P|²⟩ − ⟨|P|⟩² with jackknife error.
pub fn susceptibility(abs_p: &[f64], bin_size: usize) -> Result<EnsembleEstimate, AnalysisError> {
    let sq: Vec<f64> = abs_p.iter().map(|p| p * p).collect();
    jackknife_derived(&[abs_p, &sq], bin_size, |m| m[1] - m[0] * m[0])
}

/// Jackknife errors for bin sizes 1, 2, 4, … while at least `min_bins` bins
/// remain. A plateau in the error signals bins longer than the
/// autocorrelation time.
pub fn binning_report(series: &[f64], min_bins: usize) -> Vec<EnsembleEstimate> {
    let mut out = Vec::new();
    let mut b = 1;
    while series.len() / b >= min_bins.max(2) {
        if let Ok(e) = jackknife(series, b) {
            out.push(e);
        }
        b *= 2;
    }
    out
}

/// y = a0 + a1·x + a2·x², x = 1/m².
#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub a0_err: f64,
    pub chi2_per_dof: f64,
    /// Covariance of (a0, a1, a2).
    pub cov: [[f64; 3]; 3],
    pub n_points: usize,
}

impl FitResult {
    pub fn eval(&self, x: f64) -> f64 {
        self.a0 + self.a1 * x + self.a2 * x * x
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitPoint {
    pub x: f64,
    pub y: f64,
    pub sigma: f64,
}

/// Solves A v = b for symmetric positive-definite 3×3 A; also returns A⁻¹.
fn cholesky_solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<([f64; 3], [[f64; 3]; 3])> {
    let mut l = [[0.0; 3]; 3];
    let scale = a[0][0].max(a[1][1]).max(a[2][2]);
    for i in 0..3 {
        for j in 0..=i {
            let s: f64 = a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if !(s > 1e-14 * scale) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let solve = |rhs: [f64; 3]| {
        let mut y = [0.0; 3];
        for i in 0..3 {
            y[i] = (rhs[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
        }
        let mut x = [0.0; 3];
        for i in (0..3).rev() {
            x[i] = (y[i] - (i + 1..3).map(|k| l[k][i] * x[k]).sum::<f64>()) / l[i][i];
        }
        x
    };
    let mut inv = [[0.0; 3]; 3];
    for c in 0..3 {
        let mut e = [0.0; 3];
        e[c] = 1.0;
        let col = solve(e);
        for r in 0..3 {
            inv[r][c] = col[r];
        }
    }
    Some((solve(b), inv))
}

/// Weighted least-squares quadratic fit through the normal equations.
///
/// x is rescaled by its largest magnitude before forming the normal matrix,
/// which keeps it well conditioned for x ~ 1/m² ≪ 1.
pub fn quad_extrapolate(points: &[FitPoint]) -> Result<FitResult, AnalysisError> {
    if points.len() < 4 {
        return Err(AnalysisError::TooFewPoints(points.len()));
    }
    for (index, p) in points.iter().enumerate() {
        if !(p.sigma > 0.0 && p.sigma.is_finite()) {
            return Err(AnalysisError::BadSigma { index, sigma: p.sigma });
        }
    }
    let mut xs: Vec<f64> = points.iter().map(|p| p.x).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 3 {
        return Err(AnalysisError::SingularFit);
    }
    let s = points.iter().map(|p| p.x.abs()).fold(0.0, f64::max);
    let s = if s > 0.0 { s } else { 1.0 };

    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for p in points {
        let u = p.x / s;
        let row = [1.0, u, u * u];
        let w = 1.0 / (p.sigma * p.sigma);
        for i in 0..3 {
            atb[i] += w * row[i] * p.y;
            for j in 0..3 {
                ata[i][j] += w * row[i] * row[j];
            }
        }
    }
    let (b, inv) = cholesky_solve3(ata, atb).ok_or(AnalysisError::SingularFit)?;
    let scales = [1.0, 1.0 / s, 1.0 / (s * s)];
    let coef = [b[0] * scales[0], b[1] * scales[1], b[2] * scales[2]];
    let mut cov = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            cov[i][j] = inv[i][j] * scales[i] * scales[j];
        }
    }
    let chi2: f64 = points
        .iter()
        .map(|p| {
            let r = (p.y - (coef[0] + coef[1] * p.x + coef[2] * p.x * p.x)) / p.sigma;
            r * r
        })
        .sum();
    let dof = points.len() - 3;
    Ok(FitResult {
        a0: coef[0],
        a1: coef[1],
        a2: coef[2],
        a0_err: cov[0][0].sqrt(),
        chi2_per_dof: chi2 / dof as f64,
        cov,
        n_points: points.len(),
    })
}

/// (a − b)/√(σ_a² + σ_b²)
pub fn pull(a: f64, sigma_a: f64, b: f64, sigma_b: f64) -> f64 {
    (a - b) / (sigma_a * sigma_a + sigma_b * sigma_b).sqrt()
}
