use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;

use crate::analysis::{jackknife, pull, quad_extrapolate, susceptibility, EnsembleEstimate, FitPoint, FitResult};
use crate::geometry::Lattice;
use crate::hmc::{hmc_trajectory, Model, SimRng};
use crate::observables::{measure_orbifold, measure_wilson, MeasureError, ObservableSnapshot};
use crate::orbifold::{frozen_reduce, term, OrbifoldAction, OrbifoldConfig, TermMask};
use crate::params::PhysParams;
use crate::wilson::{WilsonAction, WilsonConfig};

use super::checkpoint::Checkpoint;
use super::config::{ActionKind, RunConfig, Start};
use super::csv::{read_measurements, MeasurementRow, Streams};
use super::{RunError, CHECKPOINT_FILE, CONFIG_FILE, MEASUREMENTS_FILE};

/// Spread of the random Z fluctuations in an orbifold hot start.
const HOT_SPREAD: f64 = 0.1;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub resume: bool,
    /// Stop after this many trajectories (global count) without writing a
    /// final checkpoint, as if the process had been killed.
    pub stop_after: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub config_hash: String,
    pub trajectories: u64,
    pub accepted: u64,
    /// Measurements skipped because a link could not be polar-decomposed.
    pub invalid_measurements: u64,
    pub completed: bool,
}

impl RunSummary {
    pub fn acceptance(&self) -> f64 {
        self.accepted as f64 / self.trajectories.max(1) as f64
    }
}

pub fn run_config(path: &Path) -> Result<RunConfig, RunError> {
    let text = fs::read_to_string(path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
    RunConfig::parse(&text)
}

/// Runs (or resumes) the chain described by the config file at `path`.
pub fn cmd_run(path: &Path, opts: &RunOptions) -> Result<RunSummary, RunError> {
    run_chain(&run_config(path)?, opts)
}

fn orbifold_model(rc: &RunConfig, p: PhysParams) -> OrbifoldAction {
    let mask = TermMask::all().with(term::MOMENT_MAP, rc.include_t2);
    OrbifoldAction::with_terms(p, mask)
}

/// Runs (or resumes) the chain described by `rc`.
pub fn run_chain(rc: &RunConfig, opts: &RunOptions) -> Result<RunSummary, RunError> {
    rc.validate()?;
    for w in rc.warnings() {
        log::warn!("{w}");
    }
    let lat = Arc::new(Lattice::new(rc.shape()?));
    let p = rc.phys()?;
    match rc.action {
        ActionKind::Wilson => {
            let model = WilsonAction::new(p.clone());
            drive(rc, opts, &model, |rng| match rc.start {
                Start::Cold => WilsonConfig::cold(lat.clone(), p.n_colors),
                Start::Hot => WilsonConfig::hot(lat.clone(), p.n_colors, rng),
            }, |c| Ok(measure_wilson(c, &p)))
        }
        ActionKind::Orbifold => {
            let model = orbifold_model(rc, p.clone());
            drive(rc, opts, &model, |rng| match rc.start {
                Start::Cold => OrbifoldConfig::frozen_identity(lat.clone(), &p),
                Start::Hot => OrbifoldConfig::random_near_frozen(lat.clone(), &p, HOT_SPREAD, rng),
            }, |c| measure_orbifold(c, &p))
        }
    }
}

fn drive<M, I, Ms>(rc: &RunConfig, opts: &RunOptions, model: &M, init: I, measure: Ms) -> Result<RunSummary, RunError>
where
    M: Model,
    I: FnOnce(&mut SimRng) -> M::Config,
    Ms: Fn(&M::Config) -> Result<ObservableSnapshot, MeasureError>,
{
    let dir = &rc.output_dir;
    let hash = rc.hash();
    let ck_path = dir.join(CHECKPOINT_FILE);
    let mut rng = SimRng::seed_from_u64(rc.hmc.seed);
    let mut cfg = init(&mut rng);
    let (mut next, mut accepted, mut invalid);
    let mut streams;
    if opts.resume {
        if !ck_path.exists() {
            return Err(RunError::Checkpoint(format!("no checkpoint at {}", ck_path.display())));
        }
        let ck = Checkpoint::load(&ck_path).map_err(|e| RunError::Checkpoint(format!("{}: {e}", ck_path.display())))?;
        if ck.config_hash != hash {
            return Err(RunError::CheckpointMismatch { expected: hash, found: ck.config_hash });
        }
        ck.restore_into(&mut cfg).map_err(|e| RunError::Checkpoint(e.to_string()))?;
        rng = ck.rng();
        (next, accepted, invalid) = (ck.next_traj, ck.n_accepted, ck.n_invalid);
        streams = Streams::resume(dir, rc, next)?;
        log::info!("resuming {} at trajectory {next}", dir.display());
    } else {
        if dir.join(MEASUREMENTS_FILE).exists() {
            return Err(RunError::Usage(format!(
                "{} already holds a run; pass --resume or choose another output_dir",
                dir.display()
            )));
        }
        fs::create_dir_all(dir)?;
        fs::write(dir.join(CONFIG_FILE), rc.serialize())?;
        streams = Streams::create(dir, rc)?;
        (next, accepted, invalid) = (0, 0, 0);
    }

    let h = &rc.hmc;
    let total = h.n_therm + h.n_traj;
    let started = Instant::now();
    let mut last_log = Instant::now();
    while next < total {
        if opts.stop_after.is_some_and(|s| next >= s) {
            streams.flush()?;
            return Ok(RunSummary {
                output_dir: dir.clone(),
                config_hash: hash,
                trajectories: next,
                accepted,
                invalid_measurements: invalid,
                completed: false,
            });
        }
        let rec = hmc_trajectory(model, &mut cfg, h, &mut rng, next)?;
        accepted += u64::from(rec.accepted);
        if next >= h.n_therm && (next - h.n_therm) % h.meas_every == 0 {
            match measure(&cfg) {
                Ok(obs) => streams.write(&MeasurementRow { traj: next, dh: rec.dh, accepted: rec.accepted, obs })?,
                Err(e) => {
                    invalid += 1;
                    log::warn!("trajectory {next}: measurement skipped: {e}");
                }
            }
        }
        next += 1;
        if next % rc.checkpoint_every == 0 || next == total {
            streams.flush()?;
            Checkpoint::capture(&hash, rc.action, &cfg, &rng, next, accepted, invalid).save(&dir.join(CHECKPOINT_FILE))?;
        }
        if last_log.elapsed().as_secs() >= 30 {
            last_log = Instant::now();
            log::info!(
                "{}: trajectory {next}/{total}, acceptance {:.3}, {:.1}s",
                dir.display(),
                accepted as f64 / next as f64,
                started.elapsed().as_secs_f64()
            );
        }
    }
    streams.flush()?;
    if invalid > 0 {
        log::warn!("{}: {invalid} measurements skipped", dir.display());
    }
    Ok(RunSummary { output_dir: dir.clone(), config_hash: hash, trajectories: next, accepted, invalid_measurements: invalid, completed: true })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanAxis {
    M2,
    ATime,
    AIso,
}

impl ScanAxis {
    pub fn name(&self) -> &'static str {
        match self {
            ScanAxis::M2 => "m2",
            ScanAxis::ATime => "a_t",
            ScanAxis::AIso => "a_iso",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "m2" => Some(ScanAxis::M2),
            "a_t" => Some(ScanAxis::ATime),
            "a_iso" => Some(ScanAxis::AIso),
            _ => None,
        }
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th run of a scan.
pub fn child_seed(base_seed: u64, index: usize) -> u64 {
    splitmix64(splitmix64(base_seed) ^ index as u64)
}

/// Child configs of a scan; exposed so they can be inspected without running.
pub(super) fn scan_configs(base: &RunConfig, axis: ScanAxis, values: &[f64], out_root: &Path) -> Result<Vec<RunConfig>, RunError> {
    if values.is_empty() {
        return Err(RunError::Usage("scan needs at least one value".into()));
    }
    for (i, v) in values.iter().enumerate() {
        if !(*v > 0.0 && v.is_finite()) {
            return Err(RunError::Usage(format!("scan value {v} is not positive")));
        }
        if values[..i].contains(v) {
            return Err(RunError::Usage(format!("duplicate scan value {v}")));
        }
    }
    if axis == ScanAxis::M2 && base.action != ActionKind::Orbifold {
        return Err(RunError::Usage("an m2 scan needs an orbifold base config".into()));
    }
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut c = base.clone();
            match axis {
                ScanAxis::M2 => {
                    // keep m2_u1 tied to m2 unless the base config set it separately
                    if c.m2_u1 == c.m2 {
                        c.m2_u1 = None;
                    }
                    c.m2 = Some(v);
                }
                ScanAxis::ATime => c.a_t = v,
                ScanAxis::AIso => {
                    c.a = v;
                    c.a_t = v;
                }
            }
            c.hmc.seed = child_seed(base.hmc.seed, i);
            c.output_dir = out_root.join(format!("{}_{v}", axis.name()));
            c.validate()?;
            Ok(c)
        })
        .collect()
}

/// One independent run per value, in `out_root/<axis>_<value>`.
pub fn cmd_scan(base_path: &Path, axis: ScanAxis, values: &[f64], out_root: Option<&Path>, resume: bool) -> Result<Vec<RunSummary>, RunError> {
    let base = run_config(base_path)?;
    let root = out_root.map(Path::to_path_buf).unwrap_or_else(|| base.output_dir.clone());
    let children = scan_configs(&base, axis, values, &root)?;
    children
        .iter()
        .map(|c| {
            let opts = RunOptions { resume: resume && c.output_dir.join(CHECKPOINT_FILE).exists(), stop_after: None };
            log::info!("scan: starting {}", c.output_dir.display());
            run_chain(c, &opts)
        })
        .collect()
}

/// Observable names accepted by [`estimate_observable`] beyond the CSV columns.
pub const EXTRA_OBSERVABLES: [&str; 2] = ["plaq_z_scaled", "susceptibility"];

/// Jackknife estimate of a named observable from measurement rows.
///
/// `plaq_z_scaled` is plaq_z/c², directly comparable with plaq_u_spatial;
/// `susceptibility` is ⟨|P|²⟩ − ⟨|P|⟩².
pub fn estimate_observable(rows: &[MeasurementRow], rc: &RunConfig, name: &str, bin_size: usize) -> Result<EnsembleEstimate, RunError> {
    let column = |i: usize| rows.iter().map(|r| r.obs.values()[i]).collect::<Vec<f64>>();
    if let Some(i) = ObservableSnapshot::NAMES.iter().position(|n| *n == name) {
        return Ok(jackknife(&column(i), bin_size)?);
    }
    match name {
        "plaq_z_scaled" => {
            let c = rc.phys()?.c();
            let s: Vec<f64> = column(0).iter().map(|v| v / (c * c)).collect();
            Ok(jackknife(&s, bin_size)?)
        }
        "susceptibility" => Ok(susceptibility(&column(8), bin_size)?),
        _ => Err(RunError::Usage(format!(
            "unknown observable '{name}'; expected one of {}, {}",
            ObservableSnapshot::NAMES.join(", "),
            EXTRA_OBSERVABLES.join(", ")
        ))),
    }
}

#[derive(Clone, Debug)]
pub struct ExtrapolationReport {
    pub observable: String,
    /// (m², estimate) per orbifold run, sorted by m².
    pub points: Vec<(f64, EnsembleEstimate)>,
    pub fit: FitResult,
    pub wilson: Option<EnsembleEstimate>,
    pub pull: Option<f64>,
}

impl ExtrapolationReport {
    pub fn summary_csv(&self, sources: &[(PathBuf, String)]) -> String {
        let mut s = String::new();
        for (dir, hash) in sources {
            let _ = writeln!(s, "# source = {} config_hash = {hash}", dir.display());
        }
        for (m2, e) in &self.points {
            let _ = writeln!(s, "# point m2 = {m2} mean = {} err = {} bins = {}x{}", e.mean, e.err, e.n_bins, e.bin_size);
        }
        let _ = writeln!(s, "observable,a0,a0_err,a1,a2,chi2_per_dof,points_used,wilson,wilson_err,pull");
        let (w, we) = self.wilson.map_or((String::new(), String::new()), |e| (e.mean.to_string(), e.err.to_string()));
        let pl = self.pull.map_or(String::new(), |p| p.to_string());
        let f = &self.fit;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{w},{we},{pl}",
            self.observable, f.a0, f.a0_err, f.a1, f.a2, f.chi2_per_dof, f.n_points
        );
        s
    }
}

fn load_run(dir: &Path) -> Result<(RunConfig, Vec<MeasurementRow>), RunError> {
    read_measurements(&dir.join(MEASUREMENTS_FILE))
}

/// Quadratic fit in 1/m² over orbifold runs, with an optional Wilson reference.
pub fn cmd_extrapolate(
    runs: &[PathBuf],
    observable: &str,
    wilson: Option<&Path>,
    bin_size: usize,
    summary: Option<&Path>,
) -> Result<ExtrapolationReport, RunError> {
    if runs.len() < 4 {
        return Err(RunError::Usage(format!("extrapolation needs at least 4 orbifold runs, got {}", runs.len())));
    }
    let mut points = Vec::new();
    let mut sources = Vec::new();
    for dir in runs {
        let (rc, rows) = load_run(dir)?;
        if rc.action != ActionKind::Orbifold {
            return Err(RunError::Config(format!("{} is a {} run, expected orbifold", dir.display(), rc.action.as_str())));
        }
        let m2 = rc.phys()?.m2;
        if m2 <= 0.0 {
            return Err(RunError::Config(format!("{} has m2 = {m2}; extrapolation needs m2 > 0", dir.display())));
        }
        points.push((m2, estimate_observable(&rows, &rc, observable, bin_size)?));
        sources.push((dir.clone(), rc.hash()));
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let fit_points: Vec<FitPoint> = points.iter().map(|(m2, e)| FitPoint { x: 1.0 / m2, y: e.mean, sigma: e.err }).collect();
    let fit = quad_extrapolate(&fit_points)?;
    let wilson_est = match wilson {
        Some(dir) => {
            let (rc, rows) = load_run(dir)?;
            if rc.action != ActionKind::Wilson {
                return Err(RunError::Config(format!("{} is a {} run, expected wilson", dir.display(), rc.action.as_str())));
            }
            sources.push((dir.to_path_buf(), rc.hash()));
            Some(estimate_observable(&rows, &rc, observable, bin_size)?)
        }
        None => None,
    };
    let pull = wilson_est.map(|w| pull(fit.a0, fit.a0_err, w.mean, w.err));
    let report = ExtrapolationReport { observable: observable.to_string(), points, fit, wilson: wilson_est, pull };
    if let Some(path) = summary {
        fs::write(path, report.summary_csv(&sources))?;
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    pub n_configs: usize,
    pub max_rel_deviation: f64,
    pub tolerance: f64,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.max_rel_deviation <= self.tolerance
    }
}

/// Compares S_orb(frozen(w)) − S_orb(frozen(1)) with S_W(w) − S_W(1) on
/// random Haar configurations. `corrupt_coupling` multiplies g² on the
/// orbifold side only, as a negative control.
pub fn cmd_check_equivalence(rc: &RunConfig, n_configs: usize, corrupt_coupling: Option<f64>) -> Result<EquivalenceReport, RunError> {
    let lat = Arc::new(Lattice::new(rc.shape()?));
    let mut p = rc.phys()?;
    p.m2 = 0.0;
    p.m2_u1 = 0.0;
    let mut p_orb = p.clone();
    if let Some(f) = corrupt_coupling {
        p_orb.g2 *= f;
    }
    let wil = WilsonAction::new(p.clone());
    let orb = OrbifoldAction::new(p_orb);
    let mut rng = SimRng::seed_from_u64(rc.hmc.seed);
    let id = WilsonConfig::cold(lat.clone(), p.n_colors);
    let s_orb0 = orb.action(&frozen_reduce(&id, &p));
    let s_wil0 = wil.action(&id);
    let mut worst: f64 = 0.0;
    for _ in 0..n_configs {
        let w = WilsonConfig::hot(lat.clone(), p.n_colors, &mut rng);
        let d_orb = orb.action(&frozen_reduce(&w, &p)) - s_orb0;
        let d_wil = wil.action(&w) - s_wil0;
        worst = worst.max((d_orb - d_wil).abs() / d_wil.abs());
    }
    Ok(EquivalenceReport { n_configs, max_rel_deviation: worst, tolerance: 1e-10 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn child_seeds_distinct_and_stable() {
        let s: Vec<u64> = (0..5).map(|i| child_seed(7, i)).collect();
        for i in 0..5 {
            for j in 0..i {
                assert_ne!(s[i], s[j]);
            }
        }
        assert_eq!(child_seed(7, 3), s[3]);
        assert_ne!(child_seed(8, 0), s[0]);
    }

    #[test]
    fn scan_fan_out() {
        let base = RunConfig { action: ActionKind::Orbifold, m2: Some(100.0), ..RunConfig::default() };
        let vals = [250.0, 500.0, 1000.0, 2000.0, 4000.0];
        let cs = scan_configs(&base, ScanAxis::M2, &vals, Path::new("out")).unwrap();
        assert_eq!(cs.len(), 5);
        assert_eq!(cs[2].output_dir, Path::new("out/m2_1000"));
        assert_eq!(cs[2].phys().unwrap().m2_u1, 1000.0);
        assert!(scan_configs(&base, ScanAxis::M2, &[250.0, 250.0], Path::new("out")).is_err());
        assert!(scan_configs(&base, ScanAxis::ATime, &[0.2, -0.1], Path::new("out")).is_err());
        let iso = scan_configs(&base, ScanAxis::AIso, &[0.25], Path::new("out")).unwrap();
        assert_eq!((iso[0].a, iso[0].a_t), (0.25, 0.25));
        let w = RunConfig::default();
        assert!(scan_configs(&w, ScanAxis::M2, &[1.0], Path::new("out")).is_err());
    }

    #[test]
    fn equivalence_default_and_corrupted() {
        for n in 2..=3 {
            let rc = RunConfig { n_colors: n, ..RunConfig::default() };
            let r = cmd_check_equivalence(&rc, 10, None).unwrap();
            assert!(r.passed(), "{r:?}");
            let bad = cmd_check_equivalence(&rc, 10, Some(1.01)).unwrap();
            assert!(!bad.passed());
        }
    }
}
