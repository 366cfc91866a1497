//! Run configuration: a flat `key = value` text format with `[section]` headers.
//!
//! ```text
//! # comments start with '#'
//! [run]
//! action = orbifold            # wilson | orbifold
//! output_dir = runs/m2_1000
//! start = cold                 # cold | hot
//! checkpoint_every = 100
//! include_t2 = true
//! dump_polyakov_scatter = false
//!
//! [lattice]
//! n_t = 4
//! n_s = 4, 4                   # one extent per spatial direction
//!
//! [physics]
//! n_colors = 2
//! g2 = 1
//! a = 0.3
//! a_t = 0.3
//! m2 = 1000                    # orbifold only
//! m2_u1 = 1000                 # orbifold only, defaults to m2
//!
//! [hmc]
//! dt = 0.02
//! n_md = 50
//! n_traj = 10000
//! n_therm = 1000
//! meas_every = 1
//! seed = 1
//! ```
//!
//! Every key is optional and falls back to the defaults above (with
//! `action = wilson`, `output_dir = run`, `n_s = 4, 4`, `dt = 0.05`,
//! `n_md = 20`). Keys may appear in any order within their section; a key
//! outside its section or an unknown key is an error.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::geometry::LatticeShape;
use crate::hmc::HmcParams;
use crate::params::PhysParams;

use super::RunError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionKind {
    Wilson,
    Orbifold,
}

impl ActionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ActionKind::Wilson => "wilson",
            ActionKind::Orbifold => "orbifold",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Start {
    Cold,
    Hot,
}

impl Start {
    fn as_str(&self) -> &'static str {
        match self {
            Start::Cold => "cold",
            Start::Hot => "hot",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub action: ActionKind,
    pub output_dir: PathBuf,
    pub start: Start,
    pub checkpoint_every: u64,
    pub include_t2: bool,
    pub dump_polyakov_scatter: bool,
    pub n_t: usize,
    pub n_s: Vec<usize>,
    pub n_colors: usize,
    pub g2: f64,
    pub a: f64,
    pub a_t: f64,
    pub m2: Option<f64>,
    pub m2_u1: Option<f64>,
    pub hmc: HmcParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            action: ActionKind::Wilson,
            output_dir: PathBuf::from("run"),
            start: Start::Cold,
            checkpoint_every: 100,
            include_t2: true,
            dump_polyakov_scatter: false,
            n_t: 4,
            n_s: vec![4, 4],
            n_colors: 2,
            g2: 1.0,
            a: 0.3,
            a_t: 0.3,
            m2: None,
            m2_u1: None,
            hmc: HmcParams::default(),
        }
    }
}

const KEYS: &[(&str, &[&str])] = &[
    ("run", &["action", "output_dir", "start", "checkpoint_every", "include_t2", "dump_polyakov_scatter"]),
    ("lattice", &["n_t", "n_s"]),
    ("physics", &["n_colors", "g2", "a", "a_t", "m2", "m2_u1"]),
    ("hmc", &["dt", "n_md", "n_traj", "n_therm", "meas_every", "seed"]),
];

fn nearest_key(key: &str) -> Option<&'static str> {
    KEYS.iter()
        .flat_map(|(_, ks)| ks.iter().copied())
        .map(|k| (strsim::damerau_levenshtein(key, k), k))
        .min_by_key(|&(d, _)| d)
        .filter(|&(d, k)| d <= k.len().max(key.len()) / 2 + 1)
        .map(|(_, k)| k)
}

fn parse_value<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T, RunError> {
    v.parse().map_err(|_| RunError::Config(format!("line {line}: cannot parse value '{v}' for key '{key}'")))
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool, RunError> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(RunError::Config(format!("line {line}: expected true/false for '{key}', got '{v}'"))),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, RunError> {
        let mut cfg = Self::default();
        let mut section: Option<&str> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.split('#').next().unwrap_or("").trim();
            if s.is_empty() {
                continue;
            }
            if let Some(name) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                let name = name.trim();
                section = Some(
                    KEYS.iter()
                        .find(|(sec, _)| *sec == name)
                        .map(|(sec, _)| *sec)
                        .ok_or_else(|| RunError::Config(format!("line {line}: unknown section [{name}]")))?,
                );
                continue;
            }
            let (key, value) = s
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| RunError::Config(format!("line {line}: expected 'key = value', got '{s}'")))?;
            let sec = section.ok_or_else(|| RunError::Config(format!("line {line}: key '{key}' before any [section]")))?;
            let allowed = KEYS.iter().find(|(n, _)| *n == sec).map(|(_, k)| *k).unwrap_or(&[]);
            if !allowed.contains(&key) {
                let msg = match nearest_key(key) {
                    Some(k) => format!("line {line}: unknown key '{key}' in [{sec}]; did you mean '{k}'?"),
                    None => format!("line {line}: unknown key '{key}' in [{sec}]"),
                };
                return Err(RunError::Config(msg));
            }
            cfg.set(line, key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, line: usize, key: &str, v: &str) -> Result<(), RunError> {
        match key {
            "action" => {
                self.action = match v {
                    "wilson" => ActionKind::Wilson,
                    "orbifold" => ActionKind::Orbifold,
                    _ => return Err(RunError::Config(format!("line {line}: action must be wilson or orbifold, got '{v}'"))),
                }
            }
            "output_dir" => self.output_dir = PathBuf::from(v),
            "start" => {
                self.start = match v {
                    "cold" => Start::Cold,
                    "hot" => Start::Hot,
                    _ => return Err(RunError::Config(format!("line {line}: start must be cold or hot, got '{v}'"))),
                }
            }
            "checkpoint_every" => self.checkpoint_every = parse_value(line, key, v)?,
            "include_t2" => self.include_t2 = parse_bool(line, key, v)?,
            "dump_polyakov_scatter" => self.dump_polyakov_scatter = parse_bool(line, key, v)?,
            "n_t" => self.n_t = parse_value(line, key, v)?,
            "n_s" => {
                self.n_s = v.split(',').map(|x| parse_value(line, key, x.trim())).collect::<Result<_, _>>()?;
            }
            "n_colors" => self.n_colors = parse_value(line, key, v)?,
            "g2" => self.g2 = parse_value(line, key, v)?,
            "a" => self.a = parse_value(line, key, v)?,
            "a_t" => self.a_t = parse_value(line, key, v)?,
            "m2" => self.m2 = Some(parse_value(line, key, v)?),
            "m2_u1" => self.m2_u1 = Some(parse_value(line, key, v)?),
            "dt" => self.hmc.dt = parse_value(line, key, v)?,
            "n_md" => self.hmc.n_md = parse_value(line, key, v)?,
            "n_traj" => self.hmc.n_traj = parse_value(line, key, v)?,
            "n_therm" => self.hmc.n_therm = parse_value(line, key, v)?,
            "meas_every" => self.hmc.meas_every = parse_value(line, key, v)?,
            "seed" => self.hmc.seed = parse_value(line, key, v)?,
            _ => unreachable!("key list and setter out of sync: {key}"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), RunError> {
        self.shape()?;
        self.phys()?;
        let h = &self.hmc;
        if !(h.dt > 0.0 && h.dt.is_finite()) {
            return Err(RunError::Config(format!("dt must be positive, got {}", h.dt)));
        }
        if h.n_md == 0 || h.meas_every == 0 || self.checkpoint_every == 0 {
            return Err(RunError::Config("n_md, meas_every and checkpoint_every must be at least 1".into()));
        }
        if self.action == ActionKind::Orbifold && self.m2.is_none() {
            return Err(RunError::Config("orbifold runs need [physics] m2".into()));
        }
        Ok(())
    }

    /// Notes about fields that are set but have no effect.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.action == ActionKind::Wilson {
            for (name, v) in [("m2", self.m2), ("m2_u1", self.m2_u1)] {
                if v.is_some() {
                    w.push(format!("{name} is ignored by the wilson action"));
                }
            }
            if !self.include_t2 {
                w.push("include_t2 is ignored by the wilson action".into());
            }
        }
        w
    }

    pub fn shape(&self) -> Result<LatticeShape, RunError> {
        LatticeShape::new(self.n_t, self.n_s.clone()).map_err(|e| RunError::Config(e.to_string()))
    }

    pub fn phys(&self) -> Result<PhysParams, RunError> {
        let mut p = PhysParams::new(self.n_colors, self.n_s.len(), self.g2, self.a, self.a_t)
            .map_err(|e| RunError::Config(e.to_string()))?;
        if self.action == ActionKind::Orbifold {
            let m2 = self.m2.unwrap_or(0.0);
            p.m2 = m2;
            p.m2_u1 = self.m2_u1.unwrap_or(m2);
        }
        p.validate().map_err(|e| RunError::Config(e.to_string()))?;
        Ok(p)
    }

    fn body(&self, with_output: bool) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[run]");
        let _ = writeln!(s, "action = {}", self.action.as_str());
        if with_output {
            let _ = writeln!(s, "output_dir = {}", self.output_dir.display());
        }
        let _ = writeln!(s, "start = {}", self.start.as_str());
        let _ = writeln!(s, "checkpoint_every = {}", self.checkpoint_every);
        let _ = writeln!(s, "include_t2 = {}", self.include_t2);
        let _ = writeln!(s, "dump_polyakov_scatter = {}", self.dump_polyakov_scatter);
        let _ = writeln!(s, "\n[lattice]");
        let _ = writeln!(s, "n_t = {}", self.n_t);
        let n_s: Vec<String> = self.n_s.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(s, "n_s = {}", n_s.join(", "));
        let _ = writeln!(s, "\n[physics]");
        let _ = writeln!(s, "n_colors = {}", self.n_colors);
        let _ = writeln!(s, "g2 = {}", self.g2);
        let _ = writeln!(s, "a = {}", self.a);
        let _ = writeln!(s, "a_t = {}", self.a_t);
        if let Some(m2) = self.m2 {
            let _ = writeln!(s, "m2 = {m2}");
        }
        if let Some(m2) = self.m2_u1 {
            let _ = writeln!(s, "m2_u1 = {m2}");
        }
        let h = &self.hmc;
        let _ = writeln!(s, "\n[hmc]");
        let _ = writeln!(s, "dt = {}", h.dt);
        let _ = writeln!(s, "n_md = {}", h.n_md);
        let _ = writeln!(s, "n_traj = {}", h.n_traj);
        let _ = writeln!(s, "n_therm = {}", h.n_therm);
        let _ = writeln!(s, "meas_every = {}", h.meas_every);
        let _ = writeln!(s, "seed = {}", h.seed);
        s
    }

    /// Canonical text; parses back to an equal value.
    pub fn serialize(&self) -> String {
        self.body(true)
    }

    /// SHA-256 of the canonical text without `output_dir`, so a run directory
    /// can move without invalidating its checkpoint.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.body(false).as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    /// Config text with every line prefixed by `# `, for embedding in outputs.
    pub fn header_comment(&self) -> String {
        let mut s = format!("# config_hash = {}\n", self.hash());
        for l in self.serialize().lines() {
            let _ = writeln!(s, "# {l}");
        }
        s
    }

    /// Recovers a config from the `# `-prefixed header of an output file.
    pub fn from_header_comment(text: &str) -> Result<Self, RunError> {
        let body: String = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .filter(|l| !l.starts_with("# config_hash"))
            .map(|l| l.strip_prefix("# ").unwrap_or(l.trim_start_matches('#')))
            .collect::<Vec<_>>()
            .join("\n");
        Self::parse(&body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orbifold() -> RunConfig {
        RunConfig {
            action: ActionKind::Orbifold,
            m2: Some(1000.0),
            a_t: 0.1 + 0.2,
            hmc: HmcParams { dt: 1.0 / 3.0, seed: u64::MAX, ..HmcParams::default() },
            ..RunConfig::default()
        }
    }

    #[test]
    fn serialize_parse_roundtrip() {
        for c in [RunConfig::default(), orbifold()] {
            let back = RunConfig::parse(&c.serialize()).unwrap();
            assert_eq!(back, c);
            assert_eq!(back.hash(), c.hash());
        }
    }

    #[test]
    fn header_roundtrip() {
        let c = orbifold();
        let h = c.header_comment();
        assert!(h.starts_with("# config_hash = "));
        assert_eq!(RunConfig::from_header_comment(&h).unwrap(), c);
    }

    #[test]
    fn hash_ignores_output_dir() {
        let a = orbifold();
        let b = RunConfig { output_dir: "elsewhere".into(), ..a.clone() };
        let c = RunConfig { m2: Some(2000.0), ..a.clone() };
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn unknown_key_suggests_nearest() {
        let e = RunConfig::parse("[physics]\nmass2 = 100\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("'mass2'") && msg.contains("'m2'"), "{msg}");
        let e = RunConfig::parse("[hmc]\nn_trajs = 5\n").unwrap_err().to_string();
        assert!(e.contains("'n_traj'"), "{e}");
    }

    #[test]
    fn structural_errors() {
        assert!(RunConfig::parse("seed = 1").is_err());
        assert!(RunConfig::parse("[bogus]\n").is_err());
        assert!(RunConfig::parse("[hmc]\nseed\n").is_err());
        assert!(RunConfig::parse("[hmc]\ndt = fast\n").is_err());
        assert!(RunConfig::parse("[hmc]\ndt = -1\n").is_err());
        assert!(RunConfig::parse("[run]\naction = orbifold\n").is_err());
        assert!(RunConfig::parse("[lattice]\nn_s = 4, 1\n").is_err());
    }

    #[test]
    fn wilson_mass_warning() {
        let c = RunConfig::parse("[run]\naction = wilson\n[physics]\nm2 = 100\n").unwrap();
        assert_eq!(c.warnings(), vec!["m2 is ignored by the wilson action".to_string()]);
        assert_eq!(c.phys().unwrap().m2, 0.0);
        assert!(orbifold().warnings().is_empty());
    }

    #[test]
    fn m2_u1_defaults_to_m2() {
        let c = RunConfig::parse("[run]\naction = orbifold\n[physics]\nm2 = 250\n").unwrap();
        let p = c.phys().unwrap();
        assert_eq!((p.m2, p.m2_u1), (250.0, 250.0));
        let c = RunConfig::parse("[run]\naction = orbifold\n[physics]\nm2 = 250\nm2_u1 = 10\n").unwrap();
        assert_eq!(c.phys().unwrap().m2_u1, 10.0);
    }
}
