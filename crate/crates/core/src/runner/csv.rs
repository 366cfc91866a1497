//! Measurement CSV files. Each starts with the generating config as `# `
//! comment lines, followed by a header row and one row per measurement.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::observables::ObservableSnapshot;

use super::config::RunConfig;
use super::RunError;

pub const MEASUREMENT_COLUMNS: &str =
    "traj,dh,accepted,plaq_z,plaq_u_spatial,plaq_u_temporal,tr_w_dev,re_det_u,im_det_u,re_p,im_p,abs_p";
pub const SCATTER_COLUMNS: &str = "traj,re_p,im_p";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementRow {
    pub traj: u64,
    pub dh: f64,
    pub accepted: bool,
    pub obs: ObservableSnapshot,
}

impl MeasurementRow {
    fn to_line(&self) -> String {
        let mut s = format!("{},{},{}", self.traj, self.dh, u8::from(self.accepted));
        for v in self.obs.values() {
            s.push(',');
            s.push_str(&v.to_string());
        }
        s
    }

    fn parse(line: &str) -> Option<Self> {
        let mut it = line.split(',');
        let traj = it.next()?.trim().parse().ok()?;
        let dh = it.next()?.trim().parse().ok()?;
        let accepted = match it.next()?.trim() {
            "1" => true,
            "0" => false,
            _ => return None,
        };
        let mut v = [0.0; 9];
        for slot in &mut v {
            *slot = it.next()?.trim().parse().ok()?;
        }
        if it.next().is_some() {
            return None;
        }
        Some(Self { traj, dh, accepted, obs: ObservableSnapshot::from_values(v) })
    }
}

/// Appending writer for a run's output streams.
pub struct Streams {
    measurements: BufWriter<File>,
    scatter: Option<BufWriter<File>>,
}

fn create_with_header(path: &Path, cfg: &RunConfig, columns: &str) -> io::Result<()> {
    let mut f = File::create(path)?;
    f.write_all(cfg.header_comment().as_bytes())?;
    writeln!(f, "{columns}")?;
    f.sync_all()
}

fn open_append(path: &Path) -> io::Result<BufWriter<File>> {
    Ok(BufWriter::new(OpenOptions::new().append(true).open(path)?))
}

/// Drops data rows whose leading trajectory index is ≥ `next_traj`.
fn truncate_rows(path: &Path, next_traj: u64) -> io::Result<()> {
    let text = fs::read_to_string(path)?;
    let mut out = String::with_capacity(text.len());
    for line in text.lines() {
        let keep = match line.split(',').next().and_then(|t| t.parse::<u64>().ok()) {
            Some(t) => t < next_traj,
            None => true,
        };
        if keep {
            out.push_str(line);
            out.push('\n');
        }
    }
    fs::write(path, out)
}

impl Streams {
    pub fn create(dir: &Path, cfg: &RunConfig) -> io::Result<Self> {
        let m = dir.join(super::MEASUREMENTS_FILE);
        create_with_header(&m, cfg, MEASUREMENT_COLUMNS)?;
        let scatter = if cfg.dump_polyakov_scatter {
            let s = dir.join(super::SCATTER_FILE);
            create_with_header(&s, cfg, SCATTER_COLUMNS)?;
            Some(open_append(&s)?)
        } else {
            None
        };
        Ok(Self { measurements: open_append(&m)?, scatter })
    }

    /// Reopens existing streams, discarding rows written after the checkpoint.
    pub fn resume(dir: &Path, cfg: &RunConfig, next_traj: u64) -> io::Result<Self> {
        let m = dir.join(super::MEASUREMENTS_FILE);
        truncate_rows(&m, next_traj)?;
        let scatter = if cfg.dump_polyakov_scatter {
            let s = dir.join(super::SCATTER_FILE);
            if s.exists() {
                truncate_rows(&s, next_traj)?;
            } else {
                create_with_header(&s, cfg, SCATTER_COLUMNS)?;
            }
            Some(open_append(&s)?)
        } else {
            None
        };
        Ok(Self { measurements: open_append(&m)?, scatter })
    }

    pub fn write(&mut self, row: &MeasurementRow) -> io::Result<()> {
        writeln!(self.measurements, "{}", row.to_line())?;
        if let Some(s) = &mut self.scatter {
            writeln!(s, "{},{},{}", row.traj, row.obs.re_p, row.obs.im_p)?;
        }
        Ok(())
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.measurements.flush()?;
        if let Some(s) = &mut self.scatter {
            s.flush()?;
        }
        Ok(())
    }
}

/// Reads a measurement CSV back: the embedded config and all rows.
pub fn read_measurements(path: &Path) -> Result<(RunConfig, Vec<MeasurementRow>), RunError> {
    let text = fs::read_to_string(path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
    let cfg = RunConfig::from_header_comment(&text)?;
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (i, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !seen_header {
            if line.trim() != MEASUREMENT_COLUMNS {
                return Err(RunError::Config(format!("{}: unexpected header row '{line}'", path.display())));
            }
            seen_header = true;
            continue;
        }
        let row = MeasurementRow::parse(line)
            .ok_or_else(|| RunError::Config(format!("{}:{}: malformed row", path.display(), i + 1)))?;
        rows.push(row);
    }
    Ok((cfg, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_roundtrip() {
        let obs = ObservableSnapshot::from_values([0.1, 1.0 / 3.0, -2.5e-17, 0.0, 1.0, -0.0, 0.3, 0.4, 0.5]);
        let row = MeasurementRow { traj: 42, dh: -1e-3, accepted: true, obs };
        assert_eq!(MeasurementRow::parse(&row.to_line()), Some(row));
        assert_eq!(MeasurementRow::parse("1,2,3"), None);
    }
}
