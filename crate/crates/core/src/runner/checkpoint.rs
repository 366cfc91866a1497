//! Binary checkpoint: full configuration, RNG state and counters.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic  "ORBLATCK"            8 bytes
//! version u32                  currently 1
//! hash    u32 len + bytes      config hash, hex
//! action  u8                   0 wilson, 1 orbifold
//! next_traj, n_accepted, n_invalid   u64 each
//! rng seed  u32 len + 32 bytes
//! rng stream u64, word_pos u128
//! group  u64 count + count·N² (re, im) f64 pairs
//! flat   u64 count + count·N² (re, im) f64 pairs
//! ```

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;

use crate::hmc::{Fields, SimRng};
use crate::matalg::{ComplexMatrix, SpecialUnitary};

use super::config::ActionKind;

const MAGIC: &[u8; 8] = b"ORBLATCK";
const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub config_hash: String,
    pub action: ActionKind,
    pub next_traj: u64,
    pub n_accepted: u64,
    pub n_invalid: u64,
    pub rng_seed: [u8; 32],
    pub rng_stream: u64,
    pub rng_word_pos: u128,
    pub n_colors: usize,
    pub group: Vec<ComplexMatrix>,
    pub flat: Vec<ComplexMatrix>,
}

fn bad(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> io::Result<&'a [u8]> {
        if self.buf.len() < n {
            return Err(bad("checkpoint truncated"));
        }
        let (a, b) = self.buf.split_at(n);
        self.buf = b;
        Ok(a)
    }
    fn u8(&mut self) -> io::Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> io::Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> io::Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn u128(&mut self) -> io::Result<u128> {
        Ok(u128::from_le_bytes(self.take(16)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> io::Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn bytes(&mut self) -> io::Result<&'a [u8]> {
        let n = self.u32()? as usize;
        self.take(n)
    }
    fn matrices(&mut self, n: usize) -> io::Result<Vec<ComplexMatrix>> {
        let count = self.u64()? as usize;
        if count.saturating_mul(n * n * 16) > self.buf.len() {
            return Err(bad("checkpoint truncated"));
        }
        (0..count)
            .map(|_| {
                let mut m = ComplexMatrix::zeros(n);
                for i in 0..n {
                    for j in 0..n {
                        let re = self.f64()?;
                        let im = self.f64()?;
                        m.set(i, j, Complex64::new(re, im));
                    }
                }
                Ok(m)
            })
            .collect()
    }
}

fn put_bytes(out: &mut Vec<u8>, b: &[u8]) {
    out.extend_from_slice(&(b.len() as u32).to_le_bytes());
    out.extend_from_slice(b);
}

fn put_matrices<'a>(out: &mut Vec<u8>, ms: impl ExactSizeIterator<Item = &'a ComplexMatrix>) {
    out.extend_from_slice(&(ms.len() as u64).to_le_bytes());
    for m in ms {
        for z in m.entries() {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
}

impl Checkpoint {
    pub fn capture<F: Fields>(
        config_hash: &str,
        action: ActionKind,
        cfg: &F,
        rng: &SimRng,
        next_traj: u64,
        n_accepted: u64,
        n_invalid: u64,
    ) -> Self {
        Self {
            config_hash: config_hash.to_string(),
            action,
            next_traj,
            n_accepted,
            n_invalid,
            rng_seed: rng.get_seed(),
            rng_stream: rng.get_stream(),
            rng_word_pos: rng.get_word_pos(),
            n_colors: cfg.n_colors(),
            group: cfg.group_links().iter().map(|u| u.matrix()).collect(),
            flat: cfg.flat_links().to_vec(),
        }
    }

    pub fn rng(&self) -> SimRng {
        let mut r = SimRng::from_seed(self.rng_seed);
        r.set_stream(self.rng_stream);
        r.set_word_pos(self.rng_word_pos);
        r
    }

    /// Overwrites the links of `cfg`, which must already have the right shape.
    pub fn restore_into<F: Fields>(&self, cfg: &mut F) -> io::Result<()> {
        if cfg.group_links().len() != self.group.len() || cfg.flat_links().len() != self.flat.len() || cfg.n_colors() != self.n_colors {
            return Err(bad("checkpoint shape does not match the configured lattice"));
        }
        for (dst, src) in cfg.group_links_mut().iter_mut().zip(&self.group) {
            *dst = SpecialUnitary::from_matrix_unchecked(*src);
        }
        cfg.flat_links_mut().copy_from_slice(&self.flat);
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        put_bytes(&mut out, self.config_hash.as_bytes());
        out.push(match self.action {
            ActionKind::Wilson => 0,
            ActionKind::Orbifold => 1,
        });
        for v in [self.next_traj, self.n_accepted, self.n_invalid] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        put_bytes(&mut out, &self.rng_seed);
        out.extend_from_slice(&self.rng_stream.to_le_bytes());
        out.extend_from_slice(&self.rng_word_pos.to_le_bytes());
        out.extend_from_slice(&(self.n_colors as u32).to_le_bytes());
        put_matrices(&mut out, self.group.iter());
        put_matrices(&mut out, self.flat.iter());
        out
    }

    pub fn from_bytes(buf: &[u8]) -> io::Result<Self> {
        let mut r = Reader { buf };
        if r.take(8)? != MAGIC {
            return Err(bad("not a checkpoint file"));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(bad(format!("unsupported checkpoint version {version}")));
        }
        let config_hash = String::from_utf8(r.bytes()?.to_vec()).map_err(|_| bad("config hash is not UTF-8"))?;
        let action = match r.u8()? {
            0 => ActionKind::Wilson,
            1 => ActionKind::Orbifold,
            k => return Err(bad(format!("unknown action tag {k}"))),
        };
        let next_traj = r.u64()?;
        let n_accepted = r.u64()?;
        let n_invalid = r.u64()?;
        let rng_seed: [u8; 32] = r.bytes()?.try_into().map_err(|_| bad("rng seed must be 32 bytes"))?;
        let rng_stream = r.u64()?;
        let rng_word_pos = r.u128()?;
        let n_colors = r.u32()? as usize;
        if !(2..=3).contains(&n_colors) {
            return Err(bad(format!("unsupported colour count {n_colors}")));
        }
        let group = r.matrices(n_colors)?;
        let flat = r.matrices(n_colors)?;
        if !r.buf.is_empty() {
            return Err(bad("trailing bytes after checkpoint"));
        }
        Ok(Self { config_hash, action, next_traj, n_accepted, n_invalid, rng_seed, rng_stream, rng_word_pos, n_colors, group, flat })
    }

    /// Writes via a temporary file and rename, so a crash never leaves a
    /// half-written checkpoint behind.
    pub fn save(&self, path: &Path) -> io::Result<()> {
        let tmp = path.with_extension("tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&self.to_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)
    }

    pub fn load(path: &Path) -> io::Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Lattice, LatticeShape};
    use crate::orbifold::OrbifoldConfig;
    use crate::params::PhysParams;
    use rand::Rng;
    use std::sync::Arc;

    fn sample() -> (Checkpoint, OrbifoldConfig, SimRng) {
        let mut rng = SimRng::seed_from_u64(11);
        let lat = Arc::new(Lattice::new(LatticeShape::cubic(2, 2).unwrap()));
        let p = PhysParams::new(3, 2, 1.0, 0.3, 0.3).unwrap().with_mass(10.0);
        let cfg = OrbifoldConfig::random_near_frozen(lat, &p, 0.2, &mut rng);
        let _: u64 = rng.random();
        (Checkpoint::capture("abc", ActionKind::Orbifold, &cfg, &rng, 17, 12, 1), cfg, rng)
    }

    #[test]
    fn bytes_roundtrip_and_rng_continuation() {
        let (ck, cfg, mut rng) = sample();
        let back = Checkpoint::from_bytes(&ck.to_bytes()).unwrap();
        assert_eq!(back, ck);
        let mut r2 = back.rng();
        for _ in 0..10 {
            assert_eq!(rng.random::<u64>(), r2.random::<u64>());
        }
        let mut other = cfg.clone();
        other.set_z(0, 1, ComplexMatrix::zeros(3));
        back.restore_into(&mut other).unwrap();
        assert_eq!(other.z_links(), cfg.z_links());
        assert_eq!(other.temporal_links(), cfg.temporal_links());
    }

    #[test]
    fn rejects_corruption() {
        let (ck, _, _) = sample();
        let bytes = ck.to_bytes();
        assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut b = bytes.clone();
        b[0] = b'X';
        assert!(Checkpoint::from_bytes(&b).is_err());
        let mut b = bytes.clone();
        b.push(0);
        assert!(Checkpoint::from_bytes(&b).is_err());
    }
}
