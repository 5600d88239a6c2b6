//! On-disk profile cache.
//!
//! Entries are keyed by a SHA-256 over the exact bits of the parameters,
//! tolerance and time grid. Columns are stored as hex-encoded `f64` bits so a
//! cached profile is bit-identical to a fresh one. Unreadable entries are
//! rebuilt with a warning.

use std::fs;
use std::path::{Path, PathBuf};

use bec_dephasing::decoherence::{build_profile, DecoherenceProfile};
use bec_dephasing::scenarios::ProfileProvider;
use bec_dephasing::{ReservoirParams, Result};
use sha2::{Digest, Sha256};

pub const ENV_VAR: &str = "BEC_DEPHASING_CACHE";
const MAGIC: &str = "bec-dephasing profile cache v1";

pub fn key(p: &ReservoirParams, t_grid: &[f64], tol: f64) -> String {
    let mut h = Sha256::new();
    h.update(MAGIC.as_bytes());
    for v in [p.u, p.g_ab, p.n0, p.theta, p.l_sep, p.d_sep, tol] {
        h.update(v.to_bits().to_le_bytes());
    }
    h.update((t_grid.len() as u64).to_le_bytes());
    for t in t_grid {
        h.update(t.to_bits().to_le_bytes());
    }
    hex::encode(h.finalize())
}

fn word(v: f64) -> String {
    format!("{:016x}", v.to_bits())
}

fn encode(key: &str, prof: &DecoherenceProfile) -> String {
    let mut out = format!("{MAGIC}\nkey {key}\nrows {}\n", prof.len());
    for i in 0..prof.len() {
        let row = [
            prof.t_grid()[i],
            prof.gamma0()[i],
            prof.delta()[i],
            prof.rate_plus()[i],
            prof.rate_minus()[i],
            prof.pi_zz()[i],
            prof.pi_rate()[i],
        ];
        out.push_str(&row.map(word).join(" "));
        out.push('\n');
    }
    out
}

fn decode(text: &str, key: &str, p: &ReservoirParams, t_grid: &[f64], tol: f64) -> std::result::Result<DecoherenceProfile, String> {
    let mut lines = text.lines();
    if lines.next() != Some(MAGIC) {
        return Err("bad header".into());
    }
    if lines.next() != Some(format!("key {key}").as_str()) {
        return Err("key mismatch".into());
    }
    let rows: usize = lines
        .next()
        .and_then(|l| l.strip_prefix("rows "))
        .and_then(|n| n.parse().ok())
        .ok_or("bad row count")?;
    if rows != t_grid.len() {
        return Err("row count does not match the grid".into());
    }
    let mut cols: [Vec<f64>; 7] = Default::default();
    for i in 0..rows {
        let line = lines.next().ok_or("truncated")?;
        let words: Vec<&str> = line.split(' ').collect();
        if words.len() != 7 {
            return Err(format!("row {i}: expected 7 words"));
        }
        for (col, w) in cols.iter_mut().zip(words) {
            let bits = (w.len() == 16)
                .then(|| u64::from_str_radix(w, 16).ok())
                .flatten()
                .ok_or_else(|| format!("row {i}: bad word `{w}`"))?;
            col.push(f64::from_bits(bits));
        }
        if cols[0][i].to_bits() != t_grid[i].to_bits() {
            return Err(format!("row {i}: time does not match the grid"));
        }
    }
    if lines.next().is_some() {
        return Err("trailing data".into());
    }
    let [t, g0, d, rp, rm, pz, pr] = cols;
    DecoherenceProfile::from_columns(*p, tol, t, g0, d, rp, rm, pz, pr).map_err(|e| e.to_string())
}

/// Profile provider backed by a cache directory.
pub struct CachedProvider {
    dir: PathBuf,
}

impl CachedProvider {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.profile"))
    }
}

fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)
}

impl ProfileProvider for CachedProvider {
    fn profile(&self, p: &ReservoirParams, t_grid: &[f64], tol: f64) -> Result<DecoherenceProfile> {
        let key = key(p, t_grid, tol);
        let path = self.path_for(&key);
        if let Ok(text) = fs::read_to_string(&path) {
            match decode(&text, &key, p, t_grid, tol) {
                Ok(prof) => return Ok(prof),
                Err(e) => eprintln!("warning: discarding cache entry {}: {e}", path.display()),
            }
        }
        let prof = build_profile(p, t_grid, tol)?;
        if let Err(e) = write_atomic(&path, &encode(&key, &prof)) {
            eprintln!("warning: cannot write cache entry {}: {e}", path.display());
        }
        Ok(prof)
    }
}
