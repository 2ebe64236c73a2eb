//! Result persistence: CSV tables, binary state checkpoints, and the run
//! manifest.
//!
//! Every CLI run goes through a [`RunWriter`]. It records each emitted
//! file and, on success, closes the run with a `manifest.json` naming them
//! all next to the tool version and a SHA-256 of the configuration text.
//! If the run fails before [`RunWriter::finish`], the writer removes
//! whatever it had emitted — a run directory never contains files that no
//! manifest accounts for.
//!
//! Numeric CSV cells are printed with [`sci`] (17 significant decimals,
//! scientific notation): enough to round-trip an f64 bit-exactly, which is
//! what makes "identical config → byte-identical CSV" a testable promise.
//!
//! Checkpoint layout (all little-endian), for resuming long runs:
//!
//! ```text
//! offset 0    u64  number of internal levels
//! offset 8    u64  Fock-space dimension F
//! offset 16   f64  state time [s]
//! offset 24…  f64  density matrix, row-major, (re, im) per entry,
//!                  (levels·F)² complex entries
//! ```

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use ndarray::Array2;
use num_complex::Complex64 as C64;
use sha2::{Digest, Sha256};

use crate::dynamics::DensityState;
use crate::error::{Error, Result};

/// Full-precision scientific rendering of one f64.
pub fn sci(x: f64) -> String {
    format!("{x:.17e}")
}

/// Collects one run's artifacts and writes the closing manifest.
pub struct RunWriter {
    dir: PathBuf,
    config_sha256: String,
    started: DateTime<Utc>,
    files: Vec<String>,
    finished: bool,
}

impl RunWriter {
    /// Open (creating if needed) the output directory. `config_text` is
    /// the verbatim configuration document; its hash goes in the manifest
    /// so results stay traceable to their inputs.
    pub fn create(dir: &Path, config_text: &str) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        let digest = Sha256::digest(config_text.as_bytes());
        Ok(RunWriter {
            dir: dir.to_path_buf(),
            config_sha256: format!("{digest:x}"),
            started: Utc::now(),
            files: Vec::new(),
            finished: false,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Write one CSV table (header row first, `sci`-formatted cells
    /// expected from the caller).
    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path)
            .map_err(|e| Error::Numerical(format!("cannot open {}: {e}", path.display())))?;
        w.write_record(header)
            .and_then(|_| rows.iter().try_for_each(|row| w.write_record(row)))
            .and_then(|_| w.flush().map_err(csv::Error::from))
            .map_err(|e| Error::Numerical(format!("writing {}: {e}", path.display())))?;
        self.files.push(name.to_string());
        Ok(path)
    }

    pub fn write_text(&mut self, name: &str, content: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, content)?;
        self.files.push(name.to_string());
        Ok(path)
    }

    /// Persist a density-matrix state in the documented binary layout.
    pub fn write_checkpoint(&mut self, name: &str, state: &DensityState) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut w = std::io::BufWriter::new(std::fs::File::create(&path)?);
        w.write_all(&(state.levels as u64).to_le_bytes())?;
        w.write_all(&(state.fock as u64).to_le_bytes())?;
        w.write_all(&state.time.to_le_bytes())?;
        for z in state.rho.iter() {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        w.flush()?;
        self.files.push(name.to_string());
        Ok(path)
    }

    /// Close the run: write `manifest.json` listing every emitted file.
    pub fn finish(mut self) -> Result<PathBuf> {
        let manifest = serde_json::json!({
            "tool": "sympcool",
            "version": env!("CARGO_PKG_VERSION"),
            "config_sha256": self.config_sha256,
            "started_utc": self.started.to_rfc3339(),
            "finished_utc": Utc::now().to_rfc3339(),
            "files": self.files,
        });
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, format!("{manifest:#}\n"))?;
        self.finished = true;
        Ok(path)
    }
}

impl Drop for RunWriter {
    /// A writer dropped without `finish` is a failed run: remove its
    /// partial outputs so nothing unlisted survives.
    fn drop(&mut self) {
        if !self.finished {
            for f in &self.files {
                let _ = std::fs::remove_file(self.dir.join(f));
            }
        }
    }
}

/// Read a state saved by [`RunWriter::write_checkpoint`].
pub fn read_checkpoint(path: &Path) -> Result<DensityState> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut u = [0u8; 8];
    r.read_exact(&mut u)?;
    let levels = u64::from_le_bytes(u) as usize;
    r.read_exact(&mut u)?;
    let fock = u64::from_le_bytes(u) as usize;
    r.read_exact(&mut u)?;
    let time = f64::from_le_bytes(u);
    if levels == 0 || fock == 0 || levels.saturating_mul(fock) > 1 << 16 {
        return Err(Error::Config(format!(
            "checkpoint {}: implausible dimensions {levels} × {fock}",
            path.display()
        )));
    }
    let dim = levels * fock;
    let mut rho = Array2::<C64>::zeros((dim, dim));
    for z in rho.iter_mut() {
        let mut re = [0u8; 8];
        let mut im = [0u8; 8];
        r.read_exact(&mut re)?;
        r.read_exact(&mut im)?;
        *z = C64::new(f64::from_le_bytes(re), f64::from_le_bytes(im));
    }
    DensityState::new(rho, time, levels, fock)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::G1;

    #[test]
    fn sci_renders_f64_round_trippable() {
        let s = sci(std::f64::consts::PI);
        assert_eq!(s, "3.14159265358979312e0");
        assert_eq!(s.parse::<f64>().unwrap(), std::f64::consts::PI);
        assert_eq!(sci(-1.5e-300).parse::<f64>().unwrap(), -1.5e-300);
    }

    #[test]
    fn manifest_lists_every_emitted_file() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = RunWriter::create(dir.path(), "{}").unwrap();
        w.write_csv("a.csv", &["x"], &[vec![sci(1.0)]]).unwrap();
        w.write_text("b.txt", "hello\n").unwrap();
        let manifest_path = w.finish().unwrap();

        let text = std::fs::read_to_string(manifest_path).unwrap();
        let m: serde_json::Value = serde_json::from_str(&text).unwrap();
        let files: Vec<&str> = m["files"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
        assert_eq!(files, vec!["a.csv", "b.txt"]);
        assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
        assert_eq!(m["version"].as_str().unwrap(), env!("CARGO_PKG_VERSION"));
        assert!(dir.path().join("a.csv").exists());
    }

    #[test]
    fn unfinished_runs_leave_no_files_behind() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut w = RunWriter::create(dir.path(), "{}").unwrap();
            w.write_csv("partial.csv", &["x"], &[vec![sci(2.0)]]).unwrap();
            assert!(dir.path().join("partial.csv").exists());
            // dropped without finish(): simulated failure
        }
        assert!(!dir.path().join("partial.csv").exists());
        assert!(!dir.path().join("manifest.json").exists());
    }

    #[test]
    fn checkpoint_round_trips_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let state = DensityState::with_fock_populations(2, G1, &[0.25, 0.5, 0.125, 0.125]).unwrap();
        let mut w = RunWriter::create(dir.path(), "{}").unwrap();
        let path = w.write_checkpoint("state.ckpt", &state).unwrap();
        let back = read_checkpoint(&path).unwrap();
        assert_eq!(back.levels, state.levels);
        assert_eq!(back.fock, state.fock);
        assert_eq!(back.time, state.time);
        assert_eq!(back.rho, state.rho);
        w.finish().unwrap();
    }

    #[test]
    fn truncated_checkpoint_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ckpt");
        std::fs::write(&path, [1u8, 0, 0, 0, 0, 0, 0, 0, 3]).unwrap();
        assert!(read_checkpoint(&path).is_err());
    }
}
