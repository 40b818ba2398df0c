//! Reading inputs, hashing, CSV encoding and atomic artifact output.

use std::io::Write;
use std::path::{Path, PathBuf};

use cnr_core::EnergySpectrum;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{AppError, Result};
use crate::manifest::{OutputRef, RunManifest};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn read_input(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| AppError::Input { path: path.display().to_string(), source })
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let err = |source| AppError::Output { path: path.display().to_string(), source };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(bytes).map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

/// CSV with a header row and LF line endings.
pub fn csv_bytes<T: Serialize>(rows: &[T]) -> std::result::Result<Vec<u8>, csv::Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| csv::Error::from(e.into_error()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub level: usize,
    pub energy: f64,
    pub degeneracy: u64,
}

pub fn level_rows(spec: &EnergySpectrum) -> Vec<LevelRow> {
    spec.levels()
        .iter()
        .enumerate()
        .map(|(k, l)| LevelRow { level: k + 1, energy: l.energy, degeneracy: l.degeneracy })
        .collect()
}

/// Reads a `level,energy,degeneracy` CSV as written by `spectrum`.
pub fn load_spectrum(path: &Path) -> Result<(EnergySpectrum, String)> {
    let bytes = read_input(path)?;
    let format = |msg: String| AppError::Format { path: path.display().to_string(), msg };
    let mut rows: Vec<LevelRow> = Vec::new();
    for rec in csv::Reader::from_reader(bytes.as_slice()).deserialize() {
        rows.push(rec.map_err(|e| format(e.to_string()))?);
    }
    for (k, r) in rows.iter().enumerate() {
        if r.level != k + 1 {
            return Err(format(format!("row {} has level {}, expected {}", k + 1, r.level, k + 1)));
        }
    }
    let pairs: Vec<(f64, u64)> = rows.iter().map(|r| (r.energy, r.degeneracy)).collect();
    Ok((EnergySpectrum::from_levels(&pairs)?, sha256_hex(&bytes)))
}

/// Destination of a command's files. With a directory every file is written
/// there next to `manifest.json`; without one the primary output goes to
/// stdout and secondary outputs are dropped.
#[derive(Debug)]
pub struct Artifacts {
    dir: Option<PathBuf>,
    written: Vec<OutputRef>,
}

impl Artifacts {
    pub fn new(dir: Option<PathBuf>) -> Result<Self> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d).map_err(|source| AppError::Output { path: d.display().to_string(), source })?;
        }
        Ok(Artifacts { dir, written: Vec::new() })
    }

    pub fn has_dir(&self) -> bool {
        self.dir.is_some()
    }

    pub fn primary(&mut self, name: &str, schema: &str, bytes: &[u8]) -> Result<()> {
        match &self.dir {
            Some(_) => self.secondary(name, schema, bytes),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes)
                    .and_then(|_| out.flush())
                    .map_err(|source| AppError::Output { path: "<stdout>".into(), source })
            }
        }
    }

    pub fn secondary(&mut self, name: &str, schema: &str, bytes: &[u8]) -> Result<()> {
        if let Some(d) = &self.dir {
            write_atomic(&d.join(name), bytes)?;
            self.written.push(OutputRef { file: name.into(), schema: schema.into(), sha256: sha256_hex(bytes) });
        }
        Ok(())
    }

    /// Writes `manifest.json` listing the files written so far.
    pub fn finish(self, mut manifest: RunManifest) -> Result<()> {
        if let Some(d) = &self.dir {
            manifest.outputs = self.written;
            let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
            text.push('\n');
            write_atomic(&d.join("manifest.json"), text.as_bytes())?;
        }
        Ok(())
    }
}

pub fn csv_error(what: &str, e: csv::Error) -> AppError {
    AppError::Output { path: what.into(), source: std::io::Error::other(e) }
}
