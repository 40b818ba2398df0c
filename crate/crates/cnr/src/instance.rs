//! Instance JSON: `{ "n": int, "terms": [[i, j, w], ...], "label": string, "seed": int|null }`.

use std::fmt::Write as _;
use std::path::Path;

use cnr_core::{Family, GeneratorSpec, ProblemInstance, Term};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};
use crate::files::{read_input, sha256_hex};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub terms: Vec<(usize, usize, f64)>,
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl InstanceFile {
    pub fn from_instance(inst: &ProblemInstance, label: &str, seed: Option<u64>) -> Self {
        InstanceFile {
            n: inst.n(),
            terms: inst.terms().iter().map(|t| (t.i, t.j, t.w)).collect(),
            label: label.to_string(),
            seed,
        }
    }

    pub fn to_instance(&self) -> cnr_core::Result<ProblemInstance> {
        ProblemInstance::new(self.n, self.terms.iter().map(|&(i, j, w)| Term::new(i, j, w)).collect())
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Canonical text: one term per line, shortest round-trip floats, LF endings.
    pub fn to_json(&self) -> String {
        let num = |w: f64| serde_json::to_string(&w).expect("finite weight");
        let mut out = format!("{{\n  \"n\": {},\n  \"terms\": [", self.n);
        for (k, &(i, j, w)) in self.terms.iter().enumerate() {
            let sep = if k + 1 < self.terms.len() { "," } else { "" };
            write!(out, "\n    [{i}, {j}, {}]{sep}", num(w)).unwrap();
        }
        if !self.terms.is_empty() {
            out.push_str("\n  ");
        }
        let seed = self.seed.map_or("null".to_string(), |s| s.to_string());
        let label = serde_json::to_string(&self.label).expect("string");
        write!(out, "],\n  \"label\": {label},\n  \"seed\": {seed}\n}}\n").unwrap();
        out
    }
}

/// Label recording how an instance was generated.
pub fn generated_label(spec: &GeneratorSpec) -> String {
    match (spec.family, spec.density) {
        (Family::Max2Xor, Some(d)) => format!("max2xor n={} density={d} seed={}", spec.n, spec.seed),
        _ => format!("{} n={} seed={}", spec.family.name(), spec.n, spec.seed),
    }
}

/// An instance read from disk with the hash of its bytes.
#[derive(Debug, Clone)]
pub struct LoadedInstance {
    pub file: InstanceFile,
    pub instance: ProblemInstance,
    pub sha256: String,
}

pub fn load_instance(path: &Path) -> Result<LoadedInstance> {
    let bytes = read_input(path)?;
    let format = |msg: String| AppError::Format { path: path.display().to_string(), msg };
    let text = std::str::from_utf8(&bytes).map_err(|e| format(e.to_string()))?;
    let file = InstanceFile::from_json(text).map_err(|e| format(e.to_string()))?;
    let instance = file.to_instance()?;
    Ok(LoadedInstance { file, instance, sha256: sha256_hex(&bytes) })
}
