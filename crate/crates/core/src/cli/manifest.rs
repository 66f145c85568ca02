//! Run manifests: enough to re-execute a command and check that it
//! reproduces the same bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    /// File name relative to the output location.
    pub file: String,
    pub sha256: String,
    /// False for artifacts carrying wall-clock timings.
    pub deterministic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Invocation {
    Solve {
        input: String,
        input_sha256: String,
        solver: String,
        k: usize,
        restarts: usize,
        seed: u64,
        init: Option<String>,
        tol: Option<f64>,
        budget: Option<usize>,
        transpose: bool,
        out: String,
    },
    Experiment {
        name: String,
        config: serde_json::Value,
        out: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub invocation: Invocation,
    pub timing: bool,
    pub artifacts: Vec<Artifact>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn artifacts(paths: &[PathBuf], nondeterministic: &[String]) -> Result<Vec<Artifact>> {
    paths
        .iter()
        .map(|p| {
            let file = p
                .file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok(Artifact {
                deterministic: !nondeterministic.contains(&file),
                sha256: sha256_file(p)?,
                file,
            })
        })
        .collect()
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes") + "\n";
        fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    /// Deterministic artifacts whose checksum differs from `other`. Artifacts
    /// are paired by position so a re-run may write under a different name.
    pub fn mismatches(&self, other: &RunManifest) -> Vec<String> {
        self.artifacts
            .iter()
            .enumerate()
            .filter(|(_, a)| a.deterministic)
            .filter(|(i, a)| other.artifacts.get(*i).is_none_or(|b| b.sha256 != a.sha256))
            .map(|(_, a)| a.file.clone())
            .collect()
    }
}
