//! Run directories: `data.csv` plus a `manifest.json` that is enough to
//! reproduce the CSV.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::Config;

pub const DATA_FILE: &str = "data.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedRecord {
    pub label: String,
    pub seed: u64,
}

impl SeedRecord {
    pub fn new(label: impl Into<String>, seed: u64) -> Self {
        Self {
            label: label.into(),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub command: String,
    pub tool: String,
    pub version: String,
    /// Fully resolved configuration; every default is written out.
    pub config: Config,
    pub seeds: Vec<SeedRecord>,
    pub duration_seconds: f64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: Config, seeds: Vec<SeedRecord>, duration_seconds: f64) -> Self {
        Self {
            command: command.to_string(),
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            seeds,
            duration_seconds,
            outputs: vec![DATA_FILE.to_string()],
        }
    }
}

/// Writes `data.csv` and `manifest.json` into `dir`, creating it if needed.
pub fn write_run(dir: &Path, manifest: &RunManifest, csv: &str) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(DATA_FILE), csv)?;
    let mut json = serde_json::to_string_pretty(manifest).map_err(std::io::Error::other)?;
    json.push('\n');
    fs::write(dir.join(MANIFEST_FILE), json)
}

/// Accepts either a manifest file or a run directory containing one.
pub fn manifest_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join(MANIFEST_FILE)
    } else {
        path.to_path_buf()
    }
}
