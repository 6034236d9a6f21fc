//! Run manifests. The manifest is byte-deterministic; wall-clock timings
//! go to a separate `timings.json`.

use crate::args::Command;
use crate::error::CliError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

pub const MANIFEST: &str = "manifest.json";
pub const TIMINGS: &str = "timings.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub parameters: Command,
    pub seed: Option<u64>,
    pub versions: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub results: serde_json::Value,
}

impl Manifest {
    pub fn new(parameters: &Command, seed: Option<u64>, outputs: Vec<String>, results: serde_json::Value) -> Self {
        let mut versions = BTreeMap::new();
        versions.insert("hypdeconv".to_string(), env!("CARGO_PKG_VERSION").to_string());
        versions.insert("manifest".to_string(), "1".to_string());
        Self { command: parameters.name().to_string(), parameters: parameters.clone(), seed, versions, outputs, results }
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(dir.join(MANIFEST), text + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("cannot read manifest {}: {e}", path.display())))
    }
}

#[derive(Debug, Default, Serialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub stages: BTreeMap<String, f64>,
}

impl Timings {
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        fs::write(dir.join(TIMINGS), serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}
