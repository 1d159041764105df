use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Record of one command-line run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub subcommand: String,
    /// Every setting that influenced the outputs, defaults included.
    pub config: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<String>,
    pub version: String,
    pub wall_time_secs: f64,
    /// Output path → hex SHA-256.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: Vec<String>, subcommand: impl Into<String>, config: Value) -> Self {
        Self {
            command,
            subcommand: subcommand.into(),
            config,
            seed: None,
            units: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_secs: 0.0,
            outputs: BTreeMap::new(),
        }
    }

    pub fn record_output(&mut self, path: &Path) -> Result<()> {
        let digest = sha256_file(path)?;
        self.outputs.insert(path.display().to_string(), digest);
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        super::write_json(path, self)
    }

    pub fn read(path: &Path) -> Result<Self> {
        super::read_json(path)
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
