use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::write_atomic;
use crate::error::{Error, Result};

/// Record of one command-line run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the canonicalised configuration, empty if none was used.
    pub config_digest: String,
    /// UTC, RFC 3339.
    pub timestamp: String,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub toolkit_version: String,
    /// Points or items that failed without aborting the run.
    #[serde(default)]
    pub failures: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config_digest: &str, timestamp: &str) -> Self {
        Self {
            command: command.to_string(),
            config_digest: config_digest.to_string(),
            timestamp: timestamp.to_string(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            toolkit_version: crate::VERSION.to_string(),
            failures: Vec::new(),
        }
    }

    /// Outputs listed but missing on disk.
    pub fn missing_outputs(&self) -> Vec<&Path> {
        self.outputs.iter().filter(|p| !p.exists()).map(|p| p.as_path()).collect()
    }

    /// Writes the manifest after checking that every listed output exists.
    pub fn write(&self, path: &Path) -> Result<()> {
        let missing = self.missing_outputs();
        if !missing.is_empty() {
            return Err(Error::Precondition(format!("outputs missing: {missing:?}")));
        }
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Numerical(e.to_string()))?;
        write_atomic(path, text.as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }
}
