//! Output directory handling and manifest bookkeeping shared by all commands.

use std::path::{Path, PathBuf};

use kerrspec::estimation::ComplexTrace;
use kerrspec::io::{self, RunManifest};

use crate::error::{CliError, CliResult};

pub const MANIFEST_NAME: &str = "manifest.json";

pub struct Run {
    dir: PathBuf,
    manifest: RunManifest,
}

impl Run {
    pub fn start(command: &str, out: &Path, digest: &str) -> CliResult<Self> {
        std::fs::create_dir_all(out)
            .map_err(|e| CliError::usage(format!("cannot create output directory {}: {e}", out.display())))?;
        let timestamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
        Ok(Self {
            dir: out.to_path_buf(),
            manifest: RunManifest::new(command, digest, &timestamp),
        })
    }

    pub fn input(&mut self, path: &Path) {
        self.manifest.inputs.push(path.to_path_buf());
    }

    pub fn failure(&mut self, message: impl Into<String>) {
        self.manifest.failures.push(message.into());
    }

    fn register(&mut self, name: &str) -> PathBuf {
        let path = self.dir.join(name);
        self.manifest.outputs.push(path.clone());
        path
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> CliResult<()> {
        let path = self.register(name);
        Ok(io::write_atomic(&path, text.as_bytes())?)
    }

    pub fn write_trace(&mut self, name: &str, trace: &ComplexTrace) -> CliResult<()> {
        let path = self.register(name);
        Ok(io::write_trace(&path, trace)?)
    }

    pub fn finish(self) -> CliResult<()> {
        Ok(self.manifest.write(&self.dir.join(MANIFEST_NAME))?)
    }
}

/// Comma-separated list parsed element-wise.
pub fn parse_list<T>(text: &str, parse: impl Fn(&str) -> CliResult<T>) -> CliResult<Vec<T>> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(parse).collect()
}
