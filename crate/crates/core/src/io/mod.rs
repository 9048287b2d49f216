//! Configuration, trace files, reports and run manifests.

use std::io::Write;
use std::path::Path;

use crate::error::Result;

pub mod config;
pub mod manifest;
pub mod quantity;
pub mod reference;
pub mod report;
pub mod trace;

pub use config::{
    assembly_from_toml, config_digest, load_assembly, FieldSweep, FluorescenceSweep, RunConfig,
    SpectrumSweep,
};
pub use manifest::RunManifest;
pub use quantity::{parse_quantity, Quantity};
pub use reference::{CooldownRecord, FigureAnchors, ReferenceDataset, Shielding};
pub use report::{parse_report, report_json, report_text, write_report};
pub use trace::{format_trace, parse_trace, read_trace, write_trace};

/// Lower-case hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.txt");
        write_atomic(&p, b"first").unwrap();
        write_atomic(&p, b"second").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "second");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn missing_directory_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(write_atomic(&dir.path().join("nope/out.txt"), b"x").is_err());
    }
}
