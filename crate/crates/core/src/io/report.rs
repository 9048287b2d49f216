//! Fit reports: JSON mirroring [`FitResult`] plus a plain-text summary.

use std::fmt::Write as _;
use std::path::Path;

use super::write_atomic;
use crate::error::{Error, Result};
use crate::estimation::FitResult;

pub fn report_json(result: &FitResult) -> Result<String> {
    serde_json::to_string_pretty(result).map_err(|e| Error::Numerical(e.to_string()))
}

pub fn parse_report(text: &str) -> Result<FitResult> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })
}

/// Human-readable table of the parameters with their standard errors.
pub fn report_text(result: &FitResult) -> String {
    let mut s = String::new();
    let status = if result.converged { "converged" } else { "NOT converged" };
    let _ = writeln!(s, "fit {status} after {} iterations", result.iterations);
    let _ = writeln!(s, "residual norm {:.6e}", result.residual_norm);
    for p in &result.parameters {
        let err = match result.standard_error(&p.name) {
            Some(e) => format!(" +/- {e:.3e}"),
            None if p.fixed => " (fixed)".into(),
            None => String::new(),
        };
        let _ = writeln!(s, "  {:<34} {:>24.12e}{err} {}", p.name, p.value, p.unit);
    }
    for w in &result.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}

pub fn write_report(path: &Path, result: &FitResult) -> Result<()> {
    write_atomic(path, report_json(result)?.as_bytes())
}
