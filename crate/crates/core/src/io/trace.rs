//! Reflection trace files.
//!
//! ```text
//! # power_dbm=-138
//! # source=simulate-fluorescence
//! freq_hz,re_s11,im_s11
//! 7.4884000000000000e9,9.9...e-1,-1.2...e-2
//! ```
//!
//! Numbers are written with 17 significant digits, which round-trips every
//! f64 exactly.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;

use super::write_atomic;
use crate::error::{Error, Result};
use crate::estimation::ComplexTrace;
use crate::units::{dbm_to_watt, watt_to_dbm};

pub const TRACE_HEADER: &str = "freq_hz,re_s11,im_s11";
pub const POWER_KEY: &str = "power_dbm";

/// Formats a float with 17 significant digits.
pub fn exact(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn format_trace(trace: &ComplexTrace) -> Result<String> {
    trace.validate()?;
    let mut out = String::new();
    out.push_str(&format!("# {POWER_KEY}={}\n", exact(watt_to_dbm(trace.on_chip_power))));
    for (k, v) in &trace.metadata {
        if k == POWER_KEY {
            continue;
        }
        if k.contains('=') || k.contains('\n') || v.contains('\n') {
            return Err(Error::domain(format!("metadata entry '{k}' cannot be written")));
        }
        out.push_str(&format!("# {k}={v}\n"));
    }
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for (f, s) in trace.frequencies.iter().zip(&trace.s11) {
        out.push_str(&format!("{},{},{}\n", exact(*f), exact(s.re), exact(s.im)));
    }
    Ok(out)
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses a trace file. Line numbers in errors are 1-based; a non-finite
/// sample is reported with its 0-based row index among the data rows.
pub fn parse_trace(text: &str) -> Result<ComplexTrace> {
    let mut metadata = BTreeMap::new();
    let mut header_seen = false;
    let mut frequencies = Vec::new();
    let mut s11 = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if header_seen {
                return Err(parse_error(line_no, "metadata must precede the header"));
            }
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| parse_error(line_no, "metadata line must be '# key=value'"))?;
            metadata.insert(k.trim().to_string(), v.trim().to_string());
            continue;
        }
        if !header_seen {
            if line.replace(' ', "") != TRACE_HEADER {
                return Err(parse_error(line_no, format!("expected header '{TRACE_HEADER}'")));
            }
            header_seen = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(parse_error(line_no, format!("expected 3 columns, found {}", cols.len())));
        }
        let mut v = [0.0f64; 3];
        for (k, c) in cols.iter().enumerate() {
            v[k] = c
                .parse()
                .map_err(|_| parse_error(line_no, format!("cannot parse '{c}' as a number")))?;
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(parse_error(
                line_no,
                format!("non-finite sample in data row {}", frequencies.len()),
            ));
        }
        frequencies.push(v[0]);
        s11.push(Complex64::new(v[1], v[2]));
    }
    if !header_seen {
        return Err(parse_error(text.lines().count().max(1), "missing header"));
    }
    let power = match metadata.get(POWER_KEY) {
        Some(p) => {
            let dbm: f64 = p
                .parse()
                .map_err(|_| Error::Parse {
                    line: 1,
                    message: format!("cannot parse {POWER_KEY}='{p}'"),
                })?;
            dbm_to_watt(dbm)
        }
        None => 0.0,
    };
    let trace = ComplexTrace {
        frequencies,
        s11,
        on_chip_power: power,
        metadata,
    };
    trace.validate()?;
    Ok(trace)
}

pub fn read_trace(path: &Path) -> Result<ComplexTrace> {
    parse_trace(&std::fs::read_to_string(path)?)
}

pub fn write_trace(path: &Path, trace: &ComplexTrace) -> Result<()> {
    write_atomic(path, format_trace(trace)?.as_bytes())
}
