use std::path::{Path, PathBuf};

use clap::Args;

use kerrspec::circuit::qubit_frequency_vs_field;
use kerrspec::estimation::fit_field_dependence;
use kerrspec::io::{report_json, report_text, Quantity};
use kerrspec::{CircuitParams, Error};

use super::{csv, load_config, quantities};
use crate::error::{CliError, CliResult};
use crate::run::Run;

#[derive(Debug, Args)]
pub struct FieldArgs {
    /// Run configuration (TOML) with a [circuit] section.
    pub config: PathBuf,
    /// In-plane fields, e.g. "0mT,35mT,70mT"; overrides [field] fields.
    #[arg(long, allow_hyphen_values = true)]
    pub b_list: Option<String>,
    /// Measured (field, frequency) table to fit, with header `field_t,f1_hz`.
    #[arg(long)]
    pub fit: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// Reads a two-column `field_t,f1_hz` table.
pub fn read_field_table(path: &Path) -> CliResult<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let bad = |line: usize, msg: &str| CliError::from(Error::Parse {
        line,
        message: format!("{}: {msg}", path.display()),
    });
    let mut rows = Vec::new();
    let mut header = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header {
            if line.replace(' ', "") != "field_t,f1_hz" {
                return Err(bad(i + 1, "expected header 'field_t,f1_hz'"));
            }
            header = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Vec<f64> = cols.iter().filter_map(|c| c.parse().ok()).collect();
        if cols.len() != 2 || parsed.len() != 2 || !parsed.iter().all(|x| x.is_finite()) {
            return Err(bad(i + 1, "expected two finite numbers"));
        }
        rows.push((parsed[0], parsed[1]));
    }
    if !header {
        return Err(bad(1, "missing header"));
    }
    Ok(rows)
}

pub fn run(args: &FieldArgs) -> CliResult<()> {
    let cfg = load_config(&args.config)?;
    let circuit: CircuitParams = cfg.circuit.ok_or_else(|| CliError::usage("config has no [circuit] section"))?;
    let fields = match &args.b_list {
        Some(list) => quantities(list, Quantity::Field)?,
        None => cfg.field.as_ref().map(|f| f.fields.clone()).unwrap_or_default(),
    };
    if fields.is_empty() {
        return Err(CliError::usage("field list is empty"));
    }
    for &b in &fields {
        if !(b >= 0.0) {
            return Err(CliError::usage(format!("field {} mT is negative", b * 1e3)));
        }
        if b >= circuit.al_critical_field {
            return Err(CliError::usage(format!(
                "field {} mT is at or above the critical field {} mT",
                b * 1e3,
                circuit.al_critical_field * 1e3
            )));
        }
    }
    let data = args.fit.as_deref().map(read_field_table).transpose()?;

    let mut run = Run::start("field-sweep", &args.out, &cfg.digest)?;
    run.input(&args.config);
    let f0 = qubit_frequency_vs_field(0.0, &circuit)?;
    let rows = fields
        .iter()
        .map(|&b| {
            let f = qubit_frequency_vs_field(b, &circuit)?;
            Ok(vec![b, f, f - f0])
        })
        .collect::<CliResult<Vec<_>>>()?;
    run.write_text("field_sweep.csv", &csv(&["field_t", "f1_hz", "delta_f1_hz"], rows))?;

    if let (Some(points), Some(path)) = (data, &args.fit) {
        run.input(path);
        let result = fit_field_dependence(&points, &circuit)?;
        let fitted = CircuitParams {
            al_critical_field: result.value("al_critical_field").expect("fitted"),
            al_kinetic_inductance_zero_field: result.value("al_kinetic_inductance_zero_field").expect("fitted"),
            ..circuit
        };
        let curve = points
            .iter()
            .map(|&(b, f)| {
                let m = qubit_frequency_vs_field(b, &fitted)?;
                Ok(vec![b, f, m, f - m])
            })
            .collect::<CliResult<Vec<_>>>()?;
        run.write_text("fit_curve.csv", &csv(&["field_t", "f1_hz", "model_hz", "residual_hz"], curve))?;
        run.write_text("report.json", &report_json(&result)?)?;
        run.write_text("report.txt", &report_text(&result))?;
        if !result.converged {
            run.failure("field fit did not converge");
            run.finish()?;
            return Err(CliError::NotConverged(result.warnings.join("; ")));
        }
    }
    run.finish()
}
