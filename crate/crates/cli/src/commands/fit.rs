use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};

use kerrspec::estimation::{fit_fluorescence_trace, fluorescence_model, ComplexTrace, FitResult};
use kerrspec::io::trace::exact;
use kerrspec::io::{parse_quantity, read_trace, report_json, report_text, sha256_hex, Quantity};
use kerrspec::constants::HBAR;
use kerrspec::units::{angular_to_hz, hz_to_angular, watt_to_dbm};

use crate::error::{CliError, CliResult};
use crate::run::{parse_list, Run};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitModel {
    TwoLevel,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Input trace (CSV).
    pub trace: PathBuf,
    #[arg(long, value_enum, default_value = "two-level")]
    pub model: FitModel,
    /// Parameters held fixed, e.g. "k=40kHz,g=10kHz". Keys: f (f1), k (kappa),
    /// g (gamma), r (rabi); rates in Hz-family units mean rate/2π.
    #[arg(long)]
    pub fix: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

fn fixed_parameter(entry: &str) -> CliResult<(String, f64)> {
    let (key, value) = entry
        .split_once('=')
        .ok_or_else(|| CliError::usage(format!("--fix entry '{entry}' must be key=value")))?;
    let (name, q) = match key.trim() {
        "f" | "f1" => ("f1", Quantity::Frequency),
        "k" | "kappa" => ("kappa", Quantity::Rate),
        "g" | "gamma" => ("gamma", Quantity::Rate),
        "r" | "rabi" => ("rabi", Quantity::Rate),
        other => return Err(CliError::usage(format!("unknown fit parameter '{other}'"))),
    };
    Ok((name.to_string(), parse_quantity(value, q)?))
}

pub fn run(args: &FitArgs) -> CliResult<()> {
    let text = std::fs::read(&args.trace)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", args.trace.display())))?;
    let trace = read_trace(&args.trace).map_err(|e| CliError::usage(format!("{}: {e}", args.trace.display())))?;
    let fixed: BTreeMap<String, f64> = match &args.fix {
        Some(list) => parse_list(list, fixed_parameter)?.into_iter().collect(),
        None => BTreeMap::new(),
    };
    let result = fit_fluorescence_trace(&trace, &fixed)?;

    let mut run = Run::start("fit-trace", &args.out, &sha256_hex(&text))?;
    run.input(&args.trace);
    run.write_text("report.json", &report_json(&result)?)?;
    run.write_text("report.txt", &report_text(&result))?;
    if parameters(&result).iter().all(|v| v.is_finite()) {
        run.write_trace("residuals.csv", &residual_trace(&trace, &result)?)?;
        run.write_text("fitted.toml", &fitted_config(&trace, &result))?;
    }
    if !result.converged {
        run.failure("fit did not converge");
        run.finish()?;
        return Err(CliError::NotConverged(result.warnings.join("; ")));
    }
    run.finish()
}

fn parameters(result: &FitResult) -> [f64; 4] {
    let v = |n: &str| result.value(n).expect("fluorescence fit reports all parameters");
    [v("f1"), v("kappa"), v("gamma"), v("rabi")]
}

/// Data minus model at the fitted parameters.
fn residual_trace(trace: &ComplexTrace, result: &FitResult) -> CliResult<ComplexTrace> {
    let [f1, kappa, gamma, rabi] = parameters(result);
    let s: Vec<_> = trace
        .frequencies
        .iter()
        .zip(&trace.s11)
        .map(|(&f, &s)| s - fluorescence_model(f, f1, kappa, gamma, rabi))
        .collect();
    let mut out = ComplexTrace::new(trace.frequencies.clone(), s, trace.on_chip_power)?;
    out.metadata.insert("source".into(), "fit-trace residuals".into());
    Ok(out)
}

/// A configuration that regenerates the fitted trace with
/// `simulate-fluorescence`. The fitted Ω_R is expressed as the on-chip power
/// P = Ω_R²·ħω₁/(4κ).
fn fitted_config(trace: &ComplexTrace, result: &FitResult) -> String {
    let [f1, kappa, gamma, rabi] = parameters(result);
    let power = rabi * rabi * HBAR * hz_to_angular(f1) / (4.0 * kappa);
    let mut s = String::new();
    let _ = writeln!(s, "[qubit]");
    let _ = writeln!(s, "qubit_frequency_Hz = {}", exact(f1));
    let _ = writeln!(s, "external_rate_Hz = {}", exact(angular_to_hz(kappa)));
    let _ = writeln!(s, "internal_rate_Hz = {}", exact(angular_to_hz(gamma)));
    let _ = writeln!(s, "\n[fluorescence]");
    if power > 0.0 {
        let _ = writeln!(s, "powers_dBm = [{}]", exact(watt_to_dbm(power)));
    } else {
        let _ = writeln!(s, "powers_W = [0.0]");
    }
    let span = trace.frequencies[trace.len() - 1] - trace.frequencies[0];
    let _ = writeln!(s, "span_Hz = {}", exact(span));
    let _ = writeln!(s, "points = {}", trace.len());
    s
}
