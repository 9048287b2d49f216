use std::path::PathBuf;

use clap::Args;

use kerrspec::io::{parse_quantity, Quantity};
use kerrspec::kerr::{
    extract_multiphoton_peaks, kerr_shift_series, ladder_frequency, ladder_windows, sweep_spectrum, MultiphotonPeak,
};
use kerrspec::units::watt_to_dbm;
use kerrspec::Error;

use super::{csv, load_config, quantities};
use crate::error::{CliError, CliResult};
use crate::run::Run;

/// Largest tolerated fraction of failed grid points.
const MAX_FAILURE_FRACTION: f64 = 0.01;

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Run configuration (TOML) with [kerr] and [spectrum] sections.
    pub config: PathBuf,
    /// Fock-space truncation; overrides [kerr] levels.
    #[arg(long)]
    pub levels: Option<usize>,
    /// Probe step and window half width, e.g. "50kHz,200kHz".
    #[arg(long)]
    pub grid: Option<String>,
    /// On-chip powers, e.g. "-140dBm,-130dBm"; overrides the config.
    #[arg(long, allow_hyphen_values = true)]
    pub power_list: Option<String>,
    /// Highest transition order to extract; overrides the config.
    #[arg(long)]
    pub max_order: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &SpectrumArgs) -> CliResult<()> {
    let cfg = load_config(&args.config)?;
    let mut model = cfg.kerr.ok_or_else(|| CliError::usage("config has no [kerr] section"))?;
    if let Some(n) = args.levels {
        model = model.with_truncation(n);
        model.validate()?;
    }
    let sweep = cfg.spectrum.clone();
    let (step, half_window) = match &args.grid {
        Some(g) => {
            let parts: Vec<&str> = g.split(',').collect();
            if parts.len() != 2 {
                return Err(CliError::usage(format!("--grid expects 'step,half_window', got '{g}'")));
            }
            (
                parse_quantity(parts[0], Quantity::Frequency)?,
                parse_quantity(parts[1], Quantity::Frequency)?,
            )
        }
        None => sweep
            .as_ref()
            .map(|s| (s.step, s.half_window))
            .ok_or_else(|| CliError::usage("no grid: give --grid or a [spectrum] section"))?,
    };
    let mut powers = match &args.power_list {
        Some(list) => quantities(list, Quantity::Power)?,
        None => sweep.as_ref().map(|s| s.powers.clone()).unwrap_or_default(),
    };
    if powers.is_empty() {
        return Err(CliError::usage("power list is empty"));
    }
    powers.sort_by(f64::total_cmp);
    powers.dedup();
    let requested = args.max_order.or(sweep.as_ref().map(|s| s.max_order)).unwrap_or(10);
    // A truncation of N levels supports transitions up to n = N − 1.
    let max_order = requested.min(model.truncation - 1).max(1);

    let freqs = ladder_windows(&model, max_order, step, half_window)?;
    let grid = sweep_spectrum(&model, &freqs, &powers)?;

    let mut run = Run::start("simulate-spectrum", &args.out, &cfg.digest)?;
    run.input(&args.config);
    for f in &grid.failures {
        run.failure(format!(
            "power {:.3} dBm, frequency {} Hz: {}",
            watt_to_dbm(grid.powers[f.power_index]),
            grid.frequencies[f.frequency_index],
            f.message
        ));
    }
    let nf = grid.frequencies.len();
    let rows = grid.s11.iter().enumerate().map(|(i, s)| {
        vec![watt_to_dbm(grid.powers[i / nf]), grid.frequencies[i % nf], s.re, s.im, s.arg()]
    });
    run.write_text("spectrum.csv", &csv(&["power_dbm", "freq_hz", "re_s11", "im_s11", "arg_s11"], rows))?;

    let peaks = detect(&grid, max_order, &mut run)?;
    let peak_rows = peaks.iter().map(|p| {
        vec![
            p.order as f64,
            p.frequency,
            p.frequency - ladder_frequency(&model, p.order),
            watt_to_dbm(p.power),
            p.prominence,
        ]
    });
    run.write_text(
        "peaks.csv",
        &csv(&["order", "freq_hz", "offset_from_ladder_hz", "power_dbm", "prominence_rad"], peak_rows),
    )?;
    let pairs: Vec<(usize, f64)> = peaks.iter().map(|p| (p.order, p.frequency)).collect();
    let series = if pairs.len() >= 2 { kerr_shift_series(&pairs)? } else { Vec::new() };
    let spacing = pairs.windows(2).map(|w| vec![w[1].0 as f64, w[0].1 - w[1].1]);
    run.write_text("spacing.csv", &csv(&["order", "spacing_hz"], spacing))?;
    run.write_text(
        "kerr_series.csv",
        &csv(
            &["order", "kerr_hz"],
            series.iter().map(|&(n, k)| vec![n as f64, k / std::f64::consts::TAU]),
        ),
    )?;

    let fraction = grid.failure_fraction();
    run.finish()?;
    if fraction > MAX_FAILURE_FRACTION {
        return Err(CliError::Numeric(format!(
            "{} of {} grid points failed",
            grid.failures.len(),
            grid.s11.len()
        )));
    }
    Ok(())
}

/// Extracts as many consecutive orders as the grid resolves, recording the
/// first order that could not be found.
fn detect(grid: &kerrspec::SpectrumGrid, max_order: usize, run: &mut Run) -> CliResult<Vec<MultiphotonPeak>> {
    let mut order = max_order;
    loop {
        match extract_multiphoton_peaks(grid, order) {
            Ok(p) => return Ok(p),
            Err(Error::MissingPeak { missing, .. }) if missing > 1 => {
                run.failure(format!("transition order {missing} not detected"));
                eprintln!("warning: transition order {missing} not detected");
                order = missing - 1;
            }
            Err(Error::MissingPeak { .. }) => {
                run.failure("fundamental transition not detected".to_string());
                eprintln!("warning: fundamental transition not detected");
                return Ok(Vec::new());
            }
            Err(e) => return Err(e.into()),
        }
    }
}
