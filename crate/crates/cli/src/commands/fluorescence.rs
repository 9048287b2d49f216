use std::path::PathBuf;

use clap::{Args, ValueEnum};
use num_complex::Complex64;

use kerrspec::estimation::ComplexTrace;
use kerrspec::fluorescence::{rabi_from_power, reflection_two_level, DriveConfig};
use kerrspec::io::Quantity;
use kerrspec::kerr::sweep_spectrum;
use kerrspec::units::watt_to_dbm;

use super::{csv, linspace, load_config, quantities};
use crate::error::{CliError, CliResult};
use crate::run::Run;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimModel {
    /// Closed-form two-level response from the [qubit] section.
    TwoLevel,
    /// Driven Kerr oscillator from the [kerr] section.
    Kerr,
}

#[derive(Debug, Args)]
pub struct FluorescenceArgs {
    /// Run configuration (TOML).
    pub config: PathBuf,
    /// On-chip powers, e.g. "-150dBm,-140dBm"; overrides the config.
    #[arg(long, allow_hyphen_values = true)]
    pub power_list: Option<String>,
    /// Full probe span around the resonance, e.g. "600kHz".
    #[arg(long)]
    pub freq_span: Option<String>,
    /// Samples per trace.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_enum, default_value = "two-level")]
    pub model: SimModel,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &FluorescenceArgs) -> CliResult<()> {
    let cfg = load_config(&args.config)?;
    let sweep = cfg.fluorescence.clone();
    let powers = match &args.power_list {
        Some(list) => quantities(list, Quantity::Power)?,
        None => sweep.as_ref().map(|s| s.powers.clone()).unwrap_or_default(),
    };
    if powers.is_empty() {
        return Err(CliError::usage("power list is empty"));
    }
    let span = match &args.freq_span {
        Some(s) => kerrspec::io::parse_quantity(s, Quantity::Frequency)?,
        None => sweep
            .as_ref()
            .map(|s| s.span)
            .ok_or_else(|| CliError::usage("no frequency span: give --freq-span or [fluorescence] span"))?,
    };
    let points = args.points.or(sweep.as_ref().map(|s| s.points)).unwrap_or(401);
    if !(span > 0.0) || points < 2 {
        return Err(CliError::usage("frequency span must be > 0 with at least 2 points"));
    }
    let attenuation = sweep.as_ref().map_or(0.0, |s| s.attenuation_db);

    let (center, model_name) = match args.model {
        SimModel::TwoLevel => (
            cfg.qubit.ok_or_else(|| CliError::usage("config has no [qubit] section"))?.qubit_frequency,
            "two-level",
        ),
        SimModel::Kerr => (
            cfg.kerr.ok_or_else(|| CliError::usage("config has no [kerr] section"))?.mode_frequency,
            "kerr",
        ),
    };
    let freqs = linspace(center - span / 2.0, center + span / 2.0, points);

    let mut run = Run::start("simulate-fluorescence", &args.out, &cfg.digest)?;
    run.input(&args.config);
    let mut plot = Vec::new();
    for (i, &power) in powers.iter().enumerate() {
        let s11 = simulate(&cfg, args.model, &freqs, power)?;
        let mut trace = ComplexTrace::new(freqs.clone(), s11, power)?;
        let m = &mut trace.metadata;
        m.insert("source".into(), "simulate-fluorescence".into());
        m.insert("model".into(), model_name.into());
        m.insert("detuning".into(), "omega_q - omega".into());
        m.insert("attenuation_db".into(), format!("{attenuation}"));
        m.insert("generator_power_dbm".into(), format!("{}", watt_to_dbm(power) + attenuation));
        for (f, s) in freqs.iter().zip(&trace.s11) {
            plot.push(vec![watt_to_dbm(power), *f, s.re, s.im, s.arg()]);
        }
        run.write_trace(&format!("trace_{i:03}.csv"), &trace)?;
    }
    run.write_text(
        "plot_data.csv",
        &csv(&["power_dbm", "freq_hz", "re_s11", "im_s11", "arg_s11"], plot),
    )?;
    run.finish()
}

fn simulate(
    cfg: &kerrspec::io::RunConfig,
    model: SimModel,
    freqs: &[f64],
    power: f64,
) -> CliResult<Vec<Complex64>> {
    match model {
        SimModel::TwoLevel => {
            let q = cfg.qubit.as_ref().expect("checked");
            let drive = DriveConfig::new(q.qubit_frequency, power, 0.0)?;
            let rabi = rabi_from_power(&drive, q.external_rate)?;
            freqs
                .iter()
                .map(|&f| Ok(reflection_two_level(q.detuning(f), rabi, q)?))
                .collect()
        }
        SimModel::Kerr => {
            let k = cfg.kerr.as_ref().expect("checked");
            let grid = sweep_spectrum(k, freqs, &[power])?;
            if let Some(f) = grid.failures.first() {
                return Err(CliError::Numeric(format!(
                    "steady state failed at {} Hz: {}",
                    freqs[f.frequency_index], f.message
                )));
            }
            Ok(grid.s11)
        }
    }
}
