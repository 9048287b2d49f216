//! `kerrspec` command-line tool.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 numerical
//! failure, 4 fit did not converge (outputs are still written).

mod commands;
mod error;
mod run;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "kerrspec", version, about = "Driven Kerr oscillator simulation and fitting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reflection traces of the driven qubit versus probe frequency.
    SimulateFluorescence(commands::fluorescence::FluorescenceArgs),
    /// Multi-photon spectrum, peak table and K(n) series.
    SimulateSpectrum(commands::spectrum::SpectrumArgs),
    /// Fit a reflection trace.
    FitTrace(commands::fit::FitArgs),
    /// Qubit frequency versus in-plane field, optionally fitted to data.
    FieldSweep(commands::field::FieldArgs),
    /// Field of a coil assembly along a line through its centre.
    CoilField(commands::coil::CoilArgs),
}

/// Sizes the global rayon pool from `KERRSPEC_THREADS` (0 or unset: automatic).
fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("KERRSPEC_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| CliError::usage(format!("KERRSPEC_THREADS must be a non-negative integer, got '{value}'")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(e.to_string()))?;
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    configure_threads()?;
    match &cli.command {
        Command::SimulateFluorescence(a) => commands::fluorescence::run(a),
        Command::SimulateSpectrum(a) => commands::spectrum::run(a),
        Command::FitTrace(a) => commands::fit::run(a),
        Command::FieldSweep(a) => commands::field::run(a),
        Command::CoilField(a) => commands::coil::run(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
