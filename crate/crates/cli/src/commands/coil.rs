use std::path::PathBuf;

use clap::{Args, ValueEnum};

use kerrspec::io::{config_digest, load_assembly, parse_quantity, Quantity};
use kerrspec::magnetics::{conversion_factor, homogeneity_report, Vec3};

use super::csv;
use crate::error::{CliError, CliResult};
use crate::run::Run;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    X,
    Y,
    Z,
}

#[derive(Debug, Args)]
pub struct CoilArgs {
    /// Coil geometry (TOML).
    pub geometry: PathBuf,
    /// Coil current, e.g. "1A" or "250mA".
    #[arg(long, default_value = "1A")]
    pub current: String,
    /// Sample line relative to the centre: "start,end,samples".
    #[arg(long, allow_hyphen_values = true, default_value = "-5mm,5mm,101")]
    pub line: String,
    /// Direction of the sample line.
    #[arg(long, value_enum, default_value = "x")]
    pub direction: Direction,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &CoilArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.geometry)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", args.geometry.display())))?;
    let assembly = load_assembly(&args.geometry)
        .map_err(|e| CliError::usage(format!("{}: {e}", args.geometry.display())))?;
    let current = parse_quantity(&args.current, Quantity::Current)?;
    let parts: Vec<&str> = args.line.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(CliError::usage(format!("--line expects 'start,end,samples', got '{}'", args.line)));
    }
    let start = parse_quantity(parts[0], Quantity::Length)?;
    let end = parse_quantity(parts[1], Quantity::Length)?;
    let samples: usize = parts[2]
        .parse()
        .map_err(|_| CliError::usage(format!("sample count '{}' is not an integer", parts[2])))?;
    let dir = match args.direction {
        Direction::X => Vec3::x(),
        Direction::Y => Vec3::y(),
        Direction::Z => Vec3::z(),
    };
    let c = assembly.center();
    let report = homogeneity_report(&assembly, current, c + dir * start, c + dir * end, samples)?;
    let factor = conversion_factor(&assembly)?;
    let b0 = assembly.field(current, c)?;

    let mut run = Run::start("coil-field", &args.out, &config_digest(&text)?)?;
    run.input(&args.geometry);
    let rows = report.points.iter().map(|p| {
        let offset = (p.position - c).dot(&dir);
        let dev = if b0.norm() > 0.0 { (p.field - b0).norm() / b0.norm() } else { 0.0 };
        vec![offset, p.field.x, p.field.y, p.field.z, p.field.norm(), dev]
    });
    run.write_text(
        "field_line.csv",
        &csv(&["position_m", "bx_t", "by_t", "bz_t", "b_t", "relative_deviation"], rows),
    )?;
    let summary = serde_json::json!({
        "current_a": current,
        "center_field_t": b0.norm(),
        "conversion_factor_t_per_a": factor,
        "max_relative_deviation": report.max_relative_deviation,
        "line_start_m": start,
        "line_end_m": end,
        "samples": samples,
    });
    run.write_text("summary.json", &serde_json::to_string_pretty(&summary).expect("plain json"))?;
    run.finish()
}
