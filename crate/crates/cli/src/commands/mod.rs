pub mod coil;
pub mod field;
pub mod fit;
pub mod fluorescence;
pub mod spectrum;

use std::fmt::Write as _;
use std::path::Path;

use kerrspec::io::{parse_quantity, Quantity, RunConfig};
use kerrspec::io::trace::exact;

use crate::error::{CliError, CliResult};
use crate::run::parse_list;

pub(crate) fn load_config(path: &Path) -> CliResult<RunConfig> {
    RunConfig::load(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

pub(crate) fn quantities(text: &str, q: Quantity) -> CliResult<Vec<f64>> {
    parse_list(text, |s| Ok(parse_quantity(s, q)?))
}

/// CSV with a header row; every value written with [`exact`].
pub(crate) fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| exact(x)).collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}

pub(crate) fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| start + (end - start) * i as f64 / (n - 1) as f64)
        .collect()
}
