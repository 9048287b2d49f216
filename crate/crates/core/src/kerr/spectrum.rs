use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hamiltonian::kerr_hamiltonian_unchecked;
use super::liouvillian::build_liouvillian;
use super::steady::{steady_state, DensityMatrix};
use super::KerrModel;
use crate::constants::HBAR;
use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::units::hz_to_angular;

/// α_in = √(P/(ħω₁)) in √(photons/s). The mode frequency, not the probe
/// frequency, sets the photon energy.
pub fn input_amplitude(model: &KerrModel, power: f64) -> Result<f64> {
    require_non_negative(&[("power", power)])?;
    Ok((power / (HBAR * hz_to_angular(model.mode_frequency))).sqrt())
}

/// Drive amplitude Ω = 2√κ α_in (rad/s).
pub fn drive_amplitude(model: &KerrModel, power: f64) -> Result<f64> {
    Ok(2.0 * model.external_rate.sqrt() * input_amplitude(model, power)?)
}

/// S₁₁ = 1 − √κ⟨a⟩/α_in, reported in the measurement convention.
///
/// The drive term −(Ω/2)(a + a†) fixes the phase of the incident amplitude to
/// α_in = i|α_in|; the physics-convention value is then conjugated so that
/// the result has the same sign of Im S₁₁ as the two-level formula.
pub fn reflection_kerr(rho: &DensityMatrix, external_rate: f64, input_amplitude: f64) -> Result<Complex64> {
    require_positive(&[("input_amplitude", input_amplitude)])?;
    require_non_negative(&[("external_rate", external_rate)])?;
    let a = rho.mean_annihilation();
    Ok(Complex64::new(1.0, 0.0) - Complex64::new(0.0, 1.0) * a.conj() * (external_rate.sqrt() / input_amplitude))
}

/// Steady state and reflection coefficient at one probe frequency and power.
pub fn solve_point(model: &KerrModel, probe_frequency: f64, power: f64) -> Result<(DensityMatrix, Complex64)> {
    model.validate()?;
    require_positive(&[("probe_frequency", probe_frequency), ("power", power)])?;
    let rho = solve_state(model, model.detuning(probe_frequency), drive_amplitude(model, power)?)?;
    let s11 = reflection_kerr(&rho, model.external_rate, input_amplitude(model, power)?)?;
    Ok((rho, s11))
}

fn solve_state(model: &KerrModel, detuning: f64, drive: f64) -> Result<DensityMatrix> {
    let h = kerr_hamiltonian_unchecked(detuning, model.self_kerr, drive, model.truncation);
    let l = build_liouvillian(&h, model.relaxation_rate())?;
    steady_state(&l)
}

/// A grid point whose steady state could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub power_index: usize,
    pub frequency_index: usize,
    pub message: String,
}

/// Reflection coefficient on a (power × frequency) grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumGrid {
    /// Probe frequencies (Hz), strictly increasing.
    pub frequencies: Vec<f64>,
    /// On-chip powers (W), strictly increasing.
    pub powers: Vec<f64>,
    /// Row-major, `s11[p * frequencies.len() + f]`. Failed points are NaN.
    pub s11: Vec<Complex64>,
    pub failures: Vec<PointFailure>,
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0]) && v.iter().all(|x| x.is_finite())
}

impl SpectrumGrid {
    pub fn new(frequencies: Vec<f64>, powers: Vec<f64>, s11: Vec<Complex64>) -> Result<Self> {
        let grid = Self {
            frequencies,
            powers,
            s11,
            failures: Vec::new(),
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.frequencies.is_empty() || self.powers.is_empty() {
            return Err(Error::Precondition("spectrum grid must not be empty".into()));
        }
        if !strictly_increasing(&self.frequencies) || !strictly_increasing(&self.powers) {
            return Err(Error::Precondition("grid axes must be strictly increasing".into()));
        }
        let expected = self.frequencies.len() * self.powers.len();
        if self.s11.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: self.s11.len(),
            });
        }
        Ok(())
    }

    pub fn at(&self, power_index: usize, frequency_index: usize) -> Complex64 {
        self.s11[power_index * self.frequencies.len() + frequency_index]
    }

    /// One row of the grid (fixed power).
    pub fn row(&self, power_index: usize) -> &[Complex64] {
        let nf = self.frequencies.len();
        &self.s11[power_index * nf..(power_index + 1) * nf]
    }

    /// arg(S₁₁) of one row.
    pub fn phase_row(&self, power_index: usize) -> Vec<f64> {
        self.row(power_index).iter().map(|z| z.arg()).collect()
    }

    pub fn failure_fraction(&self) -> f64 {
        self.failures.len() as f64 / self.s11.len() as f64
    }
}

/// Solves every (power, frequency) point independently, in parallel on the
/// current rayon pool. A failing point is recorded and left as NaN.
pub fn sweep_spectrum(model: &KerrModel, frequencies: &[f64], powers: &[f64]) -> Result<SpectrumGrid> {
    model.validate()?;
    let mut grid = SpectrumGrid {
        frequencies: frequencies.to_vec(),
        powers: powers.to_vec(),
        s11: vec![Complex64::new(f64::NAN, f64::NAN); frequencies.len() * powers.len()],
        failures: Vec::new(),
    };
    grid.validate()?;
    if powers[0] <= 0.0 || frequencies[0] <= 0.0 {
        return Err(Error::Precondition("powers and frequencies must be > 0".into()));
    }
    let nf = frequencies.len();
    let results: Vec<Result<Complex64>> = (0..grid.s11.len())
        .into_par_iter()
        .map(|i| solve_point(model, frequencies[i % nf], powers[i / nf]).map(|(_, s)| s))
        .collect();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(s) => grid.s11[i] = s,
            Err(e) => grid.failures.push(PointFailure {
                power_index: i / nf,
                frequency_index: i % nf,
                message: e.to_string(),
            }),
        }
    }
    Ok(grid)
}

/// Steady-state ⟨a†a⟩ versus drive power at fixed drive detuning (rad/s).
pub fn photon_number_curve(model: &KerrModel, powers: &[f64], drive_detuning: f64) -> Result<Vec<f64>> {
    model.validate()?;
    powers
        .par_iter()
        .map(|&p| {
            let rho = solve_state(model, drive_detuning, drive_amplitude(model, p)?)?;
            Ok(rho.mean_photon_number())
        })
        .collect()
}
