//! Driven Kerr oscillator in a truncated Fock basis.
//!
//! Pipeline for a single (probe frequency, power) point:
//! [`build_kerr_hamiltonian`] → [`build_liouvillian`] → [`steady_state`] →
//! [`reflection_kerr`]. [`sweep_spectrum`] runs it over a grid and
//! [`extract_multiphoton_peaks`] / [`kerr_shift_series`] analyse the result.

pub mod band;
mod hamiltonian;
mod liouvillian;
pub(crate) mod peaks;
mod spectrum;
mod steady;

pub use hamiltonian::{annihilation, build_kerr_hamiltonian, number_operator};
pub use liouvillian::{build_liouvillian, Liouvillian};
pub use peaks::{
    extract_multiphoton_peaks, extract_multiphoton_peaks_with, kerr_shift_series, ladder_frequency, ladder_windows,
    MultiphotonPeak,
    PeakOptions,
};
pub use spectrum::{
    drive_amplitude, input_amplitude, photon_number_curve, reflection_kerr, solve_point, sweep_spectrum,
    PointFailure, SpectrumGrid,
};
pub use steady::{steady_state, steady_state_least_squares, DensityMatrix};

use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::units::hz_to_angular;

/// Default Fock-space truncation.
pub const DEFAULT_TRUNCATION: usize = 30;
/// Largest truncation handled by the dense representation.
pub const MAX_TRUNCATION: usize = 64;

/// Parameters of the driven Kerr oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KerrModel {
    /// f₁ (Hz).
    pub mode_frequency: f64,
    /// K (rad/s).
    pub self_kerr: f64,
    /// κ (rad/s).
    pub external_rate: f64,
    /// γ (rad/s).
    pub internal_rate: f64,
    /// Number of Fock levels kept.
    pub truncation: usize,
}

impl KerrModel {
    pub fn new(
        mode_frequency: f64,
        self_kerr: f64,
        external_rate: f64,
        internal_rate: f64,
        truncation: usize,
    ) -> Result<Self> {
        let m = Self {
            mode_frequency,
            self_kerr,
            external_rate,
            internal_rate,
            truncation,
        };
        m.validate()?;
        Ok(m)
    }

    /// Simulation parameters of the reference device: f₁ = 7.4887 GHz,
    /// K = 2π·4.5 MHz, κ = 2π·40 kHz, γ = 2π·10 kHz, 30 levels.
    pub fn reference() -> Self {
        Self {
            mode_frequency: 7.4887e9,
            self_kerr: hz_to_angular(4.5e6),
            external_rate: hz_to_angular(40e3),
            internal_rate: hz_to_angular(10e3),
            truncation: DEFAULT_TRUNCATION,
        }
    }

    pub fn with_truncation(mut self, truncation: usize) -> Self {
        self.truncation = truncation;
        self
    }

    /// Two-level truncations are allowed here (qubit limit); the Hamiltonian
    /// builder itself requires at least three levels unless asked otherwise.
    pub fn validate(&self) -> Result<()> {
        require_positive(&[("mode_frequency", self.mode_frequency)])?;
        require_non_negative(&[("external_rate", self.external_rate), ("internal_rate", self.internal_rate)])?;
        if !self.self_kerr.is_finite() {
            return Err(Error::domain("self_kerr must be finite"));
        }
        if !(self.external_rate + self.internal_rate > 0.0) {
            return Err(Error::domain("total relaxation rate must be > 0"));
        }
        if self.truncation < 2 || self.truncation > MAX_TRUNCATION {
            return Err(Error::domain(format!(
                "truncation must lie in [2, {MAX_TRUNCATION}], got {}",
                self.truncation
            )));
        }
        Ok(())
    }

    /// Γ₀₁ = κ + γ.
    pub fn relaxation_rate(&self) -> f64 {
        self.external_rate + self.internal_rate
    }

    /// Δ = ω₁ − ω for a probe at `probe_frequency` (Hz).
    pub fn detuning(&self, probe_frequency: f64) -> f64 {
        hz_to_angular(self.mode_frequency - probe_frequency)
    }
}
