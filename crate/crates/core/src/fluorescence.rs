//! Resonance fluorescence of a coherently driven two-level system coupled to
//! a single-port waveguide.
//!
//! Sign conventions used throughout the crate:
//!
//! * detuning Δ = ω_q − ω (qubit minus drive, both angular);
//! * reflection coefficients are reported in the measurement convention
//!   S₁₁ = 1 − (2κ/Γ₀₁)(1 + i2Δ/Γ₀₁)/(1 + (2Δ/Γ₀₁)² + 2(Ω_R/Γ₀₁)²), i.e. the
//!   imaginary part has the sign of Δ. The Lindblad route in [`crate::kerr`]
//!   reports the same convention.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, PLANCK};
use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::units::{angular_to_hz, hz_to_angular};

/// Qubit-limit parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelParams {
    /// f₁ (Hz).
    pub qubit_frequency: f64,
    /// κ (rad/s).
    pub external_rate: f64,
    /// γ (rad/s).
    pub internal_rate: f64,
    /// Γ_φ (rad/s).
    #[serde(default)]
    pub pure_dephasing_rate: f64,
}

impl TwoLevelParams {
    pub fn new(qubit_frequency: f64, external_rate: f64, internal_rate: f64, pure_dephasing_rate: f64) -> Result<Self> {
        let p = Self {
            qubit_frequency,
            external_rate,
            internal_rate,
            pure_dephasing_rate,
        };
        p.validate()?;
        Ok(p)
    }

    /// Run #2 device: f₁ = 7.4887 GHz, κ = 2π·40 kHz, γ = 2π·10 kHz.
    pub fn reference() -> Self {
        Self {
            qubit_frequency: 7.4887e9,
            external_rate: hz_to_angular(40e3),
            internal_rate: hz_to_angular(10e3),
            pure_dephasing_rate: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive(&[("qubit_frequency", self.qubit_frequency), ("external_rate", self.external_rate)])?;
        require_non_negative(&[
            ("internal_rate", self.internal_rate),
            ("pure_dephasing_rate", self.pure_dephasing_rate),
        ])
    }

    /// Γ₀₁ = κ + γ.
    pub fn relaxation_rate(&self) -> f64 {
        self.external_rate + self.internal_rate
    }

    /// Γ₂ = Γ₀₁/2 + Γ_φ.
    pub fn dephasing_rate(&self) -> f64 {
        0.5 * self.relaxation_rate() + self.pure_dephasing_rate
    }

    /// κ/Γ₀₁.
    pub fn coupling_efficiency(&self) -> f64 {
        self.external_rate / self.relaxation_rate()
    }

    /// Energy-relaxation times (1/κ, 1/γ) in seconds.
    pub fn lifetimes(&self) -> (f64, f64) {
        (1.0 / self.external_rate, 1.0 / self.internal_rate)
    }

    /// Detuning Δ = ω_q − ω for a probe at `probe_frequency` (Hz).
    pub fn detuning(&self, probe_frequency: f64) -> f64 {
        hz_to_angular(self.qubit_frequency - probe_frequency)
    }
}

/// A coherent drive tone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    /// Hz.
    pub frequency: f64,
    /// Incident on-chip power (W).
    pub on_chip_power: f64,
    /// Line attenuation between generator and chip (dB).
    #[serde(default)]
    pub attenuation: f64,
}

impl DriveConfig {
    pub fn new(frequency: f64, on_chip_power: f64, attenuation: f64) -> Result<Self> {
        require_positive(&[("frequency", frequency)])?;
        require_non_negative(&[("on_chip_power", on_chip_power)])?;
        if !attenuation.is_finite() {
            return Err(Error::domain("attenuation must be finite"));
        }
        Ok(Self {
            frequency,
            on_chip_power,
            attenuation,
        })
    }

    /// Power at the generator, on-chip power times the line attenuation.
    pub fn generator_power(&self) -> f64 {
        self.on_chip_power * crate::units::db_to_ratio(self.attenuation)
    }

    /// Incident photon flux amplitude α_in = √(P/(ħω)) in √(photons/s).
    pub fn input_amplitude(&self) -> f64 {
        (self.on_chip_power / (HBAR * hz_to_angular(self.frequency))).sqrt()
    }
}

/// Steady-state Bloch vector components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
}

impl BlochVector {
    pub fn norm_squared(&self) -> f64 {
        self.sx * self.sx + self.sy * self.sy + self.sz * self.sz
    }
}

fn steady_state_denominator(rabi: f64, detuning: f64, params: &TwoLevelParams) -> Result<f64> {
    params.validate()?;
    require_non_negative(&[("rabi", rabi)])?;
    if !detuning.is_finite() {
        return Err(Error::domain("detuning must be finite"));
    }
    let g01 = params.relaxation_rate();
    let g2 = params.dephasing_rate();
    let d = g01 * (g2 * g2 + detuning * detuning) + g2 * rabi * rabi;
    if !(d > 0.0) {
        return Err(Error::domain("steady state undefined: relaxation rate is zero"));
    }
    Ok(d)
}

/// Steady-state Pauli expectation values under a drive of Rabi rate `rabi`
/// at detuning `detuning` (both rad/s).
pub fn pauli_steady_state(rabi: f64, detuning: f64, params: &TwoLevelParams) -> Result<BlochVector> {
    let d = steady_state_denominator(rabi, detuning, params)?;
    let g01 = params.relaxation_rate();
    let g2 = params.dephasing_rate();
    Ok(BlochVector {
        sx: g01 * g2 * rabi / d,
        sy: g01 * detuning * rabi / d,
        sz: -1.0 + g2 * rabi * rabi / d,
    })
}

/// Two-level reflection coefficient at detuning Δ and Rabi rate Ω_R.
///
/// Includes pure dephasing; with Γ_φ = 0 this is exactly
/// 1 − (2κ/Γ₀₁)(1 + i2Δ/Γ₀₁)/(1 + (2Δ/Γ₀₁)² + 2(Ω_R/Γ₀₁)²).
pub fn reflection_two_level(detuning: f64, rabi: f64, params: &TwoLevelParams) -> Result<Complex64> {
    let d = steady_state_denominator(rabi, detuning, params)?;
    let g01 = params.relaxation_rate();
    let g2 = params.dephasing_rate();
    let response = Complex64::new(g2, detuning) * (params.external_rate * g01 / d);
    Ok(Complex64::new(1.0, 0.0) - response)
}

/// Rabi rate Ω_R = 2√κ·√(P/(ħω)) for the on-chip drive power.
pub fn rabi_from_power(drive: &DriveConfig, external_rate: f64) -> Result<f64> {
    require_positive(&[("frequency", drive.frequency)])?;
    require_non_negative(&[("on_chip_power", drive.on_chip_power), ("external_rate", external_rate)])?;
    Ok(2.0 * external_rate.sqrt() * drive.input_amplitude())
}

/// Mollow-triplet sideband and Autler-Townes splittings (Hz) for a drive of
/// power `drive_power` (W) detuned by `drive_detuning` (rad/s).
///
/// Returns (2Ω_R/2π, Ω_R/2π) with Ω_R = √(Δ² + Ω²), Ω = √(4κP/(h f)).
pub fn mollow_splittings(
    drive_power: f64,
    drive_detuning: f64,
    external_rate: f64,
    drive_frequency: f64,
) -> Result<(f64, f64)> {
    require_non_negative(&[
        ("drive_power", drive_power),
        ("external_rate", external_rate),
    ])?;
    require_positive(&[("drive_frequency", drive_frequency)])?;
    if !drive_detuning.is_finite() {
        return Err(Error::domain("drive detuning must be finite"));
    }
    let omega = (4.0 * external_rate * drive_power / (PLANCK * drive_frequency)).sqrt();
    let generalized = drive_detuning.hypot(omega);
    Ok((angular_to_hz(2.0 * generalized), angular_to_hz(generalized)))
}

/// Excited-state population p₁ = (⟨σ_z⟩ + 1)/2, bounded by 1/2.
pub fn excited_population(rabi: f64, detuning: f64, params: &TwoLevelParams) -> Result<f64> {
    let s = pauli_steady_state(rabi, detuning, params)?;
    Ok(0.5 * (s.sz + 1.0))
}
