//! Bundled reference dataset of the measured device.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::hz_to_angular;

const BUNDLED: &str = include_str!("../../data/reference_runs.toml");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shielding {
    pub copper: bool,
    pub aluminum: bool,
    pub mu_metal: bool,
}

/// One cooldown. Rates are angular (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CooldownRecord {
    pub run: u32,
    /// Hz.
    pub qubit_frequency: f64,
    /// α (rad/s), where measured.
    pub anharmonicity: Option<f64>,
    pub external_quality_factor: f64,
    pub internal_quality_factor: f64,
    /// κ₀ (rad/s).
    pub external_rate: f64,
    /// γ₀ (rad/s).
    pub internal_rate: f64,
    pub shielding: Shielding,
    /// Whether the field coils were mounted.
    pub magnetic_field: bool,
}

/// Scalar anchors from spectroscopy and field sweeps. Frequencies in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FigureAnchors {
    pub f3: f64,
    pub f10: f64,
    /// Spacing of consecutive multi-photon peaks, K/(2·2π) (Hz).
    pub ladder_spacing: f64,
    /// K (rad/s).
    pub self_kerr: f64,
    pub al_critical_field: f64,
    pub al_critical_field_uncertainty: f64,
    pub al_kinetic_inductance: f64,
    pub al_kinetic_inductance_uncertainty: f64,
    pub line_attenuation_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceDataset {
    pub runs: Vec<CooldownRecord>,
    pub anchors: FigureAnchors,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    id: u32,
    #[serde(rename = "f1_Hz")]
    f1: f64,
    #[serde(rename = "anharmonicity_Hz")]
    anharmonicity: Option<f64>,
    q_c: f64,
    q_i: f64,
    #[serde(rename = "kappa0_Hz")]
    kappa0: f64,
    #[serde(rename = "gamma0_Hz")]
    gamma0: f64,
    shield_cu: bool,
    shield_al: bool,
    shield_mumetal: bool,
    magnetic_field: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnchors {
    #[serde(rename = "f3_Hz")]
    f3: f64,
    #[serde(rename = "f10_Hz")]
    f10: f64,
    #[serde(rename = "ladder_spacing_Hz")]
    ladder_spacing: f64,
    #[serde(rename = "self_kerr_Hz")]
    self_kerr: f64,
    #[serde(rename = "al_critical_field_T")]
    bc: f64,
    #[serde(rename = "al_critical_field_uncertainty_T")]
    bc_err: f64,
    #[serde(rename = "al_kinetic_inductance_H")]
    lk: f64,
    #[serde(rename = "al_kinetic_inductance_uncertainty_H")]
    lk_err: f64,
    #[serde(rename = "line_attenuation_dB")]
    attenuation: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataset {
    run: Vec<RawRun>,
    anchors: RawAnchors,
}

impl ReferenceDataset {
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawDataset = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let runs = raw
            .run
            .into_iter()
            .map(|r| CooldownRecord {
                run: r.id,
                qubit_frequency: r.f1,
                anharmonicity: r.anharmonicity.map(hz_to_angular),
                external_quality_factor: r.q_c,
                internal_quality_factor: r.q_i,
                external_rate: hz_to_angular(r.kappa0),
                internal_rate: hz_to_angular(r.gamma0),
                shielding: Shielding {
                    copper: r.shield_cu,
                    aluminum: r.shield_al,
                    mu_metal: r.shield_mumetal,
                },
                magnetic_field: r.magnetic_field,
            })
            .collect();
        let a = raw.anchors;
        Ok(Self {
            runs,
            anchors: FigureAnchors {
                f3: a.f3,
                f10: a.f10,
                ladder_spacing: a.ladder_spacing,
                self_kerr: hz_to_angular(a.self_kerr),
                al_critical_field: a.bc,
                al_critical_field_uncertainty: a.bc_err,
                al_kinetic_inductance: a.lk,
                al_kinetic_inductance_uncertainty: a.lk_err,
                line_attenuation_db: a.attenuation,
            },
        })
    }

    /// The dataset shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_toml(BUNDLED).expect("bundled reference data parses")
    }

    pub fn run(&self, id: u32) -> Option<&CooldownRecord> {
        self.runs.iter().find(|r| r.run == id)
    }
}

impl CooldownRecord {
    /// Q = ω₁/rate for the (external, internal) rates.
    pub fn quality_factors_from_rates(&self) -> (f64, f64) {
        let w = hz_to_angular(self.qubit_frequency);
        (w / self.external_rate, w / self.internal_rate)
    }
}
