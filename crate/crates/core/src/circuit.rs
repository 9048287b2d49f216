//! Lumped-element circuit and thin-film materials model.
//!
//! The qubit is modelled as a shunt capacitance in parallel with three series
//! inductances: a field-independent geometric inductance, the kinetic
//! inductance of the granular aluminum (grAl) film, which is treated as field
//! independent, and the kinetic inductance of the pure Al leads, which grows
//! with in-plane field as the Al gap closes.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::constants::{BCS_GAP_RATIO, BOLTZMANN, ELEMENTARY_CHARGE, FLUX_QUANTUM, HBAR, PLANCK};
use crate::error::{require_non_negative, require_positive, Error, Result};

/// Thin-film material description of the grAl inductor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    /// Normal-state sheet resistance (Ω/□).
    pub sheet_resistance: f64,
    /// Critical temperature (K).
    pub critical_temperature: f64,
    /// Zero-temperature, zero-field gap (J). `None` means the BCS value.
    pub gap_zero: Option<f64>,
    /// Grain size (m).
    pub grain_size: f64,
    /// Critical current density (A/m²).
    pub critical_current_density: f64,
}

impl MaterialParams {
    pub fn new(
        sheet_resistance: f64,
        critical_temperature: f64,
        gap_zero: Option<f64>,
        grain_size: f64,
        critical_current_density: f64,
    ) -> Result<Self> {
        require_positive(&[
            ("sheet_resistance", sheet_resistance),
            ("critical_temperature", critical_temperature),
            ("grain_size", grain_size),
            ("critical_current_density", critical_current_density),
        ])?;
        if let Some(gap) = gap_zero {
            require_positive(&[("gap_zero", gap)])?;
            let ratio = gap / bcs_gap(critical_temperature)?;
            if !(0.5..=2.0).contains(&ratio) {
                return Err(Error::domain(format!(
                    "gap_zero is {ratio:.3} times the BCS value; expected within [0.5, 2.0]"
                )));
            }
        }
        Ok(Self {
            sheet_resistance,
            critical_temperature,
            gap_zero,
            grain_size,
            critical_current_density,
        })
    }

    /// grAl film of the reference device: 1800 Ω/□, T_c = 1.9 K, 4 nm grains
    /// (midpoint of the 3-5 nm range), j_c = 0.4 mA/µm².
    pub fn reference() -> Self {
        Self {
            sheet_resistance: 1800.0,
            critical_temperature: 1.9,
            gap_zero: None,
            grain_size: 4e-9,
            critical_current_density: 0.4e-3 / 1e-12,
        }
    }

    /// The stated gap, or the BCS estimate from the critical temperature.
    pub fn gap(&self) -> f64 {
        self.gap_zero
            .unwrap_or(BCS_GAP_RATIO * BOLTZMANN * self.critical_temperature)
    }
}

/// Lumped-element parameters of the qubit circuit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    /// C_s (F).
    pub shunt_capacitance: f64,
    /// L_s (H).
    pub geometric_inductance: f64,
    /// L_k,grAl (H), field independent.
    pub gral_kinetic_inductance: f64,
    /// L_k,Al at zero field (H).
    pub al_kinetic_inductance_zero_field: f64,
    /// In-plane pair-breaking field B_c,Al (T).
    pub al_critical_field: f64,
    /// Number of squares of the grAl inductor.
    pub gral_squares: f64,
}

impl CircuitParams {
    pub fn new(
        shunt_capacitance: f64,
        geometric_inductance: f64,
        gral_kinetic_inductance: f64,
        al_kinetic_inductance_zero_field: f64,
        al_critical_field: f64,
        gral_squares: f64,
    ) -> Result<Self> {
        let p = Self {
            shunt_capacitance,
            geometric_inductance,
            gral_kinetic_inductance,
            al_kinetic_inductance_zero_field,
            al_critical_field,
            gral_squares,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive(&[
            ("shunt_capacitance", self.shunt_capacitance),
            ("geometric_inductance", self.geometric_inductance),
            ("gral_kinetic_inductance", self.gral_kinetic_inductance),
            (
                "al_kinetic_inductance_zero_field",
                self.al_kinetic_inductance_zero_field,
            ),
            ("al_critical_field", self.al_critical_field),
            ("gral_squares", self.gral_squares),
        ])
    }

    /// Reference device: C_s = 137 fF, L_s = 450 pH, L_k,grAl = 2.7 nH,
    /// L_k,Al = 200 pH, B_c,Al = 150 mT, 2.5 squares.
    pub fn reference() -> Self {
        Self {
            shunt_capacitance: 137e-15,
            geometric_inductance: 450e-12,
            gral_kinetic_inductance: 2.7e-9,
            al_kinetic_inductance_zero_field: 200e-12,
            al_critical_field: 0.150,
            gral_squares: 2.5,
        }
    }

    /// Sum of the three inductances at zero field.
    pub fn total_inductance_zero_field(&self) -> f64 {
        self.geometric_inductance + self.gral_kinetic_inductance + self.al_kinetic_inductance_zero_field
    }
}

/// Dimensions of the unshunted grAl volume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrAlVolume {
    pub thickness: f64,
    pub width: f64,
    pub length: f64,
}

impl GrAlVolume {
    pub fn new(thickness: f64, width: f64, length: f64) -> Result<Self> {
        require_positive(&[("thickness", thickness), ("width", width), ("length", length)])?;
        if !(thickness <= width && width <= length) {
            return Err(Error::domain(
                "grAl volume must satisfy thickness <= width <= length",
            ));
        }
        Ok(Self {
            thickness,
            width,
            length,
        })
    }

    /// 10 x 200 x 500 nm³.
    pub fn reference() -> Self {
        Self {
            thickness: 10e-9,
            width: 200e-9,
            length: 500e-9,
        }
    }

    pub fn volume(&self) -> f64 {
        self.thickness * self.width * self.length
    }

    pub fn cross_section(&self) -> f64 {
        self.thickness * self.width
    }
}

/// Effective Josephson-junction description of a nonlinear inductor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JunctionModel {
    pub effective_junction_count: f64,
    /// I_c (A).
    pub critical_current: f64,
    /// Inductance participation of a single junction, in (0, 1).
    pub participation: f64,
}

impl JunctionModel {
    pub fn new(effective_junction_count: f64, critical_current: f64, participation: f64) -> Result<Self> {
        if !(effective_junction_count >= 1.0) {
            return Err(Error::domain("effective junction count must be >= 1"));
        }
        require_positive(&[("critical_current", critical_current)])?;
        if !(participation > 0.0 && participation < 1.0) {
            return Err(Error::domain("participation must lie in (0, 1)"));
        }
        Ok(Self {
            effective_junction_count,
            critical_current,
            participation,
        })
    }

    /// Josephson inductance Φ₀/(2π I_c) of one junction.
    pub fn junction_inductance(&self) -> f64 {
        FLUX_QUANTUM / (2.0 * PI * self.critical_current)
    }
}

/// BCS zero-temperature gap 1.764 k_B T_c.
pub fn bcs_gap(critical_temperature: f64) -> Result<f64> {
    require_positive(&[("critical_temperature", critical_temperature)])?;
    Ok(BCS_GAP_RATIO * BOLTZMANN * critical_temperature)
}

/// LC resonance 1/(2π√(LC)) in Hz.
pub fn resonant_frequency(capacitance: f64, total_inductance: f64) -> Result<f64> {
    require_positive(&[("capacitance", capacitance), ("total_inductance", total_inductance)])?;
    Ok(1.0 / (2.0 * PI * (capacitance * total_inductance).sqrt()))
}

/// Sheet kinetic inductance h R_□ / (2π² Δ) of a dirty-limit film (H/□).
pub fn mattis_bardeen_sheet_inductance(sheet_resistance: f64, gap: f64) -> Result<f64> {
    require_positive(&[("sheet_resistance", sheet_resistance), ("gap", gap)])?;
    Ok(PLANCK * sheet_resistance / (2.0 * PI * PI * gap))
}

/// Kinetic inductance ħ R_n / (π Δ) of a wire with normal resistance R_n.
pub fn wire_kinetic_inductance(normal_resistance: f64, gap: f64) -> Result<f64> {
    require_positive(&[("normal_resistance", normal_resistance), ("gap", gap)])?;
    Ok(HBAR * normal_resistance / (PI * gap))
}

fn field_ratio_squared(field: f64, critical_field: f64) -> Result<f64> {
    require_positive(&[("critical_field", critical_field)])?;
    if !(field.is_finite() && field >= 0.0) {
        return Err(Error::domain(format!("field must be >= 0, got {field}")));
    }
    if field >= critical_field {
        return Err(Error::domain(format!(
            "field {field} T is at or above the critical field {critical_field} T"
        )));
    }
    let r = field / critical_field;
    Ok(r * r)
}

/// Two-fluid in-plane gap suppression
/// Δ(B) = Δ₀₀ √((1 − (B/B_c)²) / (1 + (B/B_c)²)).
pub fn gap_vs_field(field: f64, critical_field: f64, gap_zero: f64) -> Result<f64> {
    require_positive(&[("gap_zero", gap_zero)])?;
    let r2 = field_ratio_squared(field, critical_field)?;
    Ok(gap_zero * ((1.0 - r2) / (1.0 + r2)).sqrt())
}

/// Al lead kinetic inductance at in-plane field `field`.
pub fn al_kinetic_inductance_vs_field(field: f64, params: &CircuitParams) -> Result<f64> {
    params.validate()?;
    let r2 = field_ratio_squared(field, params.al_critical_field)?;
    Ok(params.al_kinetic_inductance_zero_field * ((1.0 + r2) / (1.0 - r2)).sqrt())
}

/// Qubit frequency (Hz) of the lumped model at in-plane field `field`.
pub fn qubit_frequency_vs_field(field: f64, params: &CircuitParams) -> Result<f64> {
    let l_al = al_kinetic_inductance_vs_field(field, params)?;
    resonant_frequency(
        params.shunt_capacitance,
        l_al + params.gral_kinetic_inductance + params.geometric_inductance,
    )
}

/// Charging energy e²/(2C) expressed as an angular frequency E_c/ħ (rad/s).
pub fn charging_energy(capacitance: f64) -> Result<f64> {
    require_positive(&[("capacitance", capacitance)])?;
    Ok(ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (2.0 * capacitance * HBAR))
}

/// Effective array length N = √(E_c / α). Not rounded.
pub fn effective_junction_number(charging_energy: f64, anharmonicity: f64) -> Result<f64> {
    require_positive(&[("charging_energy", charging_energy), ("anharmonicity", anharmonicity)])?;
    Ok((charging_energy / anharmonicity).sqrt())
}

/// j_c = (Φ₀/2π) N / (L A) in A/m².
pub fn critical_current_density(junction_count: f64, gral_inductance: f64, cross_section: f64) -> Result<f64> {
    require_positive(&[
        ("junction_count", junction_count),
        ("gral_inductance", gral_inductance),
        ("cross_section", cross_section),
    ])?;
    Ok(FLUX_QUANTUM / (2.0 * PI) * junction_count / (gral_inductance * cross_section))
}

/// Self-Kerr estimate K = C π e a ω₁² / (j_c V) (rad/s).
///
/// `geometry_factor` is the current-distribution factor C, of order one.
pub fn self_kerr_estimate(
    grain_size: f64,
    mode_frequency: f64,
    current_density: f64,
    volume: f64,
    geometry_factor: f64,
) -> Result<f64> {
    require_positive(&[
        ("grain_size", grain_size),
        ("mode_frequency", mode_frequency),
        ("current_density", current_density),
        ("volume", volume),
        ("geometry_factor", geometry_factor),
    ])?;
    Ok(geometry_factor * PI * ELEMENTARY_CHARGE * grain_size * mode_frequency * mode_frequency
        / (current_density * volume))
}

/// Kerr contribution of a single junction, h ω₁² p² / (4 Φ₀ I_c) (rad/s).
pub fn junction_kerr(mode_frequency: f64, critical_current: f64, participation: f64) -> Result<f64> {
    require_positive(&[("mode_frequency", mode_frequency), ("critical_current", critical_current)])?;
    require_non_negative(&[("participation", participation)])?;
    if participation >= 1.0 {
        return Err(Error::domain("participation must be < 1"));
    }
    Ok(PLANCK * mode_frequency * mode_frequency / (4.0 * FLUX_QUANTUM * critical_current)
        * participation
        * participation)
}
