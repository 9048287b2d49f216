use std::f64::consts::LN_10;

use serde::{Deserialize, Serialize};

use super::lm::{levenberg_marquardt, LmOptions};
use super::{FitResult, Parameter};
use crate::circuit::{qubit_frequency_vs_field, CircuitParams};
use crate::constants::HBAR;
use crate::error::{require_positive, Error, Result};
use crate::units::hz_to_angular;

/// A fitted Rabi rate at one drive power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RabiPoint {
    /// W, as read at the generator or on chip.
    pub power: f64,
    /// Ω_R (rad/s).
    pub rabi: f64,
}

/// Ideal slope dΩ_R²/dP = 4κ/(ħω₁) for on-chip power.
fn ideal_slope(external_rate: f64, qubit_frequency: f64) -> Result<f64> {
    require_positive(&[("external_rate", external_rate), ("qubit_frequency", qubit_frequency)])?;
    Ok(4.0 * external_rate / (HBAR * hz_to_angular(qubit_frequency)))
}

fn check_points(points: &[RabiPoint]) -> Result<()> {
    if points.len() < 3 {
        return Err(Error::Precondition(format!(
            "power-law fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(i) = points
        .iter()
        .position(|p| !(p.power.is_finite() && p.power >= 0.0 && p.rabi.is_finite()))
    {
        return Err(Error::domain(format!("invalid power or Rabi rate at point {i}")));
    }
    Ok(())
}

fn free(name: &str, unit: &str, value: f64) -> Parameter {
    Parameter {
        name: name.into(),
        unit: unit.into(),
        value,
        fixed: false,
    }
}

fn attenuation_db(ideal: f64, slope: f64) -> Result<f64> {
    if !(slope > 0.0) {
        return Err(Error::Numerical(format!("fitted slope {slope:.3e} is not positive")));
    }
    Ok(10.0 * (ideal / slope).log10())
}

/// Least-squares slope of Ω_R² against P through the origin.
///
/// The line attenuation in dB compares the slope with 4κ/(ħω₁); for on-chip
/// powers it is 0 dB. Parameters: `slope` (rad²/s²/W), `attenuation_db`.
pub fn fit_rabi_power_law(points: &[RabiPoint], external_rate: f64, qubit_frequency: f64) -> Result<FitResult> {
    check_points(points)?;
    let ideal = ideal_slope(external_rate, qubit_frequency)?;
    let spp: f64 = points.iter().map(|p| p.power * p.power).sum();
    if !(spp > 0.0) {
        return Err(Error::Precondition("all powers are zero".into()));
    }
    let slope = points.iter().map(|p| p.power * p.rabi * p.rabi).sum::<f64>() / spp;
    let att = attenuation_db(ideal, slope)?;
    let rss: f64 = points.iter().map(|p| (p.rabi * p.rabi - slope * p.power).powi(2)).sum();
    let var = rss / (points.len() - 1) as f64 / spp;
    let d = -10.0 / (LN_10 * slope);
    Ok(FitResult {
        parameters: vec![free("slope", "rad^2/s^2/W", slope), free("attenuation_db", "dB", att)],
        standard_errors: Some(
            [("slope".to_string(), var.sqrt()), ("attenuation_db".to_string(), var.sqrt() * d.abs())].into(),
        ),
        covariance: Some(vec![vec![var, var * d], vec![var * d, var * d * d]]),
        residual_norm: rss.sqrt(),
        converged: true,
        iterations: 0,
        warnings: Vec::new(),
    })
}

/// Straight-line fit Ω_R² = slope·P + intercept with the origin released.
/// Parameters: `slope`, `intercept` (rad²/s²), `attenuation_db`.
pub fn fit_rabi_power_law_with_intercept(
    points: &[RabiPoint],
    external_rate: f64,
    qubit_frequency: f64,
) -> Result<FitResult> {
    check_points(points)?;
    let ideal = ideal_slope(external_rate, qubit_frequency)?;
    let m = points.len() as f64;
    let mean_p = points.iter().map(|p| p.power).sum::<f64>() / m;
    let mean_y = points.iter().map(|p| p.rabi * p.rabi).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.power - mean_p).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Precondition("powers must not all be equal".into()));
    }
    let sxy: f64 = points.iter().map(|p| (p.power - mean_p) * (p.rabi * p.rabi - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_p;
    let att = attenuation_db(ideal, slope)?;
    let rss: f64 = points
        .iter()
        .map(|p| (p.rabi * p.rabi - slope * p.power - intercept).powi(2))
        .sum();
    let s2 = rss / (m - 2.0).max(1.0);
    let var_s = s2 / sxx;
    let var_i = s2 * (1.0 / m + mean_p * mean_p / sxx);
    let cov_si = -s2 * mean_p / sxx;
    let d = -10.0 / (LN_10 * slope);
    Ok(FitResult {
        parameters: vec![
            free("slope", "rad^2/s^2/W", slope),
            free("intercept", "rad^2/s^2", intercept),
            free("attenuation_db", "dB", att),
        ],
        standard_errors: Some(
            [
                ("slope".to_string(), var_s.sqrt()),
                ("intercept".to_string(), var_i.sqrt()),
                ("attenuation_db".to_string(), var_s.sqrt() * d.abs()),
            ]
            .into(),
        ),
        covariance: Some(vec![
            vec![var_s, cov_si, var_s * d],
            vec![cov_si, var_i, cov_si * d],
            vec![var_s * d, cov_si * d, var_s * d * d],
        ]),
        residual_norm: rss.sqrt(),
        converged: true,
        iterations: 0,
        warnings: Vec::new(),
    })
}

const FIELD_PARAMETERS: [(&str, &str); 2] = [("al_critical_field", "T"), ("al_kinetic_inductance_zero_field", "H")];

/// Fits B_c,Al and L_k,Al(0) to measured (B, f₁) pairs, all other circuit
/// parameters fixed at the values in `circuit`, which also supplies the
/// starting point.
pub fn fit_field_dependence(points: &[(f64, f64)], circuit: &CircuitParams) -> Result<FitResult> {
    circuit.validate()?;
    if points.len() < 5 {
        return Err(Error::Precondition(format!(
            "field fit needs at least 5 points, got {}",
            points.len()
        )));
    }
    for (i, &(b, f)) in points.iter().enumerate() {
        if !(b.is_finite() && b >= 0.0 && b < circuit.al_critical_field) {
            return Err(Error::domain(format!(
                "field {b} T at point {i} is outside [0, {}) T",
                circuit.al_critical_field
            )));
        }
        if !(f.is_finite() && f > 0.0) {
            return Err(Error::domain(format!("frequency at point {i} must be > 0")));
        }
    }
    let mut warnings = Vec::new();
    let (bmin, bmax) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(b, _)| (lo.min(b), hi.max(b)));
    if bmax - bmin < 0.3 * circuit.al_critical_field {
        warnings.push(format!(
            "field span {:.1} mT is below 30% of the critical field; B_c is weakly constrained",
            (bmax - bmin) * 1e3
        ));
    }

    let residuals = |x: &[f64]| -> Result<Vec<f64>> {
        let c = CircuitParams {
            al_critical_field: x[0],
            al_kinetic_inductance_zero_field: x[1],
            ..*circuit
        };
        points
            .iter()
            .map(|&(b, f)| Ok(qubit_frequency_vs_field(b, &c)? - f))
            .collect()
    };
    let x0 = [circuit.al_critical_field, circuit.al_kinetic_inductance_zero_field];
    let fmax = points.iter().fold(0.0f64, |a, p| a.max(p.1));
    let options = LmOptions {
        residual_floor: 1e-13 * fmax * (points.len() as f64).sqrt(),
        ..Default::default()
    };
    let out = levenberg_marquardt(residuals, &x0, &[0.05 * x0[0], 0.05 * x0[1]], &options)?;
    let order: Vec<&str> = FIELD_PARAMETERS.iter().map(|p| p.0).collect();
    let mut result = FitResult::from_outcome(&out, &FIELD_PARAMETERS, &out.x, &[], &order);
    warnings.append(&mut result.warnings);
    result.warnings = warnings;
    Ok(result)
}
