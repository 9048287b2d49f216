//! Least-squares recovery of physical parameters from reflection traces and
//! field sweeps.

mod calibration;
pub mod lm;
mod peak;
mod trace;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use calibration::{fit_field_dependence, fit_rabi_power_law, fit_rabi_power_law_with_intercept, RabiPoint};
pub use lm::{levenberg_marquardt, LmOptions, LmOutcome};
pub use peak::fit_lorentzian_peak;
pub use trace::{fit_fluorescence_trace, fit_fluorescence_trace_weighted, fit_power_series, fluorescence_model, initial_fluorescence_guess, FLUORESCENCE_PARAMETERS};

/// Smallest number of samples accepted by any fit.
pub const MIN_FIT_SAMPLES: usize = 8;

/// A measured or simulated reflection trace at one drive power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexTrace {
    /// Hz, strictly increasing.
    pub frequencies: Vec<f64>,
    pub s11: Vec<Complex64>,
    /// W.
    pub on_chip_power: f64,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl ComplexTrace {
    pub fn new(frequencies: Vec<f64>, s11: Vec<Complex64>, on_chip_power: f64) -> Result<Self> {
        let t = Self {
            frequencies,
            s11,
            on_chip_power,
            metadata: BTreeMap::new(),
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.frequencies.len() != self.s11.len() {
            return Err(Error::DimensionMismatch {
                expected: self.frequencies.len(),
                actual: self.s11.len(),
            });
        }
        if let Some(i) = self.frequencies.iter().position(|f| !f.is_finite()) {
            return Err(Error::domain(format!("frequency at index {i} is not finite")));
        }
        if let Some(i) = self.s11.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::domain(format!("S11 at index {i} is not finite")));
        }
        if let Some(i) = self.frequencies.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::domain(format!(
                "frequencies must be strictly increasing (index {})",
                i + 1
            )));
        }
        if !(self.on_chip_power.is_finite() && self.on_chip_power >= 0.0) {
            return Err(Error::domain("on-chip power must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Validates and checks there are enough samples to fit.
    pub(crate) fn require_fittable(&self) -> Result<()> {
        self.validate()?;
        if self.len() < MIN_FIT_SAMPLES {
            return Err(Error::Precondition(format!(
                "trace has {} samples, at least {MIN_FIT_SAMPLES} are needed",
                self.len()
            )));
        }
        Ok(())
    }

    pub fn span(&self) -> f64 {
        match (self.frequencies.first(), self.frequencies.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }
}

/// JSON has no NaN; serde_json writes it as `null`, read back here as NaN.
fn nan_as_null<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// A named fitted or fixed quantity. `value` is NaN when the fit could not
/// start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub unit: String,
    #[serde(deserialize_with = "nan_as_null")]
    pub value: f64,
    pub fixed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub parameters: Vec<Parameter>,
    /// One-sigma errors of the free parameters, present only for a converged
    /// fit with a regular covariance.
    pub standard_errors: Option<BTreeMap<String, f64>>,
    /// Covariance of the free parameters in the order of `free_names()`.
    pub covariance: Option<Vec<Vec<f64>>>,
    #[serde(deserialize_with = "nan_as_null")]
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.parameters.iter().find(|p| p.name == name).map(|p| p.value)
    }

    pub fn standard_error(&self, name: &str) -> Option<f64> {
        self.standard_errors.as_ref()?.get(name).copied()
    }

    pub fn free_names(&self) -> Vec<&str> {
        self.parameters.iter().filter(|p| !p.fixed).map(|p| p.name.as_str()).collect()
    }

    /// Assembles a result from a solver outcome. `free` lists the
    /// (name, unit) of the solver variables in order, `fixed` the rest.
    pub(crate) fn from_outcome(
        out: &LmOutcome,
        free: &[(&str, &str)],
        values: &[f64],
        fixed: &[(&str, &str, f64)],
        order: &[&str],
    ) -> Self {
        let mut parameters: Vec<Parameter> = free
            .iter()
            .zip(values)
            .map(|(&(name, unit), &value)| Parameter {
                name: name.into(),
                unit: unit.into(),
                value,
                fixed: false,
            })
            .chain(fixed.iter().map(|&(name, unit, value)| Parameter {
                name: name.into(),
                unit: unit.into(),
                value,
                fixed: true,
            }))
            .collect();
        parameters.sort_by_key(|p| order.iter().position(|o| *o == p.name).unwrap_or(usize::MAX));

        let mut warnings = Vec::new();
        let covariance = if free.is_empty() { None } else { out.covariance() };
        if out.converged && covariance.is_none() && !free.is_empty() {
            warnings.push("covariance is singular; parameters are not identifiable".into());
        }
        let (standard_errors, covariance) = match covariance {
            Some(c) if out.converged => (Some(standard_errors(free, &c)), Some(to_rows(&c))),
            Some(c) => (None, Some(to_rows(&c))),
            None => (None, None),
        };
        if !out.converged {
            warnings.push(format!("did not converge after {} iterations", out.iterations));
        }
        Self {
            parameters,
            standard_errors,
            covariance,
            residual_norm: out.residual_norm(),
            converged: out.converged,
            iterations: out.iterations,
            warnings,
        }
    }
}

fn standard_errors(free: &[(&str, &str)], cov: &DMatrix<f64>) -> BTreeMap<String, f64> {
    free.iter()
        .enumerate()
        .map(|(i, (name, _))| (name.to_string(), cov[(i, i)].max(0.0).sqrt()))
        .collect()
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_validation() {
        let f: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let s = vec![Complex64::new(1.0, 0.0); 10];
        assert!(ComplexTrace::new(f.clone(), s.clone(), 1e-18).is_ok());
        assert!(ComplexTrace::new(f.clone(), s[..9].to_vec(), 1e-18).is_err());
        let mut bad = s.clone();
        bad[4] = Complex64::new(f64::NAN, 0.0);
        let err = ComplexTrace::new(f.clone(), bad, 1e-18).unwrap_err();
        assert!(err.to_string().contains("index 4"));
        let mut rev = f.clone();
        rev.swap(2, 3);
        assert!(ComplexTrace::new(rev, s.clone(), 1e-18).is_err());
        let short = ComplexTrace::new(f[..7].to_vec(), s[..7].to_vec(), 0.0).unwrap();
        assert!(matches!(short.require_fittable(), Err(Error::Precondition(_))));
    }
}
