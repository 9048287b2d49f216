use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;

use super::lm::{levenberg_marquardt, LmOptions, LmOutcome};
use super::{ComplexTrace, FitResult};
use crate::error::{Error, Result};

/// Names and units of the fluorescence model parameters, in report order.
pub const FLUORESCENCE_PARAMETERS: [(&str, &str); 4] =
    [("f1", "Hz"), ("kappa", "rad/s"), ("gamma", "rad/s"), ("rabi", "rad/s")];

/// Two-level reflection coefficient without pure dephasing, written so that
/// it stays defined for any sign of the parameters. Ω enters squared.
pub fn fluorescence_model(frequency: f64, f1: f64, kappa: f64, gamma: f64, rabi: f64) -> Complex64 {
    let g = kappa + gamma;
    let x = 2.0 * TAU * (f1 - frequency) / g;
    let s = 2.0 * (rabi / g).powi(2);
    Complex64::new(1.0, 0.0) - Complex64::new(1.0, x) * (2.0 * kappa / g / (1.0 + x * x + s))
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Frequency where `y` crosses `level` walking from `i` in direction `dir`;
/// `None` if the trace ends first.
fn crossing(freqs: &[f64], y: &[f64], i: usize, level: f64, dir: isize) -> Option<f64> {
    let mut k = i as isize;
    loop {
        let next = k + dir;
        if next < 0 || next as usize >= y.len() {
            return None;
        }
        let (a, b) = (k as usize, next as usize);
        if y[b] < level {
            let t = (y[a] - level) / (y[a] - y[b]);
            return Some(freqs[a] + t * (freqs[b] - freqs[a]));
        }
        k = next;
    }
}

/// Deterministic starting point (f₁, κ, γ, Ω_R) and any warnings.
///
/// f₁ is the maximum of Re(1 − S₁₁), which stays at resonance for every
/// coupling ratio and drive strength; Γ₀₁ is the full width at half maximum
/// of that peak and κ follows from its height 2κ/Γ₀₁.
/// Returns `Ok(None)` for a trace without a resolvable resonance.
pub fn initial_fluorescence_guess(trace: &ComplexTrace) -> Result<Option<([f64; 4], Vec<String>)>> {
    trace.require_fittable()?;
    let f = &trace.frequencies;
    let y: Vec<f64> = trace.s11.iter().map(|z| 1.0 - z.re).collect();
    let noise = median(trace.s11.windows(2).map(|w| (w[1] - w[0]).norm()).collect()) / 2f64.sqrt();
    let (i, &peak) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty trace");
    let floor = median(y.clone());
    if peak - floor <= (5.0 * noise).max(1e-9) {
        return Ok(None);
    }
    let mut warnings = Vec::new();
    let level = floor + 0.5 * (peak - floor);
    let lo = crossing(f, &y, i, level, -1);
    let hi = crossing(f, &y, i, level, 1);
    let fwhm = match (lo, hi) {
        (Some(a), Some(b)) => b - a,
        (Some(a), None) => 2.0 * (f[i] - a),
        (None, Some(b)) => 2.0 * (b - f[i]),
        (None, None) => trace.span(),
    };
    let fwhm = fwhm.max(f.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min));
    if trace.span() < 5.0 * fwhm {
        warnings.push(format!(
            "trace spans {:.1} linewidths, fewer than 5",
            trace.span() / fwhm
        ));
    }
    let g = TAU * fwhm;
    let kappa = (0.5 * peak * g).clamp(0.01 * g, 0.99 * g);
    Ok(Some(([f[i], kappa, g - kappa, 0.1 * g], warnings)))
}

fn split_fixed(fixed: &BTreeMap<String, f64>) -> Result<[Option<f64>; 4]> {
    let mut out = [None; 4];
    for (name, &value) in fixed {
        let k = FLUORESCENCE_PARAMETERS
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| {
                Error::Precondition(format!(
                    "unknown parameter '{name}', expected one of f1, kappa, gamma, rabi"
                ))
            })?;
        if !value.is_finite() {
            return Err(Error::domain(format!("fixed value of {name} must be finite")));
        }
        out[k] = Some(value);
    }
    Ok(out)
}

/// Fits the two-level reflection model to `trace`, minimising
/// Σ|S_model − S_i|² over the parameters not listed in `fixed`.
///
/// Parameter names are `f1` (Hz), `kappa`, `gamma` and `rabi` (rad/s). The
/// reported Rabi rate is |Ω_R|. A trace without a resolvable resonance gives
/// an unconverged result carrying a warning instead of an error.
pub fn fit_fluorescence_trace(trace: &ComplexTrace, fixed: &BTreeMap<String, f64>) -> Result<FitResult> {
    fit_fluorescence_trace_weighted(trace, fixed, None)
}

/// As [`fit_fluorescence_trace`] with a non-negative weight per sample
/// multiplying both quadrature residuals.
pub fn fit_fluorescence_trace_weighted(
    trace: &ComplexTrace,
    fixed: &BTreeMap<String, f64>,
    weights: Option<&[f64]>,
) -> Result<FitResult> {
    trace.require_fittable()?;
    let fixed = split_fixed(fixed)?;
    let m = trace.len();
    let weights: Vec<f64> = match weights {
        Some(w) if w.len() != m => {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: w.len(),
            })
        }
        Some(w) if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) => {
            return Err(Error::domain("weights must be finite and >= 0"))
        }
        Some(w) => w.to_vec(),
        None => vec![1.0; m],
    };

    let (mut start, mut warnings) = match initial_fluorescence_guess(trace)? {
        Some(g) => g,
        None => {
            let mut r = flat_result(trace, &fixed);
            r.warnings.push("degenerate trace: no resonance above the noise".into());
            return Ok(r);
        }
    };
    for k in 0..4 {
        if let Some(v) = fixed[k] {
            start[k] = v;
        }
    }
    let g0 = (start[1] + start[2]).abs().max(f64::MIN_POSITIVE);
    let scales = [g0 / TAU, g0, g0, g0];
    let free: Vec<usize> = (0..4).filter(|&k| fixed[k].is_none()).collect();

    let full = |x: &[f64]| -> [f64; 4] {
        let mut p = start;
        for (j, &k) in free.iter().enumerate() {
            p[k] = x[j];
        }
        p
    };
    let residuals = |x: &[f64]| -> Result<Vec<f64>> {
        let p = full(x);
        let mut r = Vec::with_capacity(2 * m);
        for ((&f, s), &w) in trace.frequencies.iter().zip(&trace.s11).zip(&weights) {
            let d = (fluorescence_model(f, p[0], p[1], p[2], p[3]) - s) * w;
            r.push(d.re);
            r.push(d.im);
        }
        Ok(r)
    };

    let x0: Vec<f64> = free.iter().map(|&k| start[k]).collect();
    let sc: Vec<f64> = free.iter().map(|&k| scales[k]).collect();
    let wmax = weights.iter().fold(0.0f64, |a, &b| a.max(b));
    let options = LmOptions {
        residual_floor: 1e-13 * wmax * ((2 * m) as f64).sqrt(),
        ..Default::default()
    };
    let out = if free.is_empty() {
        LmOutcome {
            x: Vec::new(),
            residuals: residuals(&[])?,
            jacobian: nalgebra::DMatrix::zeros(2 * m, 0),
            converged: true,
            iterations: 0,
        }
    } else {
        levenberg_marquardt(residuals, &x0, &sc, &options)?
    };

    let mut p = full(&out.x);
    p[3] = p[3].abs();
    if p[1] <= 0.0 || p[2] < 0.0 {
        warnings.push("fitted decay rates are unphysical (kappa <= 0 or gamma < 0)".into());
    }
    let free_names: Vec<(&str, &str)> = free.iter().map(|&k| FLUORESCENCE_PARAMETERS[k]).collect();
    let values: Vec<f64> = free.iter().map(|&k| p[k]).collect();
    let fixed_list: Vec<(&str, &str, f64)> = (0..4)
        .filter_map(|k| fixed[k].map(|v| (FLUORESCENCE_PARAMETERS[k].0, FLUORESCENCE_PARAMETERS[k].1, v)))
        .collect();
    let order: Vec<&str> = FLUORESCENCE_PARAMETERS.iter().map(|p| p.0).collect();
    let mut result = FitResult::from_outcome(&out, &free_names, &values, &fixed_list, &order);
    warnings.append(&mut result.warnings);
    result.warnings = warnings;
    Ok(result)
}

fn flat_result(trace: &ComplexTrace, fixed: &[Option<f64>; 4]) -> FitResult {
    let residual_norm = trace.s11.iter().map(|s| (s - 1.0).norm_sqr()).sum::<f64>().sqrt();
    FitResult {
        parameters: FLUORESCENCE_PARAMETERS
            .iter()
            .zip(fixed)
            .map(|(&(name, unit), v)| super::Parameter {
                name: name.into(),
                unit: unit.into(),
                value: v.unwrap_or(f64::NAN),
                fixed: v.is_some(),
            })
            .collect(),
        standard_errors: None,
        covariance: None,
        residual_norm,
        converged: false,
        iterations: 0,
        warnings: Vec::new(),
    }
}

/// Two-stage protocol: the low-power trace fixes (f₁, κ, γ), then only Ω_R
/// is fitted for every trace in `traces`.
pub fn fit_power_series(low_power: &ComplexTrace, traces: &[ComplexTrace]) -> Result<(FitResult, Vec<FitResult>)> {
    let stage1 = fit_fluorescence_trace(low_power, &BTreeMap::new())?;
    if !stage1.converged {
        return Err(Error::Numerical(format!(
            "low-power fit failed: {}",
            stage1.warnings.join("; ")
        )));
    }
    let fixed: BTreeMap<String, f64> = ["f1", "kappa", "gamma"]
        .iter()
        .map(|&n| (n.to_string(), stage1.value(n).expect("fitted parameter")))
        .collect();
    let stage2 = traces
        .iter()
        .map(|t| fit_fluorescence_trace(t, &fixed))
        .collect::<Result<Vec<_>>>()?;
    Ok((stage1, stage2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluorescence::{reflection_two_level, TwoLevelParams};
    use crate::units::hz_to_angular;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    const F1: f64 = 7.4887e9;

    fn reference() -> [f64; 4] {
        [F1, hz_to_angular(40e3), hz_to_angular(10e3), hz_to_angular(20e3)]
    }

    fn synth(p: [f64; 4], sigma: f64, seed: u64, points: usize, half_span: f64) -> ComplexTrace {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, sigma.max(f64::MIN_POSITIVE)).unwrap();
        let f: Vec<f64> = (0..points)
            .map(|i| p[0] - half_span + 2.0 * half_span * i as f64 / (points - 1) as f64)
            .collect();
        let s = f
            .iter()
            .map(|&f| {
                let z = fluorescence_model(f, p[0], p[1], p[2], p[3]);
                if sigma > 0.0 {
                    z + Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng))
                } else {
                    z
                }
            })
            .collect();
        ComplexTrace::new(f, s, 1e-18).unwrap()
    }

    #[test]
    fn model_matches_two_level_closed_form() {
        let p = TwoLevelParams::reference();
        for df in [-1e5, -2e4, 0.0, 3e4] {
            let f = F1 + df;
            let a = fluorescence_model(f, F1, p.external_rate, p.internal_rate, 7e4);
            let b = reflection_two_level(p.detuning(f), 7e4, &p).unwrap();
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn noiseless_recovery_is_exact() {
        let p = reference();
        let t = synth(p, 0.0, 0, 201, 300e3);
        let r = fit_fluorescence_trace(&t, &BTreeMap::new()).unwrap();
        assert!(r.converged, "{r:?}");
        assert!((r.value("f1").unwrap() - p[0]).abs() < 1e-10 * p[1]);
        for (k, name) in ["kappa", "gamma", "rabi"].iter().enumerate() {
            let v = r.value(name).unwrap();
            assert!((v / p[k + 1] - 1.0).abs() < 1e-10, "{name}: {v}");
        }
    }

    #[test]
    fn noisy_recovery_within_one_percent() {
        let p = reference();
        let t = synth(p, 0.005, 42, 801, 400e3);
        let r = fit_fluorescence_trace(&t, &BTreeMap::new()).unwrap();
        assert!(r.converged);
        assert!((r.value("f1").unwrap() - p[0]).abs() < 100.0);
        for (k, name) in ["kappa", "gamma", "rabi"].iter().enumerate() {
            let v = r.value(name).unwrap();
            assert!((v / p[k + 1] - 1.0).abs() < 0.01, "{name}: {v} vs {}", p[k + 1]);
            assert!(r.standard_error(name).unwrap() > 0.0);
        }
    }

    #[test]
    fn fixed_parameters_are_respected() {
        let p = reference();
        let t = synth(p, 0.0, 0, 101, 300e3);
        let fixed: BTreeMap<String, f64> = [("f1".to_string(), p[0]), ("kappa".into(), p[1]), ("gamma".into(), p[2])].into();
        let r = fit_fluorescence_trace(&t, &fixed).unwrap();
        assert_eq!(r.free_names(), vec!["rabi"]);
        assert!((r.value("rabi").unwrap() / p[3] - 1.0).abs() < 1e-10);
        assert_eq!(r.covariance.as_ref().unwrap().len(), 1);
        let bad: BTreeMap<String, f64> = [("omega".to_string(), 1.0)].into();
        assert!(fit_fluorescence_trace(&t, &bad).is_err());
    }

    #[test]
    fn flat_trace_is_flagged() {
        let f: Vec<f64> = (0..50).map(|i| F1 + i as f64 * 1e3).collect();
        let t = ComplexTrace::new(f, vec![Complex64::new(1.0, 0.0); 50], 0.0).unwrap();
        let r = fit_fluorescence_trace(&t, &BTreeMap::new()).unwrap();
        assert!(!r.converged);
        assert!(r.standard_errors.is_none());
        assert!(r.warnings.iter().any(|w| w.contains("degenerate")));
    }

    #[test]
    fn narrow_trace_warns() {
        let t = synth(reference(), 0.0, 0, 41, 40e3);
        let r = fit_fluorescence_trace(&t, &BTreeMap::new()).unwrap();
        assert!(r.warnings.iter().any(|w| w.contains("linewidths")));
    }

    #[test]
    fn uniform_weights_do_not_move_the_argmin() {
        let t = synth(reference(), 0.005, 3, 301, 300e3);
        let a = fit_fluorescence_trace(&t, &BTreeMap::new()).unwrap();
        let w = vec![7.5; t.len()];
        let b = fit_fluorescence_trace_weighted(&t, &BTreeMap::new(), Some(&w)).unwrap();
        for name in ["kappa", "gamma", "rabi"] {
            let (x, y) = (a.value(name).unwrap(), b.value(name).unwrap());
            assert!((x / y - 1.0).abs() < 1e-7, "{name}");
        }
        assert!((a.value("f1").unwrap() - b.value("f1").unwrap()).abs() < 1e-3);
    }

    #[test]
    fn two_stage_protocol() {
        let low = synth([F1, hz_to_angular(40e3), hz_to_angular(10e3), hz_to_angular(1e3)], 0.0, 0, 201, 300e3);
        let highs: Vec<ComplexTrace> = [10e3, 30e3, 60e3]
            .iter()
            .map(|&r| synth([F1, hz_to_angular(40e3), hz_to_angular(10e3), hz_to_angular(r)], 0.0, 0, 201, 300e3))
            .collect();
        let (s1, s2) = fit_power_series(&low, &highs).unwrap();
        assert!(s1.converged);
        for (r, want) in s2.iter().zip([10e3, 30e3, 60e3]) {
            assert_eq!(r.free_names(), vec!["rabi"]);
            assert!((r.value("rabi").unwrap() / hz_to_angular(want) - 1.0).abs() < 1e-6);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn self_consistency(
            kappa_khz in 10.0..100.0f64,
            gamma_ratio in 0.05..1.5f64,
            rabi_ratio in 0.05..1.0f64,
            offset in -20e3..20e3f64,
        ) {
            let kappa = hz_to_angular(kappa_khz * 1e3);
            let gamma = gamma_ratio * kappa;
            let g = kappa + gamma;
            let p = [F1 + offset, kappa, gamma, rabi_ratio * g];
            let t = synth(p, 0.0, 0, 241, 8.0 * g / TAU);
            let r = fit_fluorescence_trace(&t, &BTreeMap::new()).unwrap();
            prop_assert!(r.converged);
            prop_assert!((r.value("f1").unwrap() - p[0]).abs() < 1e-8 * g);
            for (k, name) in ["kappa", "gamma", "rabi"].iter().enumerate() {
                prop_assert!((r.value(name).unwrap() / p[k + 1] - 1.0).abs() < 1e-8);
            }
        }
    }
}
