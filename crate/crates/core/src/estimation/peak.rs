use super::lm::{levenberg_marquardt, LmOptions};
use super::{ComplexTrace, FitResult, MIN_FIT_SAMPLES};
use crate::error::{Error, Result};
use crate::kerr::peaks::{local_maxima, prominence, unwrap};

const PEAK_PARAMETERS: [(&str, &str); 4] = [("center", "Hz"), ("linewidth", "Hz"), ("amplitude", "rad"), ("offset", "rad")];

/// A secondary peak at least this fraction of the dominant prominence makes
/// the window ambiguous.
const AMBIGUITY_RATIO: f64 = 0.5;
/// Secondary peaks above this fraction are excluded from the fit region.
const EXCLUSION_RATIO: f64 = 0.1;

fn lorentzian(f: f64, p: &[f64]) -> f64 {
    let x = 2.0 * (f - p[0]) / p[1];
    p[3] + p[2] / (1.0 + x * x)
}

/// Fits offset + amplitude/(1 + (2(f − center)/linewidth)²) to the unwrapped
/// arg(S₁₁) inside `window` (Hz). `linewidth` is the full width at half
/// maximum.
///
/// The extremum may be a maximum or a minimum. A window holding two peaks of
/// comparable size is an error; weaker neighbours are cut out of the fitted
/// region and reported as a warning.
pub fn fit_lorentzian_peak(trace: &ComplexTrace, window: (f64, f64)) -> Result<FitResult> {
    trace.validate()?;
    let (lo, hi) = window;
    let (first, last) = match (trace.frequencies.first(), trace.frequencies.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::Precondition("empty trace".into())),
    };
    if !(lo < hi && lo >= first && hi <= last) {
        return Err(Error::Precondition(format!(
            "window [{lo}, {hi}] Hz is not inside the trace span [{first}, {last}] Hz"
        )));
    }
    let idx: Vec<usize> = (0..trace.len())
        .filter(|&i| (lo..=hi).contains(&trace.frequencies[i]))
        .collect();
    if idx.len() < MIN_FIT_SAMPLES {
        return Err(Error::Precondition(format!(
            "window holds {} samples, at least {MIN_FIT_SAMPLES} are needed",
            idx.len()
        )));
    }
    let f: Vec<f64> = idx.iter().map(|&i| trace.frequencies[i]).collect();
    let phase = unwrap(&idx.iter().map(|&i| trace.s11[i].arg()).collect::<Vec<_>>());

    let mut sorted = phase.clone();
    sorted.sort_by(f64::total_cmp);
    let baseline = sorted[sorted.len() / 2];
    let up = sorted[sorted.len() - 1] - baseline;
    let down = baseline - sorted[0];
    let sign = if up >= down { 1.0 } else { -1.0 };
    let y: Vec<f64> = phase.iter().map(|p| sign * (p - baseline)).collect();

    let mut peaks: Vec<(usize, f64)> = local_maxima(&y).into_iter().map(|i| (i, prominence(&y, i))).collect();
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    let Some(&(i0, best)) = peaks.first() else {
        return Err(Error::Precondition("no extremum inside the window".into()));
    };
    if !(best > 0.0) {
        return Err(Error::Precondition("no extremum inside the window".into()));
    }
    let rivals: Vec<usize> = peaks[1..]
        .iter()
        .filter(|p| p.1 >= AMBIGUITY_RATIO * best)
        .map(|p| p.0)
        .collect();
    if !rivals.is_empty() {
        return Err(Error::Precondition(format!(
            "ambiguous window: {} peaks of comparable size near {:.6e} Hz",
            rivals.len() + 1,
            f[i0]
        )));
    }

    // Fit region: between the valleys separating the dominant peak from any
    // sizeable neighbour.
    let mut warnings = Vec::new();
    let (mut a, mut b) = (0, y.len() - 1);
    for &(j, prom) in &peaks[1..] {
        if prom < EXCLUSION_RATIO * best {
            continue;
        }
        let valley = |r: std::ops::RangeInclusive<usize>| r.min_by(|&p, &q| y[p].total_cmp(&y[q])).unwrap_or(i0);
        if j < i0 {
            a = a.max(valley(j..=i0));
        } else {
            b = b.min(valley(i0..=j));
        }
        warnings.push(format!("secondary peak near {:.6e} Hz excluded from the fit", f[j]));
    }
    if b + 1 - a < MIN_FIT_SAMPLES {
        return Err(Error::Precondition("dominant peak is too close to a neighbour to fit".into()));
    }
    let (f, y) = (&f[a..=b], &y[a..=b]);
    let i0 = i0 - a;

    let half = 0.5 * y[i0];
    let left = (0..i0).rev().find(|&k| y[k] < half).map(|k| f[k]).unwrap_or(f[0]);
    let right = (i0 + 1..y.len()).find(|&k| y[k] < half).map(|k| f[k]).unwrap_or(f[y.len() - 1]);
    let step = f.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let width = (right - left).max(2.0 * step);

    let residuals = |p: &[f64]| -> Result<Vec<f64>> {
        if p[1] == 0.0 {
            return Err(Error::domain("zero linewidth"));
        }
        Ok(f.iter().zip(y).map(|(&f, &y)| lorentzian(f, p) - y).collect())
    };
    let x0 = [f[i0], width, y[i0], 0.0];
    let scales = [width, width, y[i0], y[i0]];
    let ymax = y[i0].abs();
    let options = LmOptions {
        residual_floor: 1e-13 * ymax.max(1.0) * (y.len() as f64).sqrt(),
        ..Default::default()
    };
    let out = levenberg_marquardt(residuals, &x0, &scales, &options)?;
    let mut p = out.x.clone();
    p[1] = p[1].abs();
    p[2] *= sign;
    p[3] = sign * p[3] + baseline;
    if p[0] < f[0] || p[0] > f[f.len() - 1] {
        warnings.push("fitted center lies outside the fitted region".into());
    }
    let order: Vec<&str> = PEAK_PARAMETERS.iter().map(|q| q.0).collect();
    let mut result = FitResult::from_outcome(&out, &PEAK_PARAMETERS, &p, &[], &order);
    warnings.append(&mut result.warnings);
    result.warnings = warnings;
    Ok(result)
}
