use serde::{Deserialize, Serialize};

use super::spectrum::SpectrumGrid;
use super::KerrModel;
use crate::error::{Error, Result};

/// Detection settings for [`extract_multiphoton_peaks_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakOptions {
    /// Minimum topographic prominence of a phase peak (rad).
    pub prominence: f64,
    /// Minimum distance (Hz) below the previous order for a new order.
    pub min_separation: f64,
}

impl Default for PeakOptions {
    fn default() -> Self {
        Self {
            prominence: 2e-3,
            min_separation: 0.5e6,
        }
    }
}

/// One transition |0⟩ → |n⟩ located in a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiphotonPeak {
    pub order: usize,
    /// f_n (Hz).
    pub frequency: f64,
    /// Power of the row the peak was taken from (W).
    pub power: f64,
    /// Phase prominence at that power (rad).
    pub prominence: f64,
}

/// Vertex of the parabola through three points; falls back to the middle
/// abscissa when the points are collinear.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> f64 {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let curvature = (d2 - d1) / (x[2] - x[0]);
    if curvature == 0.0 || !curvature.is_finite() {
        return x[1];
    }
    let v = 0.5 * (x[0] + x[1]) - d1 / (2.0 * curvature);
    v.clamp(x[0], x[2])
}

fn refine(freqs: &[f64], values: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= values.len() {
        return freqs[i];
    }
    parabola_vertex([freqs[i - 1], freqs[i], freqs[i + 1]], [values[i - 1], values[i], values[i + 1]])
}

/// Topographic prominence of the local maximum at `i`.
pub(crate) fn prominence(values: &[f64], i: usize) -> f64 {
    let peak = values[i];
    let mut left_min = peak;
    for &v in values[..i].iter().rev() {
        if v > peak {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = peak;
    for &v in &values[i + 1..] {
        if v > peak {
            break;
        }
        right_min = right_min.min(v);
    }
    peak - left_min.max(right_min)
}

pub(crate) fn local_maxima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1] && values[i].is_finite())
        .collect()
}

pub(crate) fn unwrap(phase: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phase.len());
    let mut offset = 0.0;
    for (i, &p) in phase.iter().enumerate() {
        if i > 0 {
            let d = p - phase[i - 1];
            if d > std::f64::consts::PI {
                offset -= std::f64::consts::TAU;
            } else if d < -std::f64::consts::PI {
                offset += std::f64::consts::TAU;
            }
        }
        out.push(p + offset);
    }
    out
}

/// The fundamental: the lowest power whose phase swing exceeds the threshold,
/// located at the |S₁₁| minimum of that row. The phase of the fundamental is
/// dispersive (and winds through 2π at weak drive), so it has no extremum at
/// f₁ itself.
fn fundamental(grid: &SpectrumGrid, opts: &PeakOptions) -> Option<MultiphotonPeak> {
    for p in 0..grid.powers.len() {
        let row = grid.row(p);
        if row.iter().any(|z| !z.re.is_finite()) {
            continue;
        }
        let phase = unwrap(&grid.phase_row(p));
        let swing = phase.iter().cloned().fold(f64::MIN, f64::max) - phase.iter().cloned().fold(f64::MAX, f64::min);
        if swing < opts.prominence {
            continue;
        }
        let neg_mag: Vec<f64> = row.iter().map(|z| -z.norm()).collect();
        let i = (0..neg_mag.len()).max_by(|&a, &b| neg_mag[a].total_cmp(&neg_mag[b]))?;
        return Some(MultiphotonPeak {
            order: 1,
            frequency: refine(&grid.frequencies, &neg_mag, i),
            power: grid.powers[p],
            prominence: swing,
        });
    }
    None
}

/// Highest-frequency prominent phase maximum strictly below `ceiling`, taken
/// at the lowest power where one exists.
fn next_order(grid: &SpectrumGrid, order: usize, ceiling: f64, opts: &PeakOptions) -> Option<MultiphotonPeak> {
    for p in 0..grid.powers.len() {
        let phase = grid.phase_row(p);
        let best = local_maxima(&phase)
            .into_iter()
            .filter(|&i| grid.frequencies[i] < ceiling)
            .map(|i| (i, prominence(&phase, i)))
            .filter(|&(_, prom)| prom >= opts.prominence)
            .max_by(|a, b| grid.frequencies[a.0].total_cmp(&grid.frequencies[b.0]));
        if let Some((i, prom)) = best {
            return Some(MultiphotonPeak {
                order,
                frequency: refine(&grid.frequencies, &phase, i),
                power: grid.powers[p],
                prominence: prom,
            });
        }
    }
    None
}

/// [`extract_multiphoton_peaks_with`] using [`PeakOptions::default`].
pub fn extract_multiphoton_peaks(grid: &SpectrumGrid, max_order: usize) -> Result<Vec<MultiphotonPeak>> {
    extract_multiphoton_peaks_with(grid, max_order, &PeakOptions::default())
}

/// Locates the transitions n = 1…`max_order` in arg(S₁₁).
///
/// Orders are assigned from the top of the ladder down: order n is the
/// prominent phase maximum closest below f_{n−1} − `min_separation`, taken at
/// the lowest power where it is visible (smallest drive-induced shift).
/// Positions are refined by parabolic interpolation over the three samples
/// around the discrete extremum.
pub fn extract_multiphoton_peaks_with(
    grid: &SpectrumGrid,
    max_order: usize,
    opts: &PeakOptions,
) -> Result<Vec<MultiphotonPeak>> {
    grid.validate()?;
    if max_order == 0 {
        return Err(Error::Precondition("max_order must be >= 1".into()));
    }
    if grid.frequencies.len() < 3 {
        return Err(Error::Precondition("need at least three frequencies".into()));
    }
    if !(opts.prominence > 0.0 && opts.min_separation >= 0.0) {
        return Err(Error::domain("peak options must be positive"));
    }
    let mut peaks: Vec<MultiphotonPeak> = Vec::with_capacity(max_order);
    let missing = |n: usize, peaks: &[MultiphotonPeak]| Error::MissingPeak {
        missing: n,
        found: peaks.iter().map(|p| p.order).collect(),
    };
    peaks.push(fundamental(grid, opts).ok_or_else(|| missing(1, &peaks))?);
    for n in 2..=max_order {
        let ceiling = peaks[n - 2].frequency - opts.min_separation;
        let peak = next_order(grid, n, ceiling, opts).ok_or_else(|| missing(n, &peaks))?;
        peaks.push(peak);
    }
    if peaks.windows(2).any(|w| w[1].frequency >= w[0].frequency) {
        return Err(Error::Numerical("extracted peaks are not ordered f₁ > f₂ > …".into()));
    }
    Ok(peaks)
}

/// ħK(n) = (E_n − E_{n−1}) − (E_{n+1} − E_n) with E_n/h = n f_n and E₀ = 0.
///
/// Input is (n, f_n) pairs in Hz, contiguous in n. Returns (n, K(n)) in rad/s
/// for every n that has both neighbours (n = 1 only needs f₂).
pub fn kerr_shift_series(peaks: &[(usize, f64)]) -> Result<Vec<(usize, f64)>> {
    if peaks.len() < 2 {
        return Err(Error::Precondition("need at least two peaks".into()));
    }
    if peaks[0].0 == 0 {
        return Err(Error::domain("peak orders start at 1"));
    }
    for w in peaks.windows(2) {
        if w[1].0 != w[0].0 + 1 {
            return Err(Error::Precondition(format!("gap in peak orders between {} and {}", w[0].0, w[1].0)));
        }
    }
    let energy = |n: usize, f: f64| n as f64 * f;
    let mut out = Vec::new();
    for i in 0..peaks.len() - 1 {
        let (n, f) = peaks[i];
        let below = if n == 1 {
            0.0
        } else if i > 0 {
            energy(n - 1, peaks[i - 1].1)
        } else {
            continue;
        };
        let here = energy(n, f);
        let above = energy(n + 1, peaks[i + 1].1);
        let k = std::f64::consts::TAU * ((here - below) - (above - here));
        out.push((n, k));
    }
    Ok(out)
}

/// f_n = f₁ − (n − 1)K/(4π) for the quartic Hamiltonian.
pub fn ladder_frequency(model: &KerrModel, n: usize) -> f64 {
    model.mode_frequency - (n as f64 - 1.0) * model.self_kerr / (2.0 * std::f64::consts::TAU)
}

/// Probe frequencies on windows of ±`half_window` (step `step`) around
/// f₁ … f_{max_order+1}, merged into one strictly increasing list.
pub fn ladder_windows(model: &KerrModel, max_order: usize, step: f64, half_window: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && half_window >= 0.0 && step.is_finite() && half_window.is_finite()) {
        return Err(Error::domain("window step must be > 0 and half width >= 0"));
    }
    if max_order == 0 {
        return Err(Error::Precondition("max_order must be >= 1".into()));
    }
    let k = (half_window / step).round() as i64;
    let mut f: Vec<f64> = (1..=max_order + 1)
        .flat_map(|n| {
            let c = ladder_frequency(model, n);
            (-k..=k).map(move |i| c + i as f64 * step)
        })
        .collect();
    f.sort_by(f64::total_cmp);
    f.dedup_by(|a, b| (*a - *b).abs() < 1e-3 * step);
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn ladder_windows_are_increasing() {
        let m = KerrModel::reference();
        let f = ladder_windows(&m, 3, 50e3, 200e3).unwrap();
        assert_eq!(f.len(), 4 * 9);
        assert!(f.windows(2).all(|w| w[1] > w[0]));
        assert!(f.iter().any(|&x| (x - ladder_frequency(&m, 4)).abs() < 1.0));
        let wide = ladder_windows(&m, 2, 1e6, 3e6).unwrap();
        assert!(wide.windows(2).all(|w| w[1] > w[0]));
        assert!(ladder_windows(&m, 3, 0.0, 1e3).is_err());
    }

    #[test]
    fn parabola_vertex_recovers_quadratic() {
        let f = |x: f64| -3.0 * (x - 1.37).powi(2) + 2.0;
        let x = [0.9, 1.2, 1.8];
        assert!((parabola_vertex(x, x.map(f)) - 1.37).abs() < 1e-12);
    }

    #[test]
    fn prominence_on_slope() {
        let v = [0.0, 1.0, 0.5, 3.0, 0.2, 0.1];
        assert_eq!(prominence(&v, 1), 0.5);
        assert!((prominence(&v, 3) - 2.9).abs() < 1e-12);
        assert_eq!(local_maxima(&v), vec![1, 3]);
    }

    #[test]
    fn unwrap_removes_jumps() {
        let raw = [3.0, -3.0, -2.5, 2.9];
        let u = unwrap(&raw);
        for w in u.windows(2) {
            assert!((w[1] - w[0]).abs() < std::f64::consts::PI);
        }
    }

    #[test]
    fn analytic_ladder_gives_constant_shift() {
        let k = std::f64::consts::TAU * 4.5e6;
        let peaks: Vec<(usize, f64)> = (1..=11).map(|n| (n, 7.4887e9 - (n as f64 - 1.0) * 2.25e6)).collect();
        let series = kerr_shift_series(&peaks).unwrap();
        assert_eq!(series.len(), 10);
        for (n, kn) in series {
            assert!((kn - k).abs() < 1e-3 * k.abs() * 1e-3, "n={n}: {kn}");
        }
    }

    #[test]
    fn quadratic_ladder_gives_linear_shift() {
        // E_n − E_{n−1} = f₁ − a(n−1) − b·n(n−1), so K(n) = 2π(a + 2bn).
        let (f1, a, b) = (7e9, 4e6, 0.1e6);
        let e = |n: f64| n * f1 - a * n * (n - 1.0) / 2.0 - b * n * (n - 1.0) * (n + 1.0) / 3.0;
        let peaks: Vec<(usize, f64)> = (1..=8).map(|n| (n, e(n as f64) / n as f64)).collect();
        let series = kerr_shift_series(&peaks).unwrap();
        for (n, kn) in series {
            let expected = std::f64::consts::TAU * (a + 2.0 * b * n as f64);
            assert!((kn - expected).abs() < 1e-3, "n={n}: {kn} vs {expected}");
        }
    }

    #[test]
    fn series_starting_above_one_skips_first() {
        let peaks = [(3, 7.4842e9), (4, 7.48195e9), (5, 7.4797e9)];
        let s = kerr_shift_series(&peaks).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].0, 4);
        assert!(kerr_shift_series(&[(1, 1.0), (3, 2.0)]).is_err());
    }

    #[test]
    fn ladder_frequency_reference() {
        let m = KerrModel::reference();
        assert!((ladder_frequency(&m, 3) - 7.4842e9).abs() < 1e-3);
        assert_eq!(ladder_frequency(&m, 1), m.mode_frequency);
    }

    /// Synthetic grid: a fundamental dip plus Lorentzian phase bumps at a
    /// chosen set of positions, each appearing from a given power index.
    fn synthetic(bumps: &[(f64, usize)]) -> SpectrumGrid {
        let freqs: Vec<f64> = (0..400).map(|i| 90e6 + i as f64 * 25e3).collect();
        let powers = vec![1e-18, 1e-17, 1e-16, 1e-15];
        let mut s11 = Vec::new();
        for p in 0..powers.len() {
            for &f in &freqs {
                let d = (f - 99e6) / 50e3;
                let fundamental = Complex64::new(1.0, 0.0) - Complex64::new(0.8, 0.0) / Complex64::new(1.0, d);
                let mut phase = 0.0;
                for &(fb, from) in bumps {
                    if p >= from {
                        let x = (f - fb) / 40e3;
                        phase += 0.01 / (1.0 + x * x);
                    }
                }
                s11.push(fundamental * Complex64::from_polar(1.0, phase));
            }
        }
        SpectrumGrid::new(freqs, powers, s11).unwrap()
    }

    #[test]
    fn extracts_synthetic_ladder_in_order() {
        let g = synthetic(&[(96.755e6, 1), (94.51e6, 2), (92.26e6, 3)]);
        let peaks = extract_multiphoton_peaks(&g, 4).unwrap();
        assert!((peaks[0].frequency - 99e6).abs() < 1e3);
        assert_eq!(peaks[0].power, 1e-18);
        for (peak, (f, p)) in peaks[1..].iter().zip([(96.755e6, 1), (94.51e6, 2), (92.26e6, 3)]) {
            assert!((peak.frequency - f).abs() < 5e3, "{peak:?}");
            assert_eq!(peak.power, g.powers[p]);
        }
    }

    #[test]
    fn missing_order_is_reported() {
        let g = synthetic(&[(96.755e6, 1)]);
        match extract_multiphoton_peaks(&g, 3) {
            Err(Error::MissingPeak { missing, found }) => {
                assert_eq!(missing, 3);
                assert_eq!(found, vec![1, 2]);
            }
            other => panic!("{other:?}"),
        }
    }
}
