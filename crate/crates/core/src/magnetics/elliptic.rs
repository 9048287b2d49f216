//! Complete elliptic integrals of the first and second kind, parameterised by
//! the modulus k (not m = k²).

use std::f64::consts::FRAC_PI_2;

const AGM_TOL: f64 = 1e-15;
/// Number of terms kept in the power-series kernel.
pub const SERIES_TERMS: usize = 20;

/// K(k) and E(k) by the arithmetic-geometric mean, for 0 ≤ k < 1.
pub fn complete_elliptic_agm(k: f64) -> (f64, f64) {
    let mut a = 1.0;
    let mut b = (1.0 - k * k).sqrt();
    let mut c = k;
    let mut sum = 0.5 * c * c;
    let mut pow2 = 0.5;
    for _ in 0..64 {
        if c.abs() <= AGM_TOL * a {
            break;
        }
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        c = 0.5 * (a - b);
        a = an;
        b = bn;
        pow2 *= 2.0;
        sum += pow2 * c * c;
    }
    let kk = FRAC_PI_2 / a;
    (kk, kk * (1.0 - sum))
}

/// K and E from their Maclaurin series truncated after [`SERIES_TERMS`]
/// terms, evaluated after two descending Landen steps
/// k → k₁ = (1 − k′)/(1 + k′) so the truncation stays accurate close to k = 1.
pub fn complete_elliptic_series(k: f64) -> (f64, f64) {
    landen(k, 2)
}

fn landen(k: f64, steps: usize) -> (f64, f64) {
    if steps == 0 {
        return maclaurin(k);
    }
    let kp = (1.0 - k * k).sqrt();
    let k1 = (1.0 - kp) / (1.0 + kp);
    let (k_small, e_small) = landen(k1, steps - 1);
    let kk = (1.0 + k1) * k_small;
    let ee = (1.0 + kp) * e_small - kp * kk;
    (kk, ee)
}

fn maclaurin(k: f64) -> (f64, f64) {
    let m = k * k;
    // c_n = ((2n)! / (2^{2n} n!²))²
    let mut c = 1.0;
    let mut mn = 1.0;
    let mut kk = 0.0;
    let mut ee = 0.0;
    for n in 0..SERIES_TERMS {
        if n > 0 {
            let r = (2 * n - 1) as f64 / (2 * n) as f64;
            c *= r * r;
            mn *= m;
        }
        kk += c * mn;
        ee += c * mn / (1.0 - 2.0 * n as f64);
    }
    (FRAC_PI_2 * kk, FRAC_PI_2 * ee)
}
