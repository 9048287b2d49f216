use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Truncated annihilation operator, ⟨n−1|a|n⟩ = √n.
pub fn annihilation(levels: usize) -> DMatrix<Complex64> {
    let mut a = DMatrix::zeros(levels, levels);
    for n in 1..levels {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    a
}

pub fn number_operator(levels: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(levels, levels, |i, j| {
        if i == j {
            Complex64::new(i as f64, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Rotating-frame Hamiltonian H/ħ = Δ a†a − (K/2) a†²a² − (Ω/2)(a† + a).
///
/// Diagonal entry n is Δn − (K/2)n(n−1); the only off-diagonal entries are
/// −(Ω/2)√(n+1) between |n⟩ and |n+1⟩.
pub fn build_kerr_hamiltonian(
    detuning: f64,
    self_kerr: f64,
    drive_amplitude: f64,
    truncation: usize,
) -> Result<DMatrix<Complex64>> {
    if truncation < 3 {
        return Err(Error::domain(format!("truncation must be >= 3, got {truncation}")));
    }
    Ok(kerr_hamiltonian_unchecked(detuning, self_kerr, drive_amplitude, truncation))
}

/// Same as [`build_kerr_hamiltonian`] but accepts the two-level truncation
/// used for qubit-limit comparisons.
pub(crate) fn kerr_hamiltonian_unchecked(
    detuning: f64,
    self_kerr: f64,
    drive_amplitude: f64,
    levels: usize,
) -> DMatrix<Complex64> {
    let mut h = DMatrix::zeros(levels, levels);
    for n in 0..levels {
        let nf = n as f64;
        h[(n, n)] = Complex64::new(detuning * nf - 0.5 * self_kerr * nf * (nf - 1.0), 0.0);
        if n + 1 < levels {
            let off = Complex64::new(-0.5 * drive_amplitude * (nf + 1.0).sqrt(), 0.0);
            h[(n, n + 1)] = off;
            h[(n + 1, n)] = off;
        }
    }
    h
}
