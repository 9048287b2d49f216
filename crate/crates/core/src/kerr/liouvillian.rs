use nalgebra::DMatrix;
use num_complex::Complex64;

use super::band::BandMatrix;
use crate::error::{Error, Result};

/// Vectorised Lindblad generator L with vec(ρ̇) = L vec(ρ).
///
/// Vectorisation is row-major: ρ_{mn} sits at index m·N + n. For a
/// Hamiltonian with half-bandwidth b the generator is banded with b·N
/// sub-diagonals and max(b·N, N + 1) super-diagonals, which is what makes the
/// steady-state solve cheap for the tridiagonal Kerr Hamiltonian.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    levels: usize,
    matrix: BandMatrix,
}

impl Liouvillian {
    /// Hilbert-space dimension N (the generator is N² × N²).
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn band(&self) -> &BandMatrix {
        &self.matrix
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        self.matrix.to_dense()
    }

    /// L vec(ρ) for a density matrix given in row-major vectorised form.
    pub fn apply(&self, rho: &[Complex64]) -> Vec<Complex64> {
        self.matrix.mul_vec(rho)
    }

    #[inline]
    pub fn index(&self, m: usize, n: usize) -> usize {
        m * self.levels + n
    }
}

fn half_bandwidth(h: &DMatrix<Complex64>) -> usize {
    let n = h.nrows();
    let mut b = 0;
    for i in 0..n {
        for j in 0..n {
            if h[(i, j)] != Complex64::new(0.0, 0.0) {
                b = b.max(i.abs_diff(j));
            }
        }
    }
    b
}

/// Builds L(ρ) = −i[H, ρ] + Γ₁(aρa† − ½a†aρ − ½ρa†a) for a Hamiltonian in
/// angular-frequency units and single-photon loss at `relaxation_rate`.
pub fn build_liouvillian(hamiltonian: &DMatrix<Complex64>, relaxation_rate: f64) -> Result<Liouvillian> {
    let n = hamiltonian.nrows();
    if hamiltonian.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: hamiltonian.ncols(),
        });
    }
    if n < 2 {
        return Err(Error::domain("Hilbert space must have at least two levels"));
    }
    if !(relaxation_rate.is_finite() && relaxation_rate >= 0.0) {
        return Err(Error::domain(format!("relaxation rate must be >= 0, got {relaxation_rate}")));
    }
    let scale = hamiltonian.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    if (hamiltonian - hamiltonian.adjoint()).iter().any(|v| v.norm() > 1e-12 * scale) {
        return Err(Error::domain("Hamiltonian is not Hermitian"));
    }

    let b = half_bandwidth(hamiltonian);
    let lower = b * n;
    let upper = (b * n).max(n + 1);
    let mut l = BandMatrix::zeros(n * n, lower, upper);
    let idx = |m: usize, k: usize| m * n + k;
    let minus_i = Complex64::new(0.0, -1.0);
    let plus_i = Complex64::new(0.0, 1.0);

    for m in 0..n {
        for k in 0..n {
            let row = idx(m, k);
            // −i H ρ : (Hρ)_{mk} = Σ_j H_{mj} ρ_{jk}
            for j in m.saturating_sub(b)..=(m + b).min(n - 1) {
                let h = hamiltonian[(m, j)];
                if h != Complex64::new(0.0, 0.0) {
                    l.add(row, idx(j, k), minus_i * h);
                }
            }
            // +i ρ H : (ρH)_{mk} = Σ_j ρ_{mj} H_{jk}
            for j in k.saturating_sub(b)..=(k + b).min(n - 1) {
                let h = hamiltonian[(j, k)];
                if h != Complex64::new(0.0, 0.0) {
                    l.add(row, idx(m, j), plus_i * h);
                }
            }
            if relaxation_rate > 0.0 {
                // a ρ a† : √((m+1)(k+1)) ρ_{m+1,k+1}
                if m + 1 < n && k + 1 < n {
                    let c = relaxation_rate * (((m + 1) * (k + 1)) as f64).sqrt();
                    l.add(row, idx(m + 1, k + 1), Complex64::new(c, 0.0));
                }
                l.add(row, row, Complex64::new(-0.5 * relaxation_rate * (m + k) as f64, 0.0));
            }
        }
    }
    Ok(Liouvillian { levels: n, matrix: l })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kerr::hamiltonian::{annihilation, build_kerr_hamiltonian, kerr_hamiltonian_unchecked};
    use rand::{Rng, SeedableRng};

    fn random_hermitian(n: usize, seed: u64) -> DMatrix<Complex64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
    }

    /// Dense reference generator from explicit operator products.
    fn dense_reference(h: &DMatrix<Complex64>, gamma: f64, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let n = h.nrows();
        let a = annihilation(n);
        let ad = a.adjoint();
        let num = &ad * &a;
        let i = Complex64::new(0.0, 1.0);
        let g = Complex64::new(gamma, 0.0);
        let half = Complex64::new(0.5, 0.0);
        (h * rho - rho * h) * (-i) + (&a * rho * &ad - (&num * rho) * half - (rho * &num) * half) * g
    }

    #[test]
    fn zero_generator() {
        let h = DMatrix::zeros(4, 4);
        let l = build_liouvillian(&h, 0.0).unwrap();
        assert!(l.to_dense().iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn matches_operator_form_for_random_states() {
        for (n, seed) in [(3, 1), (5, 2), (6, 3)] {
            let h = random_hermitian(n, seed);
            let gamma = 0.37;
            let l = build_liouvillian(&h, gamma).unwrap();
            let rho = random_hermitian(n, seed + 100);
            let v: Vec<Complex64> = (0..n * n).map(|i| rho[(i / n, i % n)]).collect();
            let out = l.apply(&v);
            let reference = dense_reference(&h, gamma, &rho);
            for i in 0..n * n {
                assert!((out[i] - reference[(i / n, i % n)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn trace_preservation() {
        for (n, seed) in [(3, 11), (4, 12), (8, 13)] {
            let h = random_hermitian(n, seed);
            let l = build_liouvillian(&h, 1.7).unwrap().to_dense();
            for col in 0..n * n {
                let s: Complex64 = (0..n).map(|m| l[(m * n + m, col)]).sum();
                assert!(s.norm() < 1e-10, "column {col}: {s}");
            }
        }
        let h = build_kerr_hamiltonian(0.4, 2.0, 0.9, 10).unwrap();
        let l = build_liouvillian(&h, 0.05).unwrap().to_dense();
        for col in 0..100 {
            let s: Complex64 = (0..10).map(|m| l[(m * 10 + m, col)]).sum();
            assert!(s.norm() < 1e-10);
        }
    }

    #[test]
    fn two_level_population_decay_rate() {
        let gamma = 2.3;
        let h = kerr_hamiltonian_unchecked(0.0, 0.0, 0.0, 2);
        let l = build_liouvillian(&h, gamma).unwrap();
        // |1⟩⟨1| − |0⟩⟨0| is an eigenvector with eigenvalue −Γ₁.
        let v = vec![
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ];
        let out = l.apply(&v);
        for i in 0..4 {
            assert!((out[i] + v[i] * gamma).norm() < 1e-14);
        }
        // and coherences decay at Γ₁/2
        let c = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        assert!((l.apply(&c)[1] + gamma / 2.0).norm() < 1e-14);
    }

    #[test]
    fn tridiagonal_hamiltonian_gives_narrow_band() {
        let h = build_kerr_hamiltonian(0.1, 1.0, 0.5, 30).unwrap();
        let l = build_liouvillian(&h, 0.2).unwrap();
        assert_eq!(l.band().lower(), 30);
        assert_eq!(l.band().upper(), 31);
    }

    #[test]
    fn rejects_bad_input() {
        let h = DMatrix::from_fn(2, 3, |_, _| Complex64::new(0.0, 0.0));
        assert!(build_liouvillian(&h, 1.0).is_err());
        let mut nh = DMatrix::zeros(2, 2);
        nh[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(build_liouvillian(&nh, 1.0).is_err());
        assert!(build_liouvillian(&DMatrix::zeros(2, 2), -1.0).is_err());
    }
}
