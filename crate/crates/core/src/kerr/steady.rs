use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::band;
use super::liouvillian::Liouvillian;
use crate::error::{Error, Result};

const HERMITICITY_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const POSITIVITY_TOL: f64 = -1e-8;
const RESIDUAL_TOL: f64 = 1e-9;
/// Relative singular-value gap below which the null space counts as degenerate.
const AMBIGUITY_TOL: f64 = 1e-12;
const REFINEMENT_STEPS: usize = 2;

/// A validated density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

/// Eigenvalues of a Hermitian matrix. Deep Fock tails underflow into
/// subnormals, which the eigen iteration does not survive, so entries below
/// 1e-60 of the largest are flushed to zero first.
fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> nalgebra::DVector<f64> {
    let floor = 1e-60 * m.iter().map(|v| v.norm()).fold(0.0, f64::max);
    m.map(|v| if v.norm() < floor { Complex64::new(0.0, 0.0) } else { v })
        .symmetric_eigenvalues()
}

impl DensityMatrix {
    /// Checks Hermiticity, unit trace and positivity at the module tolerances.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: entries.ncols(),
            });
        }
        let herm_err = (&entries - entries.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
        if herm_err > HERMITICITY_TOL {
            return Err(Error::Numerical(format!("density matrix not Hermitian ({herm_err:.3e})")));
        }
        let tr = entries.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::Numerical(format!("density matrix trace {tr} != 1")));
        }
        let hermitian = (&entries + entries.adjoint()) * Complex64::new(0.5, 0.0);
        let min_eig = hermitian_eigenvalues(&hermitian).iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < POSITIVITY_TOL {
            return Err(Error::Numerical(format!("density matrix has eigenvalue {min_eig:.3e}")));
        }
        Ok(Self { entries: hermitian })
    }

    /// Fock state |n⟩⟨n|.
    pub fn fock(levels: usize, n: usize) -> Self {
        let mut m = DMatrix::zeros(levels, levels);
        m[(n, n)] = Complex64::new(1.0, 0.0);
        Self { entries: m }
    }

    pub fn dimension(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// tr(Oρ).
    pub fn expectation(&self, op: &DMatrix<Complex64>) -> Complex64 {
        (op * &self.entries).trace()
    }

    /// ⟨a⟩ = Σ √n ρ_{n,n−1}.
    pub fn mean_annihilation(&self) -> Complex64 {
        (1..self.dimension())
            .map(|n| self.entries[(n, n - 1)] * (n as f64).sqrt())
            .sum()
    }

    /// ⟨a†a⟩.
    pub fn mean_photon_number(&self) -> f64 {
        (0..self.dimension()).map(|n| n as f64 * self.entries[(n, n)].re).sum()
    }

    pub fn population(&self, n: usize) -> f64 {
        self.entries[(n, n)].re
    }

    /// ½‖ρ − σ‖₁.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        let diff = &self.entries - &other.entries;
        0.5 * hermitian_eigenvalues(&diff).iter().map(|e| e.abs()).sum::<f64>()
    }

    fn from_vectorized(levels: usize, x: &[Complex64]) -> Result<Self> {
        let trace: Complex64 = (0..levels).map(|m| x[m * levels + m]).sum();
        if trace.norm() < f64::MIN_POSITIVE {
            return Err(Error::Numerical("steady state has zero trace".into()));
        }
        let m = DMatrix::from_fn(levels, levels, |i, j| x[i * levels + j] / trace);
        Self::new(m)
    }

    fn vectorized(&self) -> Vec<Complex64> {
        let n = self.dimension();
        (0..n * n).map(|i| self.entries[(i / n, i % n)]).collect()
    }
}

fn residual_ok(l: &Liouvillian, rho: &DensityMatrix) -> (bool, f64) {
    let r = l.apply(&rho.vectorized());
    let res = r.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let scale = l.band().frobenius_norm().max(f64::MIN_POSITIVE);
    (res <= RESIDUAL_TOL * scale, res / scale)
}

/// Band solve with ρ_kk pinned to one. The ρ_kk row is a linear combination
/// of the other population rows (trace preservation), so it is replaced by
/// the pin, which keeps the band structure.
fn pinned_solve(l: &Liouvillian, k: usize) -> Result<Vec<Complex64>> {
    let dim = l.levels() * l.levels();
    let pin = l.index(k, k);
    let reduced = l.band().without(pin);
    let rhs: Vec<Complex64> = (0..dim).filter(|&i| i != pin).map(|i| -l.band().get(i, pin)).collect();
    let lu = band::BandLu::factor(&reduced, 1e-13)?;
    let mut x = lu.solve(&rhs)?;
    for _ in 0..REFINEMENT_STEPS {
        let ax = reduced.mul_vec(&x);
        let r: Vec<Complex64> = rhs.iter().zip(&ax).map(|(b, v)| b - v).collect();
        for (xi, d) in x.iter_mut().zip(lu.solve(&r)?) {
            *xi += d;
        }
    }
    x.insert(pin, Complex64::new(1.0, 0.0));
    Ok(x)
}

/// Unique trace-one null vector of the generator.
///
/// Solved banded with ρ₀₀ pinned; when the vacuum is not the dominant
/// population the solve is repeated pinning the largest one, which bounds
/// the error amplification of the final rescaling to unit trace. If the band
/// solve is ill-conditioned or the result fails validation, the stacked
/// least-squares solve decides.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    steady_state_banded(l).or_else(|_| steady_state_least_squares(l))
}

pub(crate) fn steady_state_banded(l: &Liouvillian) -> Result<DensityMatrix> {
    let n = l.levels();
    pinned_solve(l, 0)
        .and_then(|x| {
            let (k, largest) = (0..n)
                .map(|m| (m, x[l.index(m, m)].re))
                .fold((0, 1.0), |a, b| if b.1 > a.1 { b } else { a });
            if largest > 2.0 {
                pinned_solve(l, k)
            } else {
                Ok(x)
            }
        })
        .and_then(|x| {
            let rho = DensityMatrix::from_vectorized(n, &x)?;
            let (ok, rel) = residual_ok(l, &rho);
            if ok {
                Ok(rho)
            } else {
                Err(Error::Numerical(format!("steady-state residual {rel:.3e} too large")))
            }
        })
}

/// Least-squares solve of the generator stacked with a weighted trace row,
/// [L; w·⟨⟨I|] x = [0; w]. Dense, O(N⁶); used as the reference solver and for
/// diagnosing degenerate null spaces.
pub fn steady_state_least_squares(l: &Liouvillian) -> Result<DensityMatrix> {
    let n = l.levels();
    let dim = n * n;
    let dense = l.to_dense();
    let w = l.band().max_abs().max(1.0);
    let mut stacked = DMatrix::<Complex64>::zeros(dim + 1, dim);
    stacked.view_mut((0, 0), (dim, dim)).copy_from(&dense);
    for m in 0..n {
        stacked[(dim, m * n + m)] = Complex64::new(w, 0.0);
    }
    let mut rhs = DVector::<Complex64>::zeros(dim + 1);
    rhs[dim] = Complex64::new(w, 0.0);

    let svd = stacked.svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let gap = if smax > 0.0 { smin / smax } else { 0.0 };
    if gap < AMBIGUITY_TOL {
        return Err(Error::AmbiguousSteadyState { gap });
    }
    let x = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::Numerical(format!("least-squares solve failed: {e}")))?;
    let rho = DensityMatrix::from_vectorized(n, x.as_slice())?;
    let (ok, rel) = residual_ok(l, &rho);
    if !ok {
        return Err(Error::Numerical(format!("steady-state residual {rel:.3e} too large")));
    }
    Ok(rho)
}
