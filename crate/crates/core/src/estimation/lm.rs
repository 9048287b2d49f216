//! Damped Gauss-Newton (Levenberg-Marquardt) on real residual vectors.
//!
//! The solver works in scaled coordinates p = (x − x₀)/s so that every
//! parameter is O(1) regardless of its physical unit.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Relative step tolerance in scaled coordinates.
    pub step_tolerance: f64,
    /// Tolerance on ‖Jᵀr‖∞ / (‖J‖‖r‖).
    pub gradient_tolerance: f64,
    /// Forward-difference step, relative to max(|p|, 1).
    pub difference_step: f64,
    /// Residual norm treated as an exact fit.
    pub residual_floor: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            step_tolerance: 1e-10,
            gradient_tolerance: 1e-8,
            difference_step: 1e-7,
            residual_floor: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub x: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Jacobian with respect to the physical parameters at `x`.
    pub jacobian: DMatrix<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl LmOutcome {
    pub fn residual_norm(&self) -> f64 {
        self.residuals.iter().map(|r| r * r).sum::<f64>().sqrt()
    }

    /// (JᵀJ)⁻¹ σ̂² with σ̂² = ‖r‖²/(m − n). `None` when JᵀJ is singular or
    /// there are no degrees of freedom left.
    pub fn covariance(&self) -> Option<DMatrix<f64>> {
        let (m, n) = self.jacobian.shape();
        if m <= n {
            return None;
        }
        let jtj = self.jacobian.transpose() * &self.jacobian;
        // Column equilibration keeps the inverse well conditioned when the
        // parameters differ by many orders of magnitude.
        let d = DVector::from_iterator(n, (0..n).map(|i| jtj[(i, i)].sqrt()));
        if d.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return None;
        }
        let scaled = DMatrix::from_fn(n, n, |i, j| jtj[(i, j)] / (d[i] * d[j]));
        let inv = scaled.cholesky()?.inverse();
        let sigma2 = self.residual_norm().powi(2) / (m - n) as f64;
        Some(DMatrix::from_fn(n, n, |i, j| inv[(i, j)] / (d[i] * d[j]) * sigma2))
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|r| r * r).sum::<f64>().sqrt()
}

fn finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Minimises ½‖r(x)‖² starting from `x0`, with `scales` giving the typical
/// magnitude of a change in each parameter.
///
/// `residuals` may fail or return non-finite values for unphysical `x`; such
/// trial points are rejected like an uphill step.
pub fn levenberg_marquardt<F>(residuals: F, x0: &[f64], scales: &[f64], options: &LmOptions) -> Result<LmOutcome>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x0.len();
    if scales.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: scales.len(),
        });
    }
    if scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) || !finite(x0) {
        return Err(Error::domain("initial point and scales must be finite, scales > 0"));
    }
    let to_x = |p: &[f64]| -> Vec<f64> { (0..n).map(|i| x0[i] + scales[i] * p[i]).collect() };
    let eval = |p: &[f64]| -> Option<Vec<f64>> {
        match residuals(&to_x(p)) {
            Ok(r) if finite(&r) => Some(r),
            _ => None,
        }
    };

    let mut p = vec![0.0; n];
    let mut r = eval(&p).ok_or_else(|| Error::Numerical("residuals not finite at the initial point".into()))?;
    let m = r.len();
    if m < n {
        return Err(Error::Precondition(format!("{m} residuals for {n} parameters")));
    }
    let jacobian_at = |p: &[f64], r: &[f64]| -> Result<DMatrix<f64>> {
        let mut j = DMatrix::zeros(m, n);
        for k in 0..n {
            let h = options.difference_step * p[k].abs().max(1.0);
            let mut q = p.to_vec();
            q[k] += h;
            let h = q[k] - p[k];
            let rk = eval(&q)
                .or_else(|| {
                    q[k] = p[k] - h;
                    eval(&q)
                })
                .ok_or_else(|| Error::Numerical("residuals not finite near the current point".into()))?;
            let sign = if q[k] > p[k] { 1.0 } else { -1.0 };
            for i in 0..m {
                j[(i, k)] = sign * (rk[i] - r[i]) / h;
            }
        }
        Ok(j)
    };

    let mut cost = norm(&r);
    // A residual this far below the starting one is an exact fit.
    let floor = options.residual_floor.max(1e-12 * cost);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    let mut jac = jacobian_at(&p, &r)?;

    // Ratio ‖Jᵀr‖∞ / (‖J‖‖r‖); zero at an exact fit.
    let gradient_ratio = |jac: &DMatrix<f64>, r: &[f64]| -> f64 {
        let rn = norm(r);
        if rn <= floor {
            return 0.0;
        }
        let g = jac.transpose() * DVector::from_column_slice(r);
        g.amax() / (jac.norm() * rn)
    };
    // Finite-difference noise can hold the gradient ratio above the strict
    // tolerance; a minimum whose cost no longer changes is accepted down to
    // this looser ratio.
    let noise_ratio = options.gradient_tolerance.sqrt();

    while iterations < options.max_iterations {
        iterations += 1;
        if cost <= floor {
            converged = true;
            break;
        }
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * DVector::from_column_slice(&r);
        let diag_floor = jtj.diagonal().amax().max(f64::MIN_POSITIVE) * 1e-12;

        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += lambda * jtj[(i, i)].max(diag_floor);
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 4.0;
                continue;
            };
            let delta = chol.solve(&(-&g));
            let trial: Vec<f64> = (0..n).map(|i| p[i] + delta[i]).collect();
            match eval(&trial) {
                Some(rt) if norm(&rt) <= cost => {
                    let step = delta.amax();
                    let size = p.iter().fold(0.0f64, |a, v| a.max(v.abs())) + 1.0;
                    let new_cost = norm(&rt);
                    let stationary = cost - new_cost <= 1e-14 * cost;
                    p = trial;
                    r = rt;
                    cost = new_cost;
                    lambda = (lambda / 3.0).max(1e-12);
                    jac = jacobian_at(&p, &r)?;
                    accepted = true;
                    if step <= options.step_tolerance * size {
                        let ratio = gradient_ratio(&jac, &r);
                        converged = ratio <= options.gradient_tolerance || (stationary && ratio <= noise_ratio);
                    }
                    break;
                }
                _ => lambda *= 4.0,
            }
        }
        if converged {
            break;
        }
        if !accepted {
            // No downhill step exists at any damping: a numerical minimum.
            converged = gradient_ratio(&jac, &r) <= noise_ratio;
            break;
        }
    }

    let x = to_x(&p);
    let jacobian = DMatrix::from_fn(m, n, |i, k| jac[(i, k)] / scales[k]);
    Ok(LmOutcome {
        x,
        residuals: r,
        jacobian,
        converged,
        iterations,
    })
}
