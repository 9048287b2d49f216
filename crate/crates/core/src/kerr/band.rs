//! Complex band matrices and a partially pivoted band LU solve.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Square matrix with `lower` sub-diagonals and `upper` super-diagonals.
///
/// Row `i` stores columns `i - lower ..= i + upper` contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    data: Vec<Complex64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        let lower = lower.min(n.saturating_sub(1));
        let upper = upper.min(n.saturating_sub(1));
        Self {
            n,
            lower,
            upper,
            data: vec![ZERO; n * (lower + upper + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lower(&self) -> usize {
        self.lower
    }

    pub fn upper(&self) -> usize {
        self.upper
    }

    fn width(&self) -> usize {
        self.lower + self.upper + 1
    }

    #[inline]
    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.lower >= i && j <= i + self.upper
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if i < self.n && j < self.n && self.in_band(i, j) {
            self.data[i * self.width() + j + self.lower - i]
        } else {
            ZERO
        }
    }

    /// Adds `value` at (i, j). Panics if the entry lies outside the band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, value: Complex64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let w = self.width();
        self.data[i * w + j + self.lower - i] += value;
    }

    /// Iterates over stored (column, value) pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let w = self.width();
        let first = i.saturating_sub(self.lower);
        let last = (i + self.upper).min(self.n - 1);
        (first..=last).map(move |j| (j, self.data[i * w + j + self.lower - i]))
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Copy with row and column `k` removed.
    pub fn without(&self, k: usize) -> BandMatrix {
        let mut out = BandMatrix::zeros(self.n - 1, self.lower, self.upper);
        let shift = |i: usize| if i > k { i - 1 } else { i };
        for i in (0..self.n).filter(|&i| i != k) {
            for (j, v) in self.row(i).filter(|&(j, _)| j != k) {
                if v != ZERO {
                    out.add(shift(i), shift(j), v);
                }
            }
        }
        out
    }
}

/// Outcome of a band solve, with the smallest pivot magnitude relative to the
/// largest matrix entry as a conditioning indicator.
#[derive(Debug, Clone)]
pub struct BandSolution {
    pub x: Vec<Complex64>,
    pub min_relative_pivot: f64,
}

/// Partially pivoted LU factors of a band matrix. Row interchanges widen the
/// upper band by the lower bandwidth.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    lu: Vec<Complex64>,
    pivots: Vec<usize>,
    pub min_relative_pivot: f64,
}

impl BandLu {
    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.kl + self.ku + 1) + j + self.kl - i
    }

    /// Gaussian elimination with partial pivoting inside the band. Fails if
    /// a pivot falls below `pivot_tolerance` times the largest entry.
    pub fn factor(a: &BandMatrix, pivot_tolerance: f64) -> Result<Self> {
        let n = a.dim();
        let kl = a.lower();
        let ku = a.upper() + kl;
        let mut f = Self {
            n,
            kl,
            ku,
            lu: vec![ZERO; n * (kl + ku + 1)],
            pivots: vec![0; n],
            min_relative_pivot: f64::INFINITY,
        };
        for i in 0..n {
            for (j, v) in a.row(i) {
                let k = f.idx(i, j);
                f.lu[k] = v;
            }
        }
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = f.lu[f.idx(k, k)].norm();
            for i in k + 1..=last_row {
                let v = f.lu[f.idx(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            f.min_relative_pivot = f.min_relative_pivot.min(best / scale);
            if best <= pivot_tolerance * scale {
                return Err(Error::Numerical(format!(
                    "band LU: pivot {:.3e} at column {k} below tolerance",
                    best / scale
                )));
            }
            f.pivots[k] = p;
            let last_col = (k + ku).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (f.idx(k, j), f.idx(p, j));
                    f.lu.swap(a, b);
                }
            }
            let inv = Complex64::new(1.0, 0.0) / f.lu[f.idx(k, k)];
            for i in k + 1..=last_row {
                let ik = f.idx(i, k);
                let factor = f.lu[ik] * inv;
                // The multiplier is kept in the eliminated slot.
                f.lu[ik] = factor;
                if factor == ZERO {
                    continue;
                }
                // Rows k and i are contiguous over columns k+1..=last_col.
                let len = last_col - k;
                let (pk, pi) = (f.idx(k, k + 1), f.idx(i, k + 1));
                let (head, tail) = f.lu.split_at_mut(pi);
                for (t, &u) in tail[..len].iter_mut().zip(&head[pk..pk + len]) {
                    *t -= factor * u;
                }
            }
        }
        Ok(f)
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: b.len(),
            });
        }
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.pivots[k]);
            let r = x[k];
            for i in k + 1..=(k + self.kl).min(n - 1) {
                x[i] -= self.lu[self.idx(i, k)] * r;
            }
        }
        for k in (0..n).rev() {
            let mut acc = x[k];
            for j in k + 1..=(k + self.ku).min(n - 1) {
                acc -= self.lu[self.idx(k, j)] * x[j];
            }
            x[k] = acc / self.lu[self.idx(k, k)];
        }
        Ok(x)
    }
}

/// Solves `a x = b` with [`BandLu`].
pub fn solve(a: &BandMatrix, b: &[Complex64], pivot_tolerance: f64) -> Result<BandSolution> {
    if b.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.len(),
        });
    }
    let lu = BandLu::factor(a, pivot_tolerance)?;
    Ok(BandSolution {
        x: lu.solve(b)?,
        min_relative_pivot: lu.min_relative_pivot,
    })
}
