//! Cholesky factorization with a deterministic jitter ladder, and the
//! triangular solves built on it.

use crate::error::{Result, TpError};
use alloc::format;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

/// Multipliers of the largest diagonal entry tried in order.
pub const JITTER_LADDER: [f64; 4] = [0.0, 1e-10, 1e-8, 1e-6];

/// Lower Cholesky factor `L` with `L Lᵀ = G + εI`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    l: DMatrix<f64>,
    jitter: f64,
}

impl Cholesky {
    /// Wraps an already lower-triangular factor.
    pub fn from_lower(l: DMatrix<f64>) -> Self {
        Self { l, jitter: 0.0 }
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn into_factor(self) -> DMatrix<f64> {
        self.l
    }

    /// The `ε` that was added to the diagonal.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// `Σ ln l_ii`.
    pub fn ln_diag_sum(&self) -> f64 {
        (0..self.dim()).map(|i| self.l[(i, i)].ln()).sum()
    }

    /// `L x`.
    pub fn mul(&self, x: &[f64]) -> DVector<f64> {
        lower_mul(&self.l, x)
    }

    /// Solves `L x = b` by forward substitution.
    pub fn solve_lower(&self, b: &[f64]) -> Result<DVector<f64>> {
        forward_substitute(&self.l, b)
    }

    /// Solves `L X = B` column by column.
    pub fn solve_lower_matrix(&self, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let mut out = DMatrix::zeros(b.nrows(), b.ncols());
        for j in 0..b.ncols() {
            let col: alloc::vec::Vec<f64> = b.column(j).iter().copied().collect();
            out.set_column(j, &forward_substitute(&self.l, &col)?);
        }
        Ok(out)
    }

    /// Solves `Lᵀ x = b` by back substitution.
    pub fn solve_upper(&self, b: &[f64]) -> Result<DVector<f64>> {
        let n = self.dim();
        check_len(n, b.len())?;
        let mut x = DVector::from_column_slice(b);
        for i in (0..n).rev() {
            let mut acc = x[i];
            for k in i + 1..n {
                acc -= self.l[(k, i)] * x[k];
            }
            let d = self.l[(i, i)];
            if d == 0.0 {
                return Err(TpError::Numerical(format!("zero diagonal entry at {i}")));
            }
            x[i] = acc / d;
        }
        Ok(x)
    }

    /// Solves `(L Lᵀ) x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<DVector<f64>> {
        let y = self.solve_lower(b)?;
        self.solve_upper(y.as_slice())
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(TpError::DimensionMismatch { expected, got })
    }
}

/// `L x` for lower-triangular `L`.
pub fn lower_mul(l: &DMatrix<f64>, x: &[f64]) -> DVector<f64> {
    let n = l.nrows();
    let mut y = DVector::zeros(n);
    for j in 0..l.ncols().min(x.len()) {
        let xj = x[j];
        if xj == 0.0 {
            continue;
        }
        for i in j..n {
            y[i] += l[(i, j)] * xj;
        }
    }
    y
}

/// Forward substitution for lower-triangular `L`.
pub fn forward_substitute(l: &DMatrix<f64>, b: &[f64]) -> Result<DVector<f64>> {
    let n = l.nrows();
    check_len(n, b.len())?;
    let mut x = DVector::from_column_slice(b);
    for j in 0..n {
        let d = l[(j, j)];
        if d == 0.0 || !d.is_finite() {
            return Err(TpError::Numerical(format!("singular diagonal entry {d} at {j}")));
        }
        let xj = x[j] / d;
        x[j] = xj;
        for i in j + 1..n {
            x[i] -= l[(i, j)] * xj;
        }
    }
    Ok(x)
}

/// Plain Cholesky of `G + εI`; on failure returns the 1-based leading minor
/// that was not positive.
fn factorize(g: &DMatrix<f64>, eps: f64) -> core::result::Result<DMatrix<f64>, usize> {
    let n = g.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = g[(j, j)] + eps;
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(j + 1);
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut acc = g[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = acc / ljj;
        }
    }
    Ok(l)
}

fn max_diag(g: &DMatrix<f64>) -> f64 {
    (0..g.nrows()).map(|i| g[(i, i)].abs()).fold(0.0, f64::max)
}

/// Cholesky with the smallest jitter from [`JITTER_LADDER`] that succeeds.
pub fn cholesky_psd(g: &DMatrix<f64>) -> Result<Cholesky> {
    if g.nrows() != g.ncols() {
        return Err(TpError::DimensionMismatch {
            expected: g.nrows(),
            got: g.ncols(),
        });
    }
    let scale = max_diag(g);
    let mut minor = 1;
    for m in JITTER_LADDER {
        let eps = m * scale;
        match factorize(g, eps) {
            Ok(l) => return Ok(Cholesky { l, jitter: eps }),
            Err(k) => minor = k,
        }
    }
    Err(TpError::NotPositiveDefinite { minor })
}

/// Cholesky of a positive semidefinite matrix.
///
/// Pivots below `1e-10·scale` are treated as exact zeros and their column is
/// zeroed; a pivot below `-1e-6·scale` is reported as not positive definite.
pub fn cholesky_semidefinite(g: &DMatrix<f64>, scale: f64) -> Result<DMatrix<f64>> {
    let n = g.nrows();
    let scale = if scale > 0.0 { scale } else { max_diag(g).max(f64::MIN_POSITIVE) };
    let zero_tol = 1e-10 * scale;
    let neg_tol = -1e-6 * scale;
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = g[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !d.is_finite() || d < neg_tol {
            return Err(TpError::NotPositiveDefinite { minor: j + 1 });
        }
        if d <= zero_tol {
            continue;
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut acc = g[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = acc / ljj;
        }
    }
    Ok(l)
}
