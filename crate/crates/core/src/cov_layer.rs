//! Covariance transport `T_t(x) = L_t x` with `L_t` the lower Cholesky factor
//! of the Gram matrix, its posterior push-forward and the sparse variant.

use crate::error::{invalid, Result, TpError};
use crate::kernels::{cholesky_psd, cholesky_semidefinite, Cholesky, Kernel};
use crate::params::{join, Param, Parameterized};
use alloc::format;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CovMode {
    Exact,
    /// Transport through trainable pseudo-data `(s, z)`.
    Sparse {
        pseudo_inputs: Vec<f64>,
        pseudo_values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovarianceLayer {
    pub kernel: Kernel,
    pub mode: CovMode,
}

/// Factorized map at a fixed set of inputs: `y = μ + L x`.
///
/// In exact mode `μ = 0` and `L L^T` is the noisy Gram matrix. In sparse mode
/// `μ` is the pseudo-data mean and `L` factors the conditional covariance.
#[derive(Debug, Clone)]
pub struct CovFactor {
    chol: Cholesky,
    mean: Option<DVector<f64>>,
}

impl CovFactor {
    pub fn cholesky(&self) -> &Cholesky {
        &self.chol
    }

    pub fn jitter(&self) -> f64 {
        self.chol.jitter()
    }

    pub fn dim(&self) -> usize {
        self.chol.dim()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(TpError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        let mut y = self.chol.mul(x);
        if let Some(m) = &self.mean {
            y += m;
        }
        Ok(y.as_slice().to_vec())
    }

    pub fn inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        let x = match &self.mean {
            Some(m) => {
                if y.len() != m.len() {
                    return Err(TpError::DimensionMismatch { expected: m.len(), got: y.len() });
                }
                let r: Vec<f64> = y.iter().zip(m.iter()).map(|(a, b)| a - b).collect();
                self.chol.solve_lower(&r)?
            }
            None => self.chol.solve_lower(y)?,
        };
        Ok(x.as_slice().to_vec())
    }

    /// `-Σ ln l_ii`.
    pub fn logdet_inv(&self) -> f64 {
        -self.chol.ln_diag_sum()
    }
}

/// `ȳ = Wᵀ x + L_c u` where `x = L_t⁻¹ y` is the white residual at the
/// observed inputs, `W = L_t⁻¹ Σ̂_{t t̄}` and `L_c` factors the conditional
/// covariance `Σ̂_{t̄t̄} - WᵀW`.
#[derive(Debug, Clone)]
pub struct PosteriorAffine {
    w: DMatrix<f64>,
    cond: DMatrix<f64>,
    offset: Option<DVector<f64>>,
}

impl PosteriorAffine {
    pub fn n_obs(&self) -> usize {
        self.w.nrows()
    }

    pub fn n_pred(&self) -> usize {
        self.w.ncols()
    }

    /// Conditional mean given the observed-side residual.
    pub fn mean(&self, x_ref: &[f64]) -> Result<Vec<f64>> {
        if x_ref.len() != self.n_obs() {
            return Err(TpError::DimensionMismatch { expected: self.n_obs(), got: x_ref.len() });
        }
        let x = DVector::from_column_slice(x_ref);
        let mut m = self.w.tr_mul(&x);
        if let Some(o) = &self.offset {
            m += o;
        }
        Ok(m.as_slice().to_vec())
    }

    /// Conditional covariance factor (lower triangular, possibly with zero pivots).
    pub fn conditional_factor(&self) -> &DMatrix<f64> {
        &self.cond
    }

    pub fn map(&self, x_ref: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.n_pred() {
            return Err(TpError::DimensionMismatch { expected: self.n_pred(), got: u.len() });
        }
        let mut m = self.mean(x_ref)?;
        let lu = crate::kernels::lower_mul(&self.cond, u);
        for (a, b) in m.iter_mut().zip(lu.iter()) {
            *a += b;
        }
        Ok(m)
    }

    /// Applies the map with a precomputed mean.
    pub fn map_with_mean(&self, mean: &[f64], u: &[f64]) -> Vec<f64> {
        let lu = crate::kernels::lower_mul(&self.cond, u);
        mean.iter().zip(lu.iter()).map(|(a, b)| a + b).collect()
    }
}

impl CovarianceLayer {
    pub fn exact(kernel: Kernel) -> Self {
        Self { kernel, mode: CovMode::Exact }
    }

    pub fn sparse(kernel: Kernel, pseudo_inputs: Vec<f64>, pseudo_values: Vec<f64>) -> Self {
        Self {
            kernel,
            mode: CovMode::Sparse { pseudo_inputs, pseudo_values },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if let CovMode::Sparse { pseudo_inputs, pseudo_values } = &self.mode {
            if pseudo_inputs.is_empty() {
                return Err(invalid("pseudo_inputs", "sparse mode needs at least one pseudo-input"));
            }
            if pseudo_inputs.len() != pseudo_values.len() {
                return Err(TpError::DimensionMismatch {
                    expected: pseudo_inputs.len(),
                    got: pseudo_values.len(),
                });
            }
            if pseudo_inputs.iter().chain(pseudo_values).any(|v| !v.is_finite()) {
                return Err(invalid("pseudo_data", "must be finite"));
            }
        }
        Ok(())
    }

    /// Checks the sparse-mode size rule `m < n` against a training set size.
    pub fn validate_for_data(&self, n: usize) -> Result<()> {
        if let CovMode::Sparse { pseudo_inputs, .. } = &self.mode {
            if pseudo_inputs.len() >= n {
                return Err(TpError::Validation(format!(
                    "sparse mode needs fewer pseudo-inputs than data points ({} >= {n})",
                    pseudo_inputs.len()
                )));
            }
        }
        Ok(())
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.mode, CovMode::Sparse { .. })
    }

    /// Factor of the map at the observed inputs `t`.
    pub fn factor(&self, t: &[f64]) -> Result<CovFactor> {
        match &self.mode {
            CovMode::Exact => Ok(CovFactor {
                chol: cholesky_psd(&self.kernel.gram_sym(t, true))?,
                mean: None,
            }),
            CovMode::Sparse { pseudo_inputs, pseudo_values } => {
                let (mean, cov) = self.sparse_moments(pseudo_inputs, pseudo_values, t, true)?;
                Ok(CovFactor { chol: cholesky_psd(&cov)?, mean: Some(mean) })
            }
        }
    }

    pub fn forward(&self, t: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        check_len(t.len(), x.len())?;
        self.factor(t)?.forward(x)
    }

    pub fn inverse(&self, t: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        check_len(t.len(), y.len())?;
        self.factor(t)?.inverse(y)
    }

    pub fn logdet_inv(&self, t: &[f64]) -> Result<f64> {
        Ok(self.factor(t)?.logdet_inv())
    }

    /// Posterior push-forward from observed inputs `t` to prediction inputs
    /// `tbar`. The observed block uses the noisy kernel, every other block the
    /// noise-free one. In sparse mode the process is first conditioned on the
    /// pseudo-data and the resulting mean and kernel are used throughout.
    pub fn posterior_affine(&self, t: &[f64], tbar: &[f64]) -> Result<PosteriorAffine> {
        match &self.mode {
            CovMode::Exact => {
                let chol = cholesky_psd(&self.kernel.gram_sym(t, true))?;
                self.posterior_affine_with(&chol, t, tbar)
            }
            CovMode::Sparse { pseudo_inputs, pseudo_values } => {
                let ls = cholesky_psd(&self.kernel.gram_sym(pseudo_inputs, true))?;
                let vt = ls.solve_lower_matrix(&self.kernel.gram(pseudo_inputs, t, false))?;
                let vb = ls.solve_lower_matrix(&self.kernel.gram(pseudo_inputs, tbar, false))?;
                let a = ls.solve_lower(pseudo_values)?;
                let mut obs = self.kernel.gram_sym(t, true) - vt.tr_mul(&vt);
                symmetrize(&mut obs);
                let chol = cholesky_psd(&obs)?;
                let cross = self.kernel.gram(t, tbar, false) - vt.tr_mul(&vb);
                let prior = self.kernel.gram_sym(tbar, false) - vb.tr_mul(&vb);
                let mut out = Self::condition(&chol, &cross, prior, tbar, |x| self.kernel.eval(x, x, false))?;
                out.offset = Some(vb.tr_mul(&a));
                Ok(out)
            }
        }
    }

    /// Exact-mode posterior push-forward with an existing observed-side factor.
    pub fn posterior_affine_with(&self, chol: &Cholesky, t: &[f64], tbar: &[f64]) -> Result<PosteriorAffine> {
        if self.is_sparse() {
            return Err(TpError::Validation("posterior_affine_with needs an exact-mode layer".into()));
        }
        check_len(chol.dim(), t.len())?;
        let cross = self.kernel.gram(t, tbar, false);
        let prior = self.kernel.gram_sym(tbar, false);
        Self::condition(chol, &cross, prior, tbar, |x| self.kernel.eval(x, x, false))
    }

    fn condition(
        chol: &Cholesky,
        cross: &DMatrix<f64>,
        prior: DMatrix<f64>,
        tbar: &[f64],
        prior_var: impl Fn(f64) -> f64,
    ) -> Result<PosteriorAffine> {
        let w = chol.solve_lower_matrix(cross)?;
        let scale = tbar.iter().map(|&x| prior_var(x).abs()).fold(0.0, f64::max);
        let mut cov = prior - w.tr_mul(&w);
        symmetrize(&mut cov);
        let cond = conditional_sqrt(&cov, scale)?;
        Ok(PosteriorAffine { w, cond, offset: None })
    }

    /// `ȳ = Σ_{t̄s}Σ_ss⁻¹z + chol(Σ_{t̄t̄} - Σ_{t̄s}Σ_ss⁻¹Σ_{st̄}) u`.
    pub fn sparse_forward(&self, tbar: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        check_len(tbar.len(), u.len())?;
        let CovMode::Sparse { pseudo_inputs, pseudo_values } = &self.mode else {
            return Err(TpError::Validation("sparse_forward needs a sparse-mode layer".into()));
        };
        let (mean, cov) = self.sparse_moments(pseudo_inputs, pseudo_values, tbar, false)?;
        let scale = (0..tbar.len())
            .map(|i| self.kernel.eval(tbar[i], tbar[i], false).abs())
            .fold(0.0, f64::max);
        let l = conditional_sqrt(&cov, scale)?;
        let y = mean + crate::kernels::lower_mul(&l, u);
        Ok(y.as_slice().to_vec())
    }

    /// Mean `Σ_{xs}Σ_ss⁻¹ z` and covariance `Σ_xx - Σ_{xs}Σ_ss⁻¹Σ_{sx}` at inputs `x`.
    fn sparse_moments(
        &self,
        s: &[f64],
        z: &[f64],
        x: &[f64],
        noisy_block: bool,
    ) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let ls = cholesky_psd(&self.kernel.gram_sym(s, true))?;
        let cross = self.kernel.gram(s, x, false);
        let v = ls.solve_lower_matrix(&cross)?;
        let a = ls.solve_lower(z)?;
        let mean = v.tr_mul(&a);
        let mut cov = self.kernel.gram_sym(x, noisy_block) - v.tr_mul(&v);
        symmetrize(&mut cov);
        Ok((mean, cov))
    }
}

/// Lower factor of a conditional covariance. The semidefinite factorization
/// keeps exact zeros (interpolation at noise-free data) but loses accuracy on
/// numerically low-rank matrices; when its reconstruction error exceeds
/// `1e-8·scale` the jittered factorization is used instead.
fn conditional_sqrt(cov: &DMatrix<f64>, scale: f64) -> Result<DMatrix<f64>> {
    if let Ok(l) = cholesky_semidefinite(cov, scale) {
        let err = (&l * l.transpose() - cov).abs().max();
        if err <= 1e-8 * scale.max(f64::MIN_POSITIVE) {
            return Ok(l);
        }
    }
    Ok(cholesky_psd(cov)?.into_factor())
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in j + 1..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(TpError::DimensionMismatch { expected, got })
    }
}

impl Parameterized for CovarianceLayer {
    fn collect_params(&self, prefix: &str, out: &mut Vec<Param>) {
        self.kernel.collect_params(&join(prefix, "kernel"), out);
        if let CovMode::Sparse { pseudo_inputs, pseudo_values } = &self.mode {
            for (i, s) in pseudo_inputs.iter().enumerate() {
                out.push(Param::free(join(prefix, &format!("pseudo.s{i}")), *s));
            }
            for (i, z) in pseudo_values.iter().enumerate() {
                out.push(Param::free(join(prefix, &format!("pseudo.z{i}")), *z));
            }
        }
    }

    fn assign_params(&mut self, v: &[f64]) -> usize {
        let mut used = self.kernel.assign_params(v);
        if let CovMode::Sparse { pseudo_inputs, pseudo_values } = &mut self.mode {
            for s in pseudo_inputs.iter_mut() {
                *s = v[used];
                used += 1;
            }
            for z in pseudo_values.iter_mut() {
                *z = v[used];
                used += 1;
            }
        }
        used
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_noise_is_identity() {
        let l = CovarianceLayer::exact(Kernel::white_noise(1.0));
        let t = [0.0, 1.0, 3.0];
        let x = [0.5, -1.0, 2.0];
        assert_eq!(l.forward(&t, &x).unwrap(), x.to_vec());
        assert_eq!(l.inverse(&t, &x).unwrap(), x.to_vec());
        assert_eq!(l.logdet_inv(&t).unwrap(), 0.0);
    }

    #[test]
    fn brownian_hand_example() {
        let l = CovarianceLayer::exact(Kernel::brownian(1.0));
        let t = [1.0, 2.0];
        assert_eq!(l.forward(&t, &[1.0, 0.0]).unwrap(), alloc::vec![1.0, 1.0]);
        assert_eq!(l.inverse(&t, &[1.0, 1.0]).unwrap(), alloc::vec![1.0, 0.0]);
    }

    #[test]
    fn logdet_of_hand_factor() {
        let g = DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 3.0]);
        let f = CovFactor { chol: cholesky_psd(&g).unwrap(), mean: None };
        assert!((f.logdet_inv() + 1.5 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn interpolates_observations_without_noise() {
        let l = CovarianceLayer::exact(Kernel::squared_exponential(1.2, 0.7));
        let t = [0.0, 0.5, 1.3, 2.0];
        let y = [0.3, -0.2, 1.1, 0.4];
        let x = l.inverse(&t, &y).unwrap();
        let p = l.posterior_affine(&t, &t).unwrap();
        let ybar = p.map(&x, &[0.7, -0.3, 1.0, 2.0]).unwrap();
        for (a, b) in ybar.iter().zip(&y) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn scalar_conditioning() {
        let k = Kernel::squared_exponential(1.5, 0.4);
        let l = CovarianceLayer::exact(k.clone());
        let y = [0.8];
        let x = l.inverse(&[1.0], &y).unwrap();
        let p = l.posterior_affine(&[1.0], &[1.6]).unwrap();
        let mean = p.mean(&x).unwrap()[0];
        let expect = k.eval(1.6, 1.0, false) / k.eval(1.0, 1.0, true) * y[0];
        assert!((mean - expect).abs() < 1e-14);
    }

    #[test]
    fn sparse_with_data_as_pseudo_data_matches_posterior() {
        let k = Kernel::sum(alloc::vec![Kernel::squared_exponential(1.0, 0.9), Kernel::white_noise(0.2)]);
        let t = alloc::vec![0.0, 0.7, 1.5];
        let y = alloc::vec![0.2, 0.9, -0.4];
        let tbar = [0.3, 1.0, 2.2];
        let u = [0.5, -1.0, 0.25];
        let exact = CovarianceLayer::exact(k.clone());
        let x = exact.inverse(&t, &y).unwrap();
        let a = exact.posterior_affine(&t, &tbar).unwrap().map(&x, &u).unwrap();
        let sparse = CovarianceLayer::sparse(k, t, y);
        let b = sparse.sparse_forward(&tbar, &u).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() < 1e-9);
        }
    }

    #[test]
    fn sparse_posterior_conditions_on_observations() {
        let k = Kernel::sum(alloc::vec![Kernel::squared_exponential(1.0, 0.9), Kernel::white_noise(0.1)]);
        let l = CovarianceLayer::sparse(k.clone(), alloc::vec![0.2, 1.4], alloc::vec![0.5, -0.3]);
        let t = [0.0, 0.7, 1.5, 2.1];
        let y = [0.2, 0.9, -0.4, 0.1];
        let tbar = [0.3, 2.5];
        let p = l.posterior_affine(&t, &tbar).unwrap();
        let x = l.inverse(&t, &y).unwrap();
        let got = p.mean(&x).unwrap();
        // conditional Gaussian on the joint, built directly
        let s = [0.2, 1.4];
        let z = DVector::from_column_slice(&[0.5, -0.3]);
        let all: Vec<f64> = t.iter().chain(&tbar).copied().collect();
        let kss = k.gram_sym(&s, true);
        let kss_inv = kss.clone().try_inverse().unwrap();
        let ksa = k.gram(&s, &all, false);
        let mu = ksa.tr_mul(&kss_inv) * &z;
        let mut c = k.gram_sym(&all, false) - ksa.tr_mul(&kss_inv) * &ksa;
        for i in 0..t.len() {
            c[(i, i)] += k.noise_variance();
        }
        let ctt = c.view((0, 0), (4, 4)).into_owned();
        let cbt = c.view((4, 0), (2, 4)).into_owned();
        let r = DVector::from_column_slice(&y) - mu.rows(0, 4);
        let expect = mu.rows(4, 2) + cbt * ctt.try_inverse().unwrap() * r;
        for i in 0..2 {
            assert!((got[i] - expect[i]).abs() < 1e-9, "{} vs {}", got[i], expect[i]);
        }
    }

    #[test]
    fn sparse_mean_and_zero() {
        let k = Kernel::squared_exponential(1.0, 1.0);
        let l = CovarianceLayer::sparse(k, alloc::vec![0.0, 1.0], alloc::vec![0.0, 0.0]);
        assert_eq!(l.sparse_forward(&[0.5, 2.0], &[0.0, 0.0]).unwrap(), alloc::vec![0.0, 0.0]);
        assert!(l.validate_for_data(2).is_err());
        assert!(l.validate_for_data(3).is_ok());
    }
}
