//! Covariance functions on a scalar input and their Gram matrices.

mod chol;

pub use chol::{
    cholesky_psd, cholesky_semidefinite, forward_substitute, lower_mul, Cholesky, JITTER_LADDER,
};

use crate::error::{invalid, Result};
use crate::params::{join, Param, Parameterized};
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

/// One term of a spectral mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmComponent {
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Kernel {
    /// `σ² exp(-r (t-s)²)`
    SquaredExponential { sigma: f64, rate: f64 },
    /// `σ² min(t, s)`
    Brownian { sigma: f64 },
    /// `Σ w² exp(-2π² v τ²) cos(2π μ τ)`
    SpectralMixture { components: Vec<SmComponent> },
    /// `σ₀²` when the inputs are exactly equal, else 0.
    WhiteNoise { sigma0: f64 },
    Sum { terms: Vec<Kernel> },
}

impl Kernel {
    pub fn squared_exponential(sigma: f64, rate: f64) -> Self {
        Kernel::SquaredExponential { sigma, rate }
    }

    pub fn brownian(sigma: f64) -> Self {
        Kernel::Brownian { sigma }
    }

    pub fn white_noise(sigma0: f64) -> Self {
        Kernel::WhiteNoise { sigma0 }
    }

    pub fn spectral_mixture(components: Vec<SmComponent>) -> Self {
        Kernel::SpectralMixture { components }
    }

    pub fn sum(terms: Vec<Kernel>) -> Self {
        Kernel::Sum { terms }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("must be positive and finite, got {v}")))
            }
        };
        match self {
            Kernel::SquaredExponential { sigma, rate } => {
                pos("sigma", *sigma)?;
                pos("rate", *rate)
            }
            Kernel::Brownian { sigma } => pos("sigma", *sigma),
            Kernel::SpectralMixture { components } => {
                if components.is_empty() {
                    return Err(invalid("components", "spectral mixture needs at least one component"));
                }
                for c in components {
                    pos("weight", c.weight)?;
                    pos("variance", c.variance)?;
                    if !c.mean.is_finite() {
                        return Err(invalid("mean", "must be finite"));
                    }
                }
                Ok(())
            }
            Kernel::WhiteNoise { sigma0 } => {
                if *sigma0 >= 0.0 && sigma0.is_finite() {
                    Ok(())
                } else {
                    Err(invalid("sigma0", format!("must be nonnegative, got {sigma0}")))
                }
            }
            Kernel::Sum { terms } => terms.iter().try_for_each(Kernel::validate),
        }
    }

    /// `k(t, s)`; the white-noise part is dropped when `include_noise` is false.
    pub fn eval(&self, t: f64, s: f64, include_noise: bool) -> f64 {
        match self {
            Kernel::SquaredExponential { sigma, rate } => {
                let d = t - s;
                sigma * sigma * (-rate * d * d).exp()
            }
            Kernel::Brownian { sigma } => sigma * sigma * t.min(s),
            Kernel::SpectralMixture { components } => {
                let tau = t - s;
                components
                    .iter()
                    .map(|c| {
                        c.weight
                            * c.weight
                            * (-2.0 * PI * PI * c.variance * tau * tau).exp()
                            * (2.0 * PI * c.mean * tau).cos()
                    })
                    .sum()
            }
            Kernel::WhiteNoise { sigma0 } => {
                if include_noise && t == s {
                    sigma0 * sigma0
                } else {
                    0.0
                }
            }
            Kernel::Sum { terms } => terms.iter().map(|k| k.eval(t, s, include_noise)).sum(),
        }
    }

    /// `[G]_ij = k(t_i, s_j)`.
    pub fn gram(&self, t: &[f64], s: &[f64], include_noise: bool) -> DMatrix<f64> {
        DMatrix::from_fn(t.len(), s.len(), |i, j| self.eval(t[i], s[j], include_noise))
    }

    /// Symmetric Gram matrix on one input set, filled from the lower triangle.
    pub fn gram_sym(&self, t: &[f64], include_noise: bool) -> DMatrix<f64> {
        let n = t.len();
        let mut g = DMatrix::zeros(n, n);
        for j in 0..n {
            for i in j..n {
                let v = self.eval(t[i], t[j], include_noise);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }

    /// Total white-noise variance `σ₀²` across all noise terms.
    pub fn noise_variance(&self) -> f64 {
        match self {
            Kernel::WhiteNoise { sigma0 } => sigma0 * sigma0,
            Kernel::Sum { terms } => terms.iter().map(Kernel::noise_variance).sum(),
            _ => 0.0,
        }
    }

    pub fn has_noise(&self) -> bool {
        match self {
            Kernel::WhiteNoise { .. } => true,
            Kernel::Sum { terms } => terms.iter().any(Kernel::has_noise),
            _ => false,
        }
    }
}

impl Parameterized for Kernel {
    fn collect_params(&self, prefix: &str, out: &mut Vec<Param>) {
        match self {
            Kernel::SquaredExponential { sigma, rate } => {
                out.push(Param::positive(join(prefix, "se.sigma"), *sigma));
                out.push(Param::positive(join(prefix, "se.rate"), *rate));
            }
            Kernel::Brownian { sigma } => {
                out.push(Param::positive(join(prefix, "brownian.sigma"), *sigma))
            }
            Kernel::SpectralMixture { components } => {
                for (q, c) in components.iter().enumerate() {
                    let p = join(prefix, &format!("sm{q}"));
                    out.push(Param::positive(join(&p, "weight"), c.weight));
                    out.push(Param::free(join(&p, "mean"), c.mean));
                    out.push(Param::positive(join(&p, "variance"), c.variance));
                }
            }
            Kernel::WhiteNoise { sigma0 } => {
                out.push(Param::positive(join(prefix, "noise.sigma0"), *sigma0))
            }
            Kernel::Sum { terms } => {
                for (i, k) in terms.iter().enumerate() {
                    k.collect_params(&join(prefix, &format!("{i}")), out);
                }
            }
        }
    }

    fn assign_params(&mut self, v: &[f64]) -> usize {
        match self {
            Kernel::SquaredExponential { sigma, rate } => {
                *sigma = v[0];
                *rate = v[1];
                2
            }
            Kernel::Brownian { sigma } => {
                *sigma = v[0];
                1
            }
            Kernel::SpectralMixture { components } => {
                for (q, c) in components.iter_mut().enumerate() {
                    c.weight = v[3 * q];
                    c.mean = v[3 * q + 1];
                    c.variance = v[3 * q + 2];
                }
                3 * components.len()
            }
            Kernel::WhiteNoise { sigma0 } => {
                *sigma0 = v[0];
                1
            }
            Kernel::Sum { terms } => {
                let mut used = 0;
                for k in terms.iter_mut() {
                    used += k.assign_params(&v[used..]);
                }
                used
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brownian_gram() {
        let g = Kernel::brownian(1.0).gram(&[1.0, 2.0], &[1.0, 2.0], true);
        assert_eq!(g, DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 2.0]));
    }

    #[test]
    fn se_diagonal_is_variance() {
        let g = Kernel::squared_exponential(1.0, 3.7).gram(&[0.4], &[0.4], true);
        assert_eq!(g[(0, 0)], 1.0);
    }

    #[test]
    fn noise_only_on_diagonal() {
        let k = Kernel::sum(alloc::vec![Kernel::squared_exponential(1.3, 0.5), Kernel::white_noise(0.3)]);
        let t = [0.0, 0.5, 0.5, 2.0];
        let with = k.gram_sym(&t, true);
        let without = k.gram_sym(&t, false);
        let d = with - without;
        for i in 0..4 {
            for j in 0..4 {
                let expect = if t[i] == t[j] { 0.09 } else { 0.0 };
                assert!((d[(i, j)] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn params_round_trip() {
        let mut k = Kernel::sum(alloc::vec![
            Kernel::spectral_mixture(alloc::vec![
                SmComponent { weight: 1.0, mean: 0.1, variance: 0.01 },
                SmComponent { weight: 0.5, mean: 0.3, variance: 0.02 },
            ]),
            Kernel::white_noise(0.2),
        ]);
        let p = k.params();
        assert_eq!(p.len(), 7);
        assert_eq!(p[6].name, "1.noise.sigma0");
        let vals: Vec<f64> = (0..7).map(|i| i as f64 + 1.0).collect();
        assert_eq!(k.assign_params(&vals), 7);
        let back: Vec<f64> = k.params().iter().map(|p| p.value).collect();
        assert_eq!(back, vals);
    }
}
