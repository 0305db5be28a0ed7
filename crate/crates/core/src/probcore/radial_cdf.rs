//! Radius laws of Gaussian scale mixtures.
//!
//! For a mixing variable `s > 0` with density `p`, the radius of `s·x` with
//! `x ~ N(0, I_n)` has CDF `F(r) = ∫ p(s) F_{R_n}(r/s) ds`, where `R_n` is the
//! chi radius. The integral is discretized once with Gauss–Legendre nodes on
//! the `ln s` axis, giving a finite mixture that is then evaluated exactly.

use super::dist::Dist1D;
use super::quadrature::gauss_legendre;
use super::root::{invert_increasing, Support};
use super::special::{norm_ln_pdf, LN_SQRT_2PI};
use crate::error::{invalid, Result, TpError};
use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

const NODES: usize = 256;
const TAIL_MASS: f64 = 1e-14;

/// Density of the positive scale variable `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MixingDensity {
    /// `s = s0` almost surely.
    PointMass { s0: f64 },
    /// `s = sqrt(v)` with `v ~ InvGamma(shape, rate)`.
    SqrtInvGamma { shape: f64, rate: f64 },
    /// `ln s ~ N(mu, sigma²)`.
    LogNormal { mu: f64, sigma: f64 },
}

impl MixingDensity {
    /// Mixing that turns a Gaussian vector into a Student-t vector with `theta` degrees of freedom.
    pub fn student(theta: f64) -> Self {
        MixingDensity::SqrtInvGamma {
            shape: 0.5 * theta,
            rate: 0.5 * theta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("must be positive and finite, got {v}")))
            }
        };
        match *self {
            MixingDensity::PointMass { s0 } => ok("s0", s0),
            MixingDensity::SqrtInvGamma { shape, rate } => {
                ok("shape", shape)?;
                ok("rate", rate)
            }
            MixingDensity::LogNormal { mu, sigma } => {
                if !mu.is_finite() {
                    return Err(invalid("mu", "must be finite"));
                }
                ok("sigma", sigma)
            }
        }
    }

    /// Draws one scale value.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            MixingDensity::PointMass { s0 } => s0,
            MixingDensity::SqrtInvGamma { shape, rate } => Dist1D::inv_gamma(shape, rate)
                .expect("validated mixing")
                .sample(rng)
                .sqrt(),
            MixingDensity::LogNormal { mu, sigma } => {
                (mu + sigma * Dist1D::std_normal().sample(rng)).exp()
            }
        }
    }

    /// Discrete approximation `(s_i, ln π_i)` with normalized weights.
    fn discretize(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        self.validate()?;
        let (lo, hi, ln_density): (f64, f64, alloc::boxed::Box<dyn Fn(f64) -> f64>) = match *self {
            MixingDensity::PointMass { s0 } => return Ok((alloc::vec![s0], alloc::vec![0.0])),
            MixingDensity::SqrtInvGamma { shape, rate } => {
                let v = Dist1D::inv_gamma(shape, rate)?;
                let lo = 0.5 * v.quantile(TAIL_MASS)?.ln();
                let hi = 0.5 * v.isf(TAIL_MASS)?.ln();
                // ℓ = ln s, v = e^{2ℓ}: p(ℓ) = p_v(e^{2ℓ}) · 2e^{2ℓ}
                (
                    lo,
                    hi,
                    alloc::boxed::Box::new(move |l: f64| {
                        v.ln_pdf((2.0 * l).exp()) + 2.0 * l + core::f64::consts::LN_2
                    }),
                )
            }
            MixingDensity::LogNormal { mu, sigma } => (
                mu - 8.0 * sigma,
                mu + 8.0 * sigma,
                alloc::boxed::Box::new(move |l: f64| norm_ln_pdf((l - mu) / sigma) - sigma.ln()),
            ),
        };
        let (x, w) = gauss_legendre(NODES);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut scales = Vec::with_capacity(NODES);
        let mut ln_w = Vec::with_capacity(NODES);
        for (xi, wi) in x.iter().zip(&w) {
            let l = mid + half * xi;
            let lw = wi.ln() + ln_density(l);
            if lw.is_finite() {
                scales.push(l.exp());
                ln_w.push(lw);
            }
        }
        if scales.is_empty() {
            return Err(TpError::Numerical("mixing density vanished on all nodes".into()));
        }
        let norm = log_sum_exp(&ln_w);
        for lw in ln_w.iter_mut() {
            *lw -= norm;
        }
        Ok((scales, ln_w))
    }
}

pub(crate) fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Radius law of `s·x`, `x ~ N(0, I_n)`, with `s` drawn from a [`MixingDensity`].
#[derive(Debug, Clone)]
pub struct ProductRadialCdf {
    mixing: MixingDensity,
    base: Dist1D,
    dim: u32,
    scales: Vec<f64>,
    ln_weights: Vec<f64>,
    weights: Vec<f64>,
}

impl ProductRadialCdf {
    pub fn new(mixing: MixingDensity, dim: u32) -> Result<Self> {
        let base = Dist1D::sqrt_chi_squared(dim)?;
        let (scales, ln_weights) = mixing.discretize()?;
        let weights = ln_weights.iter().map(|l| l.exp()).collect();
        Ok(Self {
            mixing,
            base,
            dim,
            scales,
            ln_weights,
            weights,
        })
    }

    pub fn mixing(&self) -> &MixingDensity {
        &self.mixing
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn base(&self) -> &Dist1D {
        &self.base
    }

    /// Quadrature scale nodes and normalized weights.
    pub fn nodes(&self) -> (&[f64], &[f64]) {
        (&self.scales, &self.weights)
    }

    pub fn cdf_sf(&self, r: f64) -> (f64, f64) {
        if r <= 0.0 {
            return (0.0, 1.0);
        }
        let mut c = 0.0;
        let mut s = 0.0;
        for (sc, w) in self.scales.iter().zip(&self.weights) {
            let (ci, si) = self.base.cdf_sf(r / sc);
            c += w * ci;
            s += w * si;
        }
        (c.clamp(0.0, 1.0), s.clamp(0.0, 1.0))
    }

    pub fn cdf(&self, r: f64) -> f64 {
        self.cdf_sf(r).0
    }

    pub fn sf(&self, r: f64) -> f64 {
        self.cdf_sf(r).1
    }

    pub fn pdf(&self, r: f64) -> f64 {
        if r < 0.0 {
            return 0.0;
        }
        self.scales
            .iter()
            .zip(&self.weights)
            .map(|(sc, w)| w * self.base.pdf(r / sc) / sc)
            .sum()
    }

    fn guess(&self) -> f64 {
        (self.dim as f64).sqrt()
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(TpError::Domain(format!("u = {u} is outside (0, 1)")));
        }
        invert_increasing(|r| self.cdf(r), |r| self.pdf(r), u, Support::Positive, self.guess())
    }

    pub fn isf(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(TpError::Domain(format!("q = {q} is outside (0, 1)")));
        }
        invert_increasing(|r| -self.sf(r), |r| self.pdf(r), -q, Support::Positive, self.guess())
    }

    /// `ln h_m(ρ²)`: log density of an `m`-dimensional Gaussian scale mixture
    /// with this mixing, at a point of squared norm `rho2`.
    pub fn ln_spherical_density(&self, m: u32, rho2: f64) -> f64 {
        let mf = m as f64;
        let terms: Vec<f64> = self
            .scales
            .iter()
            .zip(&self.ln_weights)
            .map(|(s, lw)| lw - mf * (LN_SQRT_2PI + s.ln()) - 0.5 * rho2 / (s * s))
            .collect();
        log_sum_exp(&terms)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.mixing.sample(rng) * self.base.sample(rng)
    }
}
