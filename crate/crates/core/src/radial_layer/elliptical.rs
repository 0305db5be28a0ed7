use crate::error::{invalid, Result, TpError};
use crate::params::{join, Param, Parameterized, Transform};
use crate::probcore::{Dist1D, MixingDensity, ProductRadialCdf, SliceSampler, SliceSettings};
use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Largest admissible `1/θ`; keeps `θ > 2`.
pub const NU_INV_MAX: f64 = 0.49;
/// Below this `1/θ` the Student-t map is evaluated as the Gaussian identity.
pub const NU_INV_GAUSSIAN: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EllipticalMixing {
    GaussianIdentity,
    /// Student-t with `θ = 1/nu_inv` degrees of freedom; `nu_inv = 0` is Gaussian.
    StudentT { nu_inv: f64 },
    General { mixing: MixingDensity },
}

/// Elliptical radial transport `x ↦ α(‖x‖₂) x/‖x‖₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipticalLayer {
    pub mixing: EllipticalMixing,
}

/// Target radius law `R_{n,θ}`.
#[derive(Debug, Clone)]
pub(crate) enum RadialLaw {
    Closed(Dist1D),
    Product(ProductRadialCdf),
}

impl RadialLaw {
    fn cdf_sf(&self, r: f64) -> (f64, f64) {
        match self {
            RadialLaw::Closed(d) => d.cdf_sf(r),
            RadialLaw::Product(p) => p.cdf_sf(r),
        }
    }

    fn quantile(&self, u: f64) -> Result<f64> {
        match self {
            RadialLaw::Closed(d) => d.quantile(u),
            RadialLaw::Product(p) => p.quantile(u),
        }
    }

    fn isf(&self, q: f64) -> Result<f64> {
        match self {
            RadialLaw::Closed(d) => d.isf(q),
            RadialLaw::Product(p) => p.isf(q),
        }
    }
}

/// `G⁻¹(F(r))`, using survival functions in the upper half.
pub(crate) fn transport(from: (f64, f64), to_quantile: impl Fn(f64) -> Result<f64>, to_isf: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let (c, s) = from;
    if c <= 0.0 {
        return Ok(0.0);
    }
    if s <= 0.0 {
        return Err(TpError::Numerical("radius is beyond the representable tail".into()));
    }
    if c <= 0.5 {
        to_quantile(c)
    } else {
        to_isf(s)
    }
}

impl EllipticalLayer {
    pub fn gaussian() -> Self {
        Self { mixing: EllipticalMixing::GaussianIdentity }
    }

    pub fn student_t(nu_inv: f64) -> Self {
        Self { mixing: EllipticalMixing::StudentT { nu_inv } }
    }

    pub fn general(mixing: MixingDensity) -> Self {
        Self { mixing: EllipticalMixing::General { mixing } }
    }

    pub fn validate(&self) -> Result<()> {
        match self.mixing {
            EllipticalMixing::GaussianIdentity => Ok(()),
            EllipticalMixing::StudentT { nu_inv } => {
                if (0.0..=NU_INV_MAX).contains(&nu_inv) {
                    Ok(())
                } else {
                    Err(invalid("nu_inv", format!("must lie in [0, {NU_INV_MAX}], got {nu_inv}")))
                }
            }
            EllipticalMixing::General { mixing } => mixing.validate(),
        }
    }

    /// Whether the layer is the identity map.
    pub fn is_identity(&self) -> bool {
        match self.mixing {
            EllipticalMixing::GaussianIdentity => true,
            EllipticalMixing::StudentT { nu_inv } => nu_inv < NU_INV_GAUSSIAN,
            EllipticalMixing::General { .. } => false,
        }
    }

    /// Degrees of freedom of the Student-t mode, if active.
    pub fn theta(&self) -> Option<f64> {
        match self.mixing {
            EllipticalMixing::StudentT { nu_inv } if nu_inv >= NU_INV_GAUSSIAN => Some(1.0 / nu_inv),
            _ => None,
        }
    }

    pub(crate) fn laws(&self, n: usize) -> Result<Option<(Dist1D, RadialLaw)>> {
        if self.is_identity() || n == 0 {
            return Ok(None);
        }
        let base = Dist1D::sqrt_chi_squared(n as u32)?;
        let target = match self.mixing {
            EllipticalMixing::StudentT { nu_inv } => {
                let nf = n as f64;
                RadialLaw::Closed(Dist1D::scaled_sqrt_f(nf, nf, 1.0 / nu_inv)?)
            }
            EllipticalMixing::General { mixing } => RadialLaw::Product(ProductRadialCdf::new(mixing, n as u32)?),
            EllipticalMixing::GaussianIdentity => unreachable!("identity handled above"),
        };
        Ok(Some((base, target)))
    }

    /// `α_{n,θ}(r) = F⁻¹_{R_{n,θ}}(F_{R_n}(r))`.
    pub fn alpha(&self, n: usize, r: f64) -> Result<f64> {
        match self.laws(n)? {
            None => Ok(r),
            Some((base, target)) => alpha_with(&base, &target, r),
        }
    }

    /// `α⁻¹_{n,θ}(ρ)`.
    pub fn alpha_inv(&self, n: usize, rho: f64) -> Result<f64> {
        match self.laws(n)? {
            None => Ok(rho),
            Some((base, target)) => alpha_inv_with(&base, &target, rho),
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let r = norm2(x);
        if r == 0.0 || self.is_identity() {
            return Ok(x.to_vec());
        }
        let a = self.alpha(x.len(), r)?;
        Ok(x.iter().map(|v| v * (a / r)).collect())
    }

    pub fn inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        let rho = norm2(y);
        if rho == 0.0 || self.is_identity() {
            return Ok(y.to_vec());
        }
        let b = self.alpha_inv(y.len(), rho)?;
        Ok(y.iter().map(|v| v * (b / rho)).collect())
    }

    /// `(n-1) ln(α⁻¹(ρ)/ρ) - ln α′(α⁻¹(ρ))` with `ρ = ‖y‖₂`.
    pub fn logdet_inv(&self, y: &[f64]) -> Result<f64> {
        Ok(self.inverse_with_logdet(y)?.1)
    }

    pub fn inverse_with_logdet(&self, y: &[f64]) -> Result<(Vec<f64>, f64)> {
        if self.is_identity() {
            return Ok((y.to_vec(), 0.0));
        }
        let n = y.len();
        let rho = norm2(y);
        if rho == 0.0 {
            return Err(TpError::Domain("radial log-determinant is singular at the origin".into()));
        }
        let (base, target) = self.laws(n)?.expect("non-identity layer has laws");
        let b = alpha_inv_with(&base, &target, rho)?;
        let d = alpha_prime_with(&base, &target, b)?;
        let ld = (n as f64 - 1.0) * (b / rho).ln() - d.ln();
        if !ld.is_finite() {
            return Err(TpError::Numerical(format!("radial log-determinant is not finite at ρ = {rho}")));
        }
        Ok((y.iter().map(|v| v * (b / rho)).collect(), ld))
    }

    /// One draw of the predictive radius `‖z̄‖` given an observed copula-level
    /// vector of norm `y_norm` in dimension `n`, for `nbar` new coordinates.
    pub fn studentt_posterior_radius<R: Rng + ?Sized>(
        &self,
        y_norm: f64,
        n: usize,
        nbar: usize,
        rng: &mut R,
    ) -> Result<f64> {
        let theta = self
            .theta()
            .ok_or_else(|| TpError::Validation("Student-t posterior radius needs an active Student-t layer".into()))?;
        studentt_posterior_radius(theta, y_norm, n, nbar, rng)
    }

    /// `count` slice-sampled draws of the predictive radius for a general mixing.
    pub fn posterior_radius_general<R: Rng + ?Sized>(
        &self,
        y_norm: f64,
        n: usize,
        nbar: usize,
        count: usize,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        let mixing = match self.mixing {
            EllipticalMixing::General { mixing } => mixing,
            EllipticalMixing::GaussianIdentity => MixingDensity::PointMass { s0: 1.0 },
            EllipticalMixing::StudentT { nu_inv } if nu_inv < NU_INV_GAUSSIAN => MixingDensity::PointMass { s0: 1.0 },
            EllipticalMixing::StudentT { nu_inv } => MixingDensity::student(1.0 / nu_inv),
        };
        posterior_radius_general(mixing, y_norm, n, nbar, count, rng)
    }
}

pub(crate) fn alpha_with(base: &Dist1D, target: &RadialLaw, r: f64) -> Result<f64> {
    if r <= 0.0 {
        return Ok(0.0);
    }
    transport(base.cdf_sf(r), |u| target.quantile(u), |q| target.isf(q))
}

pub(crate) fn alpha_inv_with(base: &Dist1D, target: &RadialLaw, rho: f64) -> Result<f64> {
    if rho <= 0.0 {
        return Ok(0.0);
    }
    transport(target.cdf_sf(rho), |u| base.quantile(u), |q| base.isf(q))
}

/// Central difference of `α` with step `1e-5·(1+r)`.
pub(crate) fn alpha_prime_with(base: &Dist1D, target: &RadialLaw, r: f64) -> Result<f64> {
    let h = 1e-5 * (1.0 + r);
    let lo = (r - h).max(0.0);
    let hi = r + h;
    let d = (alpha_with(base, target, hi)? - alpha_with(base, target, lo)?) / (hi - lo);
    if d > 0.0 && d.is_finite() {
        Ok(d)
    } else {
        Err(TpError::Numerical(format!("radial map derivative {d} is not positive at r = {r}")))
    }
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    // scaled to avoid overflow for extreme coordinates
    let m = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    m * x.iter().map(|v| (v / m) * (v / m)).sum::<f64>().sqrt()
}

/// `sqrt(n̄(θ+‖y‖²)/(θ+n) · F_{n̄, θ+n})`.
pub fn studentt_posterior_radius<R: Rng + ?Sized>(
    theta: f64,
    y_norm: f64,
    n: usize,
    nbar: usize,
    rng: &mut R,
) -> Result<f64> {
    if nbar == 0 {
        return Ok(0.0);
    }
    let nb = nbar as f64;
    let scale = nb * (theta + y_norm * y_norm) / (theta + n as f64);
    let d = Dist1D::scaled_sqrt_f(scale, nb, theta + n as f64)?;
    Ok(d.sample(rng))
}

/// Slice-sampled draws from `p(b) ∝ b^{n̄-1} h_{n+n̄}(b² + ‖y‖²)`, run on the
/// `ln b` axis as one chain with thinning 5.
pub fn posterior_radius_general<R: Rng + ?Sized>(
    mixing: MixingDensity,
    y_norm: f64,
    n: usize,
    nbar: usize,
    count: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if nbar == 0 {
        return Ok(alloc::vec![0.0; count]);
    }
    let law = ProductRadialCdf::new(mixing, (n + nbar) as u32)?;
    let m = (n + nbar) as u32;
    let y2 = y_norm * y_norm;
    let nb = nbar as f64;
    let log_density = |l: f64| {
        let b2 = (2.0 * l).exp();
        nb * l + law.ln_spherical_density(m, b2 + y2)
    };
    let x0 = 0.5 * nb.ln();
    let settings = SliceSettings { thin: 5, ..SliceSettings::default() };
    let draws = SliceSampler::new(settings).sample(log_density, x0, count, rng)?;
    Ok(draws.into_iter().map(|l| l.exp()).collect())
}

impl Parameterized for EllipticalLayer {
    fn collect_params(&self, prefix: &str, out: &mut Vec<Param>) {
        match self.mixing {
            EllipticalMixing::GaussianIdentity => {}
            EllipticalMixing::StudentT { nu_inv } => out.push(Param::new(
                join(prefix, "student.nu_inv"),
                nu_inv,
                Transform::Box { lo: 0.0, hi: NU_INV_MAX },
            )),
            EllipticalMixing::General { mixing } => match mixing {
                MixingDensity::PointMass { s0 } => out.push(Param::positive(join(prefix, "mixing.s0"), s0)),
                MixingDensity::SqrtInvGamma { shape, rate } => {
                    out.push(Param::positive(join(prefix, "mixing.shape"), shape));
                    out.push(Param::positive(join(prefix, "mixing.rate"), rate));
                }
                MixingDensity::LogNormal { mu, sigma } => {
                    out.push(Param::free(join(prefix, "mixing.mu"), mu));
                    out.push(Param::positive(join(prefix, "mixing.sigma"), sigma));
                }
            },
        }
    }

    fn assign_params(&mut self, v: &[f64]) -> usize {
        match &mut self.mixing {
            EllipticalMixing::GaussianIdentity => 0,
            EllipticalMixing::StudentT { nu_inv } => {
                *nu_inv = v[0];
                1
            }
            EllipticalMixing::General { mixing } => match mixing {
                MixingDensity::PointMass { s0 } => {
                    *s0 = v[0];
                    1
                }
                MixingDensity::SqrtInvGamma { shape, rate } => {
                    *shape = v[0];
                    *rate = v[1];
                    2
                }
                MixingDensity::LogNormal { mu, sigma } => {
                    *mu = v[0];
                    *sigma = v[1];
                    2
                }
            },
        }
    }
}
