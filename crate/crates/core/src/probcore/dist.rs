//! Scalar distributions used by the transport layers.

#[allow(unused_imports)]
use num_traits::Float;
use super::root::{invert_increasing, Support};
use super::special::{
    beta_inc, gamma_inc, ln_beta, ln_gamma, norm_cdf, norm_isf, norm_ln_pdf, norm_quantile,
    norm_sf,
};
use crate::error::{invalid, Result, TpError};
use alloc::format;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Exp1, FisherF, Gamma, StandardNormal};

/// Distribution families. Parameters are validated by [`Dist1D::new`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    StdNormal,
    /// Shape and rate.
    Gamma { shape: f64, rate: f64 },
    /// Reciprocal of `Gamma { shape, rate }`.
    InvGamma { shape: f64, rate: f64 },
    /// Square root of a chi-squared variable (chi distribution).
    SqrtChiSquared { dof: u32 },
    FisherSnedecor { d1: f64, d2: f64 },
    /// `sqrt(scale * F(d1, d2))`.
    ScaledSqrtF { scale: f64, d1: f64, d2: f64 },
    /// `scale * F(d1, d2)`.
    ScaledF { scale: f64, d1: f64, d2: f64 },
    Exponential { rate: f64 },
    /// `1 - (1 + x)^(-1/theta)` on `x >= 0`.
    ShiftedPareto { theta: f64 },
    Uniform01,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dist1D {
    family: Family,
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be positive and finite, got {v}")))
    }
}

impl Dist1D {
    pub fn new(family: Family) -> Result<Self> {
        match family {
            Family::StdNormal | Family::Uniform01 => {}
            Family::Gamma { shape, rate } | Family::InvGamma { shape, rate } => {
                positive("shape", shape)?;
                positive("rate", rate)?;
            }
            Family::SqrtChiSquared { dof } => {
                if dof == 0 {
                    return Err(invalid("dof", "must be at least 1"));
                }
            }
            Family::FisherSnedecor { d1, d2 } => {
                positive("d1", d1)?;
                positive("d2", d2)?;
            }
            Family::ScaledSqrtF { scale, d1, d2 } | Family::ScaledF { scale, d1, d2 } => {
                positive("scale", scale)?;
                positive("d1", d1)?;
                positive("d2", d2)?;
            }
            Family::Exponential { rate } => positive("rate", rate)?,
            Family::ShiftedPareto { theta } => positive("theta", theta)?,
        }
        Ok(Self { family })
    }

    pub fn std_normal() -> Self {
        Self { family: Family::StdNormal }
    }

    pub fn uniform01() -> Self {
        Self { family: Family::Uniform01 }
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        Self::new(Family::Gamma { shape, rate })
    }

    pub fn inv_gamma(shape: f64, rate: f64) -> Result<Self> {
        Self::new(Family::InvGamma { shape, rate })
    }

    pub fn sqrt_chi_squared(dof: u32) -> Result<Self> {
        Self::new(Family::SqrtChiSquared { dof })
    }

    pub fn fisher(d1: f64, d2: f64) -> Result<Self> {
        Self::new(Family::FisherSnedecor { d1, d2 })
    }

    pub fn scaled_sqrt_f(scale: f64, d1: f64, d2: f64) -> Result<Self> {
        Self::new(Family::ScaledSqrtF { scale, d1, d2 })
    }

    pub fn scaled_f(scale: f64, d1: f64, d2: f64) -> Result<Self> {
        Self::new(Family::ScaledF { scale, d1, d2 })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(Family::Exponential { rate })
    }

    pub fn shifted_pareto(theta: f64) -> Result<Self> {
        Self::new(Family::ShiftedPareto { theta })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    fn support(&self) -> Support {
        match self.family {
            Family::StdNormal => Support::Real,
            _ => Support::Positive,
        }
    }

    /// `(cdf, sf)` evaluated together so each side keeps full precision.
    pub fn cdf_sf(&self, x: f64) -> (f64, f64) {
        match self.family {
            Family::StdNormal => (norm_cdf(x), norm_sf(x)),
            _ if x <= 0.0 => (0.0, 1.0),
            Family::Uniform01 => {
                if x >= 1.0 {
                    (1.0, 0.0)
                } else {
                    (x, 1.0 - x)
                }
            }
            Family::Gamma { shape, rate } => gamma_inc(shape, rate * x),
            Family::InvGamma { shape, rate } => {
                let (p, q) = gamma_inc(shape, rate / x);
                (q, p)
            }
            Family::SqrtChiSquared { dof } => gamma_inc(0.5 * dof as f64, 0.5 * x * x),
            Family::FisherSnedecor { d1, d2 } => f_cdf_sf(x, d1, d2),
            Family::ScaledSqrtF { scale, d1, d2 } => f_cdf_sf(x * x / scale, d1, d2),
            Family::ScaledF { scale, d1, d2 } => f_cdf_sf(x / scale, d1, d2),
            Family::Exponential { rate } => {
                let sf = (-rate * x).exp();
                (-(-rate * x).exp_m1(), sf)
            }
            Family::ShiftedPareto { theta } => {
                let ln_sf = -(x.ln_1p()) / theta;
                (-ln_sf.exp_m1(), ln_sf.exp())
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.cdf_sf(x).0
    }

    pub fn sf(&self, x: f64) -> f64 {
        self.cdf_sf(x).1
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        match self.family {
            Family::StdNormal => norm_ln_pdf(x),
            _ if x < 0.0 => f64::NEG_INFINITY,
            Family::Uniform01 => {
                if x <= 1.0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            Family::Gamma { shape, rate } => {
                shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
            }
            Family::InvGamma { shape, rate } => {
                shape * rate.ln() - ln_gamma(shape) - (shape + 1.0) * x.ln() - rate / x
            }
            Family::SqrtChiSquared { dof } => {
                let k = dof as f64;
                (1.0 - 0.5 * k) * core::f64::consts::LN_2 - ln_gamma(0.5 * k) + (k - 1.0) * x.ln()
                    - 0.5 * x * x
            }
            Family::FisherSnedecor { d1, d2 } => f_ln_pdf(x, d1, d2),
            Family::ScaledSqrtF { scale, d1, d2 } => {
                // x = sqrt(scale f): p(x) = p_F(x²/scale) 2x/scale
                f_ln_pdf(x * x / scale, d1, d2) + (2.0 * x / scale).ln()
            }
            Family::ScaledF { scale, d1, d2 } => f_ln_pdf(x / scale, d1, d2) - scale.ln(),
            Family::Exponential { rate } => rate.ln() - rate * x,
            Family::ShiftedPareto { theta } => -(theta.ln()) - (1.0 / theta + 1.0) * x.ln_1p(),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    fn initial_guess(&self) -> f64 {
        match self.family {
            Family::StdNormal => 0.0,
            Family::Gamma { shape, rate } => shape / rate,
            Family::InvGamma { shape, rate } => rate / shape.max(0.5),
            Family::SqrtChiSquared { dof } => (dof as f64).sqrt(),
            Family::FisherSnedecor { .. } => 1.0,
            Family::ScaledSqrtF { scale, .. } => scale.sqrt(),
            Family::ScaledF { scale, .. } => scale,
            _ => 1.0,
        }
    }

    /// Inverse CDF for `u` in `(0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        check_unit("u", u)?;
        match self.family {
            Family::StdNormal => Ok(norm_quantile(u)),
            Family::Uniform01 => Ok(u),
            Family::Exponential { rate } => Ok(-(-u).ln_1p() / rate),
            Family::ShiftedPareto { theta } => Ok(((-theta * (-u).ln_1p()).exp_m1()).max(0.0)),
            _ => invert_increasing(
                |x| self.cdf(x),
                |x| self.pdf(x),
                u,
                self.support(),
                self.initial_guess(),
            ),
        }
    }

    /// Inverse survival function: the `x` with `sf(x) = q`, for `q` in `(0, 1)`.
    pub fn isf(&self, q: f64) -> Result<f64> {
        check_unit("q", q)?;
        match self.family {
            Family::StdNormal => Ok(norm_isf(q)),
            Family::Uniform01 => Ok(1.0 - q),
            Family::Exponential { rate } => Ok(-q.ln() / rate),
            Family::ShiftedPareto { theta } => Ok((-theta * q.ln()).exp_m1()),
            _ => invert_increasing(
                |x| -self.sf(x),
                |x| self.pdf(x),
                -q,
                self.support(),
                self.initial_guess(),
            ),
        }
    }

    /// Maps a point through `F_other⁻¹ ∘ F_self`, switching to survival
    /// functions in the upper half so tail points keep their precision.
    pub fn transport_to(&self, other: &Dist1D, x: f64) -> Result<f64> {
        let (c, s) = self.cdf_sf(x);
        if c <= 0.0 {
            return Ok(match other.support() {
                Support::Positive => 0.0,
                Support::Real => f64::NEG_INFINITY,
            });
        }
        if s <= 0.0 {
            return Ok(f64::INFINITY);
        }
        if c <= 0.5 {
            other.quantile(c)
        } else {
            other.isf(s)
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.family {
            Family::StdNormal => rng.sample(StandardNormal),
            Family::Uniform01 => rng.random::<f64>(),
            Family::Gamma { shape, rate } => gamma_draw(rng, shape) / rate,
            Family::InvGamma { shape, rate } => rate / gamma_draw(rng, shape),
            Family::SqrtChiSquared { dof } => {
                let chi: f64 = ChiSquared::new(dof as f64).expect("validated dof").sample(rng);
                chi.sqrt()
            }
            Family::FisherSnedecor { d1, d2 } => f_draw(rng, d1, d2),
            Family::ScaledSqrtF { scale, d1, d2 } => (scale * f_draw(rng, d1, d2)).sqrt(),
            Family::ScaledF { scale, d1, d2 } => scale * f_draw(rng, d1, d2),
            Family::Exponential { rate } => {
                let e: f64 = rng.sample(Exp1);
                e / rate
            }
            Family::ShiftedPareto { theta } => {
                let e: f64 = rng.sample(Exp1);
                (theta * e).exp_m1()
            }
        }
    }
}

fn check_unit(name: &str, u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(TpError::Domain(format!("{name} = {u} is outside (0, 1)")))
    }
}

fn gamma_draw<R: Rng + ?Sized>(rng: &mut R, shape: f64) -> f64 {
    Gamma::new(shape, 1.0).expect("validated shape").sample(rng)
}

fn f_draw<R: Rng + ?Sized>(rng: &mut R, d1: f64, d2: f64) -> f64 {
    FisherF::new(d1, d2).expect("validated dof").sample(rng)
}

fn f_cdf_sf(f: f64, d1: f64, d2: f64) -> (f64, f64) {
    if f <= 0.0 {
        return (0.0, 1.0);
    }
    if f.is_infinite() {
        return (1.0, 0.0);
    }
    let denom = d1 * f + d2;
    beta_inc(0.5 * d1, 0.5 * d2, d1 * f / denom, d2 / denom)
}

fn f_ln_pdf(f: f64, d1: f64, d2: f64) -> f64 {
    if f < 0.0 {
        return f64::NEG_INFINITY;
    }
    let a = 0.5 * d1;
    let b = 0.5 * d2;
    a * (d1 / d2).ln() + (a - 1.0) * f.ln() - (a + b) * (d1 * f / d2).ln_1p() - ln_beta(a, b)
}
