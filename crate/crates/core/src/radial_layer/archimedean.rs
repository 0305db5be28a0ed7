use crate::error::{invalid, Result, TpError};
use crate::params::{join, Param, Parameterized};
use crate::probcore::special::{norm_isf, norm_ln_cdf, norm_ln_pdf, norm_quantile_from_ln};
use crate::probcore::Dist1D;
use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Completely monotone generator `ψ`, the Laplace transform of a mixing
/// variable `W`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Generator {
    /// `ψ(s) = e^{-s}`, `W = 1`.
    Independence,
    /// `ψ(s) = (1+s)^{-1/θ}`, `W ~ Gamma(1/θ, 1)`.
    Clayton { theta: f64 },
}

impl Generator {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Generator::Independence => Ok(()),
            Generator::Clayton { theta } => {
                if theta > 0.0 && theta.is_finite() {
                    Ok(())
                } else {
                    Err(invalid("theta", format!("must be positive, got {theta}")))
                }
            }
        }
    }

    pub fn psi(&self, s: f64) -> f64 {
        match *self {
            Generator::Independence => (-s).exp(),
            Generator::Clayton { theta } => (-(s.ln_1p()) / theta).exp(),
        }
    }

    pub fn psi_inv(&self, u: f64) -> f64 {
        match *self {
            Generator::Independence => -u.ln(),
            Generator::Clayton { theta } => (-theta * u.ln()).exp_m1(),
        }
    }

    /// `k`-th derivative `ψ^{(k)}(s)`.
    pub fn psi_deriv(&self, k: u32, s: f64) -> f64 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        match *self {
            Generator::Independence => sign * (-s).exp(),
            Generator::Clayton { theta } => {
                let a = 1.0 / theta;
                let prod: f64 = (0..k).map(|j| a + j as f64).product();
                sign * prod * (-(a + k as f64) * s.ln_1p()).exp()
            }
        }
    }

    /// `ln|ψ^{(k)}(s)|`.
    pub fn ln_abs_psi_deriv(&self, k: u32, s: f64) -> f64 {
        match *self {
            Generator::Independence => -s,
            Generator::Clayton { theta } => {
                let a = 1.0 / theta;
                let ln_prod: f64 = (0..k).map(|j| (a + j as f64).ln()).sum();
                ln_prod - (a + k as f64) * s.ln_1p()
            }
        }
    }

    /// Law of the radius `S_n = R_n / W` with `R_n ~ Gamma(n, 1)`.
    pub fn radius_law(&self, n: usize) -> Result<Dist1D> {
        let nf = n as f64;
        match *self {
            Generator::Independence => Dist1D::gamma(nf, 1.0),
            Generator::Clayton { theta } => Dist1D::scaled_f(theta * nf, 2.0 * nf, 2.0 / theta),
        }
    }
}

/// Archimedean transport: the fixed pre-map `e_i = -ln Φ(x_i)` followed by the
/// `ℓ1` radial map `e ↦ F⁻¹_{S_n}(F_{R_n}(‖e‖₁)) e/‖e‖₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchimedeanLayer {
    pub generator: Generator,
}

fn pre_map(x: f64) -> f64 {
    -norm_ln_cdf(x)
}

/// Inverse of the pre-map: `x = Φ⁻¹(e^{-e})`.
fn pre_map_inv(e: f64) -> f64 {
    let p = (-e).exp();
    if p > 0.5 {
        norm_isf(-(-e).exp_m1())
    } else {
        norm_quantile_from_ln(-e)
    }
}

impl ArchimedeanLayer {
    pub fn new(generator: Generator) -> Self {
        Self { generator }
    }

    pub fn validate(&self) -> Result<()> {
        self.generator.validate()
    }

    fn laws(&self, n: usize) -> Result<Option<(Dist1D, Dist1D)>> {
        match self.generator {
            Generator::Independence => Ok(None),
            Generator::Clayton { .. } => Ok(Some((Dist1D::gamma(n as f64, 1.0)?, self.generator.radius_law(n)?))),
        }
    }

    fn alpha(base: &Dist1D, target: &Dist1D, r: f64) -> Result<f64> {
        if r <= 0.0 {
            return Ok(0.0);
        }
        base.transport_to(target, r)
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let e: Vec<f64> = x.iter().map(|&v| pre_map(v)).collect();
        let Some((base, target)) = self.laws(x.len())? else {
            return Ok(e);
        };
        let s: f64 = e.iter().sum();
        if s == 0.0 {
            return Ok(e);
        }
        let a = Self::alpha(&base, &target, s)?;
        Ok(e.iter().map(|v| v * (a / s)).collect())
    }

    fn check_positive(y: &[f64]) -> Result<()> {
        for (index, &v) in y.iter().enumerate() {
            if !(v > 0.0) || !v.is_finite() {
                return Err(TpError::CoordinateDomain {
                    index,
                    reason: format!("Archimedean layer needs positive finite values, got {v}"),
                });
            }
        }
        Ok(())
    }

    /// Radial inverse only: `e = α⁻¹(ρ)/ρ · y` and its log-determinant.
    fn radial_inverse(&self, y: &[f64]) -> Result<(Vec<f64>, f64)> {
        let n = y.len();
        let Some((base, target)) = self.laws(n)? else {
            return Ok((y.to_vec(), 0.0));
        };
        let rho: f64 = y.iter().sum();
        let b = target.transport_to(&base, rho)?;
        let h = 1e-5 * (1.0 + b);
        let lo = (b - h).max(0.0);
        let d = (Self::alpha(&base, &target, b + h)? - Self::alpha(&base, &target, lo)?) / (b + h - lo);
        if !(d > 0.0 && d.is_finite()) {
            return Err(TpError::Numerical(format!("radial derivative {d} at {b}")));
        }
        let ld = (n as f64 - 1.0) * (b / rho).ln() - d.ln();
        Ok((y.iter().map(|v| v * (b / rho)).collect(), ld))
    }

    pub fn inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        Ok(self.inverse_with_logdet(y)?.0)
    }

    pub fn logdet_inv(&self, y: &[f64]) -> Result<f64> {
        Ok(self.inverse_with_logdet(y)?.1)
    }

    /// Full inverse to the Gaussian reference and `log|∇S(y)|`, the radial term
    /// plus `Σ_i ln|dx_i/de_i| = Σ_i (-e_i - ln φ(x_i))`.
    pub fn inverse_with_logdet(&self, y: &[f64]) -> Result<(Vec<f64>, f64)> {
        Self::check_positive(y)?;
        let (e, mut ld) = self.radial_inverse(y)?;
        let mut x = Vec::with_capacity(e.len());
        for &ei in &e {
            let xi = pre_map_inv(ei);
            if !xi.is_finite() {
                return Err(TpError::Numerical(format!("pre-map inverse overflowed at {ei}")));
            }
            ld += -ei - norm_ln_pdf(xi);
            x.push(xi);
        }
        if !ld.is_finite() {
            return Err(TpError::Numerical("Archimedean log-determinant is not finite".into()));
        }
        Ok((x, ld))
    }

    /// Marginal CDF `1 - ψ(x)` of each output coordinate.
    pub fn marginal_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self.generator {
            Generator::Independence => -(-x).exp_m1(),
            Generator::Clayton { theta } => -((-(x.ln_1p()) / theta).exp_m1()),
        }
    }

    /// Draws `nbar` copula values `u` from the conditional copula given
    /// observed values `o_1..o_k`.
    pub fn conditional_sample<R: Rng + ?Sized>(&self, observed: &[f64], nbar: usize, rng: &mut R) -> Result<Vec<f64>> {
        for (index, &o) in observed.iter().enumerate() {
            if !(o > 0.0 && o <= 1.0) {
                return Err(TpError::CoordinateDomain {
                    index,
                    reason: format!("copula value {o} is outside (0, 1]"),
                });
            }
        }
        let w = match self.generator {
            Generator::Independence => 1.0,
            Generator::Clayton { theta } => {
                let a: f64 = observed.iter().map(|&o| self.generator.psi_inv(o)).sum();
                let k = observed.len() as f64;
                Dist1D::gamma(1.0 / theta + k, 1.0 + a)?.sample(rng)
            }
        };
        let exp1 = Dist1D::exponential(1.0)?;
        Ok((0..nbar).map(|_| self.generator.psi(exp1.sample(rng) / w)).collect())
    }

    /// `C(u | o) = ψ^{(k)}(Σψ⁻¹(u_i) + a) / ψ^{(k)}(a)`.
    pub fn conditional_cdf(&self, u: &[f64], observed: &[f64]) -> f64 {
        let g = self.generator;
        let a: f64 = observed.iter().map(|&o| g.psi_inv(o)).sum();
        let s: f64 = u.iter().map(|&v| g.psi_inv(v)).sum();
        let k = observed.len() as u32;
        g.psi_deriv(k, s + a) / g.psi_deriv(k, a)
    }
}

impl Parameterized for ArchimedeanLayer {
    fn collect_params(&self, prefix: &str, out: &mut Vec<Param>) {
        if let Generator::Clayton { theta } = self.generator {
            out.push(Param::positive(join(prefix, "clayton.theta"), theta));
        }
    }

    fn assign_params(&mut self, v: &[f64]) -> usize {
        match &mut self.generator {
            Generator::Independence => 0,
            Generator::Clayton { theta } => {
                *theta = v[0];
                1
            }
        }
    }
}
