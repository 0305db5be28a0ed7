//! Increasing warpings and the coordinate-wise marginal transport
//! `h(t, x) = φ⁻¹(m(t) + σ x)`.

mod warping;

pub use warping::Warping;

use crate::error::{invalid, Result, TpError};
use crate::params::{join, Param, Parameterized};
use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

pub const MAX_POLY_DEGREE: usize = 3;

/// Location function `m(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Location {
    Constant { m: f64 },
    /// `Σ_k coeffs[k]·t^k`, degree at most 3.
    Polynomial { coeffs: Vec<f64> },
}

impl Location {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Location::Constant { m } => *m,
            Location::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c),
        }
    }
}

/// Scale function `σ(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Scale {
    Constant { sigma: f64 },
}

impl Scale {
    pub fn eval(&self, _t: f64) -> f64 {
        match self {
            Scale::Constant { sigma } => *sigma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginalLayer {
    pub warping: Warping,
    pub location: Location,
    pub scale: Scale,
}

impl MarginalLayer {
    pub fn new(warping: Warping, location: Location, scale: Scale) -> Self {
        Self { warping, location, scale }
    }

    pub fn identity() -> Self {
        Self::new(Warping::identity(), Location::Constant { m: 0.0 }, Scale::Constant { sigma: 1.0 })
    }

    /// A pure warping with `m ≡ 0` and `σ ≡ 1`.
    pub fn from_warping(warping: Warping) -> Self {
        Self::new(warping, Location::Constant { m: 0.0 }, Scale::Constant { sigma: 1.0 })
    }

    pub fn validate(&self) -> Result<()> {
        self.warping.validate()?;
        match &self.location {
            Location::Constant { m } if !m.is_finite() => return Err(invalid("m", "must be finite")),
            Location::Polynomial { coeffs } => {
                if coeffs.is_empty() || coeffs.len() > MAX_POLY_DEGREE + 1 {
                    return Err(invalid(
                        "coeffs",
                        format!("polynomial location needs 1 to {} coefficients", MAX_POLY_DEGREE + 1),
                    ));
                }
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(invalid("coeffs", "must be finite"));
                }
            }
            _ => {}
        }
        let Scale::Constant { sigma } = self.scale;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid("sigma", format!("must be positive, got {sigma}")));
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        self.warping.is_identity()
            && self.location.eval(0.0) == 0.0
            && matches!(self.location, Location::Constant { .. })
            && self.scale == Scale::Constant { sigma: 1.0 }
    }

    fn at(index: usize, e: TpError) -> TpError {
        match e {
            TpError::Domain(reason) => TpError::CoordinateDomain { index, reason },
            other => other,
        }
    }

    /// `h(t, x)` for one coordinate.
    pub fn forward_scalar(&self, t: f64, x: f64) -> Result<f64> {
        self.warping.phi_inv(self.location.eval(t) + self.scale.eval(t) * x)
    }

    /// `h⁻¹(t, y)` for one coordinate.
    pub fn inverse_scalar(&self, t: f64, y: f64) -> Result<f64> {
        Ok((self.warping.phi(y)? - self.location.eval(t)) / self.scale.eval(t))
    }

    /// `[T_t(x)]_i = h(t_i, x_i)`.
    pub fn forward(&self, t: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        check_len(t.len(), x.len())?;
        t.iter()
            .zip(x)
            .enumerate()
            .map(|(i, (&ti, &xi))| self.forward_scalar(ti, xi).map_err(|e| Self::at(i, e)))
            .collect()
    }

    /// `[S_t(y)]_i = h⁻¹(t_i, y_i)`.
    pub fn inverse(&self, t: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        check_len(t.len(), y.len())?;
        t.iter()
            .zip(y)
            .enumerate()
            .map(|(i, (&ti, &yi))| self.inverse_scalar(ti, yi).map_err(|e| Self::at(i, e)))
            .collect()
    }

    /// `log|∇S_t(y)| = Σ_i [ln φ′(y_i) - ln σ(t_i)]`.
    pub fn logdet_inv(&self, t: &[f64], y: &[f64]) -> Result<f64> {
        check_len(t.len(), y.len())?;
        let mut acc = 0.0;
        for (i, (&ti, &yi)) in t.iter().zip(y).enumerate() {
            acc += self.warping.ln_phi_prime(yi).map_err(|e| Self::at(i, e))? - self.scale.eval(ti).ln();
        }
        Ok(acc)
    }

    /// Inverse and log-determinant in one pass.
    pub fn inverse_with_logdet(&self, t: &[f64], y: &[f64]) -> Result<(Vec<f64>, f64)> {
        Ok((self.inverse(t, y)?, self.logdet_inv(t, y)?))
    }

    /// Monte Carlo mean of `v(T_t(x))` over rows of reference draws.
    pub fn pushforward_expectation<F>(&self, t: &[f64], samples_x: &[Vec<f64>], v: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> f64,
    {
        if samples_x.is_empty() {
            return Err(TpError::Domain("no samples supplied".into()));
        }
        let mut acc = 0.0;
        for x in samples_x {
            acc += v(&self.forward(t, x)?);
        }
        Ok(acc / samples_x.len() as f64)
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(TpError::DimensionMismatch { expected, got })
    }
}

impl Parameterized for MarginalLayer {
    fn collect_params(&self, prefix: &str, out: &mut Vec<Param>) {
        self.warping.collect_params(&join(prefix, "warping"), out);
        match &self.location {
            Location::Constant { m } => out.push(Param::free(join(prefix, "location.m"), *m)),
            Location::Polynomial { coeffs } => {
                for (k, c) in coeffs.iter().enumerate() {
                    out.push(Param::free(join(prefix, &format!("location.c{k}")), *c));
                }
            }
        }
        let Scale::Constant { sigma } = self.scale;
        out.push(Param::positive(join(prefix, "scale.sigma"), sigma));
    }

    fn assign_params(&mut self, v: &[f64]) -> usize {
        let mut used = self.warping.assign_params(v);
        match &mut self.location {
            Location::Constant { m } => {
                *m = v[used];
                used += 1;
            }
            Location::Polynomial { coeffs } => {
                for c in coeffs.iter_mut() {
                    *c = v[used];
                    used += 1;
                }
            }
        }
        self.scale = Scale::Constant { sigma: v[used] };
        used + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_layer() {
        let l = MarginalLayer::identity();
        let t = [0.0, 1.0, 2.0];
        let x = [0.3, -1.2, 4.0];
        assert_eq!(l.forward(&t, &x).unwrap(), x.to_vec());
        assert_eq!(l.inverse(&t, &x).unwrap(), x.to_vec());
        assert_eq!(l.logdet_inv(&t, &x).unwrap(), 0.0);
    }

    #[test]
    fn log_layer() {
        let l = MarginalLayer::from_warping(Warping::Log);
        assert_eq!(l.forward(&[0.0], &[0.0]).unwrap(), alloc::vec![1.0]);
        assert_eq!(l.inverse(&[0.0], &[1.0]).unwrap(), alloc::vec![0.0]);
        assert!((l.logdet_inv(&[0.0], &[2.0]).unwrap() - 0.5f64.ln()).abs() < 1e-15);
        let err = l.inverse(&[0.0, 1.0], &[1.0, -1.0]).unwrap_err();
        assert!(matches!(err, TpError::CoordinateDomain { index: 1, .. }));
    }

    #[test]
    fn box_cox_example() {
        let l = MarginalLayer::new(
            Warping::BoxCoxShifted { lambda: 1.0, c: 0.0 },
            Location::Constant { m: 3.0 },
            Scale::Constant { sigma: 1.0 },
        );
        assert_eq!(l.forward(&[0.0], &[2.0]).unwrap(), alloc::vec![6.0]);
    }

    #[test]
    fn polynomial_location() {
        let loc = Location::Polynomial { coeffs: alloc::vec![1.0, 2.0, 0.5] };
        assert_eq!(loc.eval(2.0), 1.0 + 4.0 + 2.0);
    }

    #[test]
    fn shifted_mean_expectation() {
        let l = MarginalLayer::new(Warping::identity(), Location::Constant { m: 5.0 }, Scale::Constant { sigma: 1.0 });
        let xs: Vec<Vec<f64>> = (0..200).map(|i| alloc::vec![if i % 2 == 0 { 0.7 } else { -0.7 }]).collect();
        let e = l.pushforward_expectation(&[0.0], &xs, |y| y[0]).unwrap();
        assert!((e - 5.0).abs() < 1e-12);
    }
}
