use crate::error::{invalid, Result, TpError};
use crate::params::{join, Param, Parameterized};
use crate::probcore::special::{norm_ln_pdf, norm_ln_sf, norm_quantile, norm_quantile_from_ln, norm_isf};
use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

/// Increasing bijection `φ` from the data axis to the latent axis.
///
/// `phi` maps an observation to the latent scale, `phi_inv` maps back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Warping {
    /// `φ(y) = a + b·y`
    Affine { a: f64, b: f64 },
    /// `φ(y) = ln y`
    Log,
    /// `φ(y) = (sgn(y+c)|y+c|^λ - 1)/λ`
    BoxCoxShifted { lambda: f64, c: f64 },
    /// `φ(y) = sinh(τ·asinh(y) - s)`
    SinhArcsinh { skew: f64, tail: f64 },
    /// `φ⁻¹(x) = -ln Φ(-x)`, mapping the real line onto `(0, ∞)`.
    NegLogNormCdf,
    /// `φ = φ_k ∘ … ∘ φ_1`, with `φ_1` the first element.
    Composite { parts: Vec<Warping> },
}

fn domain(msg: alloc::string::String) -> TpError {
    TpError::Domain(msg)
}

impl Warping {
    pub fn identity() -> Self {
        Warping::Affine { a: 0.0, b: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Warping::Affine { a, b } => {
                if !a.is_finite() {
                    return Err(invalid("a", "must be finite"));
                }
                if !(*b > 0.0 && b.is_finite()) {
                    return Err(invalid("b", format!("must be positive, got {b}")));
                }
                Ok(())
            }
            Warping::BoxCoxShifted { lambda, c } => {
                if !(*lambda > 0.0 && lambda.is_finite()) {
                    return Err(invalid("lambda", format!("must be positive, got {lambda}")));
                }
                if !c.is_finite() {
                    return Err(invalid("c", "must be finite"));
                }
                Ok(())
            }
            Warping::SinhArcsinh { skew, tail } => {
                if !skew.is_finite() {
                    return Err(invalid("skew", "must be finite"));
                }
                if !(*tail > 0.0 && tail.is_finite()) {
                    return Err(invalid("tail", format!("must be positive, got {tail}")));
                }
                Ok(())
            }
            Warping::Log | Warping::NegLogNormCdf => Ok(()),
            Warping::Composite { parts } => parts.iter().try_for_each(Warping::validate),
        }
    }

    /// `φ(y)`.
    pub fn phi(&self, y: f64) -> Result<f64> {
        let out = match self {
            Warping::Affine { a, b } => a + b * y,
            Warping::Log => {
                if !(y > 0.0) {
                    return Err(domain(format!("log warping needs a positive value, got {y}")));
                }
                y.ln()
            }
            Warping::BoxCoxShifted { lambda, c } => {
                let v = y + c;
                (v.signum() * v.abs().powf(*lambda) - 1.0) / lambda
            }
            Warping::SinhArcsinh { skew, tail } => (tail * y.asinh() - skew).sinh(),
            Warping::NegLogNormCdf => {
                if !(y > 0.0) {
                    return Err(domain(format!(
                        "negative-log-normal-cdf warping needs a positive value, got {y}"
                    )));
                }
                // Φ(-x) = e^{-y}
                let p = (-y).exp();
                if p <= 0.0 {
                    -norm_quantile_from_ln(-y)
                } else if p < 0.5 {
                    -norm_quantile_checked(p)?
                } else {
                    norm_quantile_checked(-(-y).exp_m1())?
                }
            }
            Warping::Composite { parts } => {
                let mut v = y;
                for p in parts {
                    v = p.phi(v)?;
                }
                v
            }
        };
        if out.is_finite() {
            Ok(out)
        } else {
            Err(domain(format!("warping produced a non-finite value at {y}")))
        }
    }

    /// `φ⁻¹(x)`.
    pub fn phi_inv(&self, x: f64) -> Result<f64> {
        let out = match self {
            Warping::Affine { a, b } => (x - a) / b,
            Warping::Log => x.exp(),
            Warping::BoxCoxShifted { lambda, c } => {
                let v = lambda * x + 1.0;
                v.signum() * v.abs().powf(1.0 / lambda) - c
            }
            Warping::SinhArcsinh { skew, tail } => ((x.asinh() + skew) / tail).sinh(),
            Warping::NegLogNormCdf => -norm_ln_sf(x),
            Warping::Composite { parts } => {
                let mut v = x;
                for p in parts.iter().rev() {
                    v = p.phi_inv(v)?;
                }
                v
            }
        };
        if out.is_finite() {
            Ok(out)
        } else {
            Err(domain(format!("inverse warping produced a non-finite value at {x}")))
        }
    }

    /// `ln φ′(y)`.
    pub fn ln_phi_prime(&self, y: f64) -> Result<f64> {
        let out = match self {
            Warping::Affine { b, .. } => b.ln(),
            Warping::Log => {
                if !(y > 0.0) {
                    return Err(domain(format!("log warping needs a positive value, got {y}")));
                }
                -y.ln()
            }
            Warping::BoxCoxShifted { lambda, c } => (lambda - 1.0) * (y + c).abs().ln(),
            Warping::SinhArcsinh { skew, tail } => {
                let z = tail * y.asinh() - skew;
                // ln cosh z without overflow
                let a = z.abs();
                let ln_cosh = a + (-2.0 * a).exp().ln_1p() - core::f64::consts::LN_2;
                ln_cosh + tail.ln() - 0.5 * (y * y).ln_1p()
            }
            Warping::NegLogNormCdf => {
                let x = self.phi(y)?;
                -y - norm_ln_pdf(x)
            }
            Warping::Composite { parts } => {
                let mut v = y;
                let mut acc = 0.0;
                for p in parts {
                    acc += p.ln_phi_prime(v)?;
                    v = p.phi(v)?;
                }
                acc
            }
        };
        if out.is_finite() {
            Ok(out)
        } else {
            Err(invalid(
                "warping",
                format!("derivative is not positive and finite at {y}"),
            ))
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            Warping::Affine { a, b } => *a == 0.0 && *b == 1.0,
            Warping::Composite { parts } => parts.iter().all(Warping::is_identity),
            _ => false,
        }
    }
}

fn norm_quantile_checked(p: f64) -> Result<f64> {
    if p > 0.0 && p < 1.0 {
        Ok(norm_quantile(p))
    } else if p >= 1.0 {
        Ok(norm_isf(f64::MIN_POSITIVE))
    } else {
        Err(domain(format!("probability {p} underflowed")))
    }
}

impl Parameterized for Warping {
    fn collect_params(&self, prefix: &str, out: &mut Vec<Param>) {
        match self {
            Warping::Affine { a, b } => {
                out.push(Param::free(join(prefix, "affine.a"), *a));
                out.push(Param::positive(join(prefix, "affine.b"), *b));
            }
            Warping::BoxCoxShifted { lambda, c } => {
                out.push(Param::positive(join(prefix, "boxcox.lambda"), *lambda));
                out.push(Param::free(join(prefix, "boxcox.c"), *c));
            }
            Warping::SinhArcsinh { skew, tail } => {
                out.push(Param::free(join(prefix, "sinharcsinh.skew"), *skew));
                out.push(Param::positive(join(prefix, "sinharcsinh.tail"), *tail));
            }
            Warping::Log | Warping::NegLogNormCdf => {}
            Warping::Composite { parts } => {
                for (i, p) in parts.iter().enumerate() {
                    p.collect_params(&join(prefix, &format!("{i}")), out);
                }
            }
        }
    }

    fn assign_params(&mut self, v: &[f64]) -> usize {
        match self {
            Warping::Affine { a, b } => {
                *a = v[0];
                *b = v[1];
                2
            }
            Warping::BoxCoxShifted { lambda, c } => {
                *lambda = v[0];
                *c = v[1];
                2
            }
            Warping::SinhArcsinh { skew, tail } => {
                *skew = v[0];
                *tail = v[1];
                2
            }
            Warping::Log | Warping::NegLogNormCdf => 0,
            Warping::Composite { parts } => {
                let mut used = 0;
                for p in parts.iter_mut() {
                    used += p.assign_params(&v[used..]);
                }
                used
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples() -> Vec<Warping> {
        alloc::vec![
            Warping::Affine { a: 0.3, b: 2.0 },
            Warping::BoxCoxShifted { lambda: 0.4, c: 1.5 },
            Warping::BoxCoxShifted { lambda: 1.7, c: -0.2 },
            Warping::SinhArcsinh { skew: 0.3, tail: 0.7 },
            Warping::Composite {
                parts: alloc::vec![
                    Warping::SinhArcsinh { skew: -0.1, tail: 1.4 },
                    Warping::Affine { a: 1.0, b: 0.5 },
                ],
            },
        ]
    }

    #[test]
    fn round_trip_on_real_line() {
        for w in samples() {
            for i in -20..=20 {
                let x = 0.37 * i as f64;
                let y = w.phi_inv(x).unwrap();
                let back = w.phi(y).unwrap();
                assert!((back - x).abs() < 1e-9 * (1.0 + x.abs()), "{w:?} x={x}");
            }
        }
    }

    #[test]
    fn positive_domain_warpings() {
        for w in [Warping::Log, Warping::NegLogNormCdf] {
            for &y in &[1e-6, 0.01, 0.4, 1.0, 3.0, 30.0] {
                let x = w.phi(y).unwrap();
                let back = w.phi_inv(x).unwrap();
                assert!((back - y).abs() < 1e-9 * (1.0 + y), "{w:?} y={y}");
            }
            assert!(w.phi(-1.0).is_err());
            assert!(w.phi(0.0).is_err());
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let mut all = samples();
        all.push(Warping::Log);
        all.push(Warping::NegLogNormCdf);
        for w in all {
            for &y in &[0.3, 0.9, 2.5] {
                let h = 1e-6;
                let fd = (w.phi(y + h).unwrap() - w.phi(y - h).unwrap()) / (2.0 * h);
                let an = w.ln_phi_prime(y).unwrap().exp();
                assert!((fd - an).abs() < 1e-6 * (1.0 + an), "{w:?} y={y}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn box_cox_unit_power_is_shift() {
        let w = Warping::BoxCoxShifted { lambda: 1.0, c: 0.0 };
        assert_eq!(w.phi(6.0).unwrap(), 5.0);
    }

    #[test]
    fn neg_log_norm_cdf_tails() {
        let w = Warping::NegLogNormCdf;
        let y = w.phi_inv(-30.0).unwrap();
        assert!(y > 0.0 && y < 1e-190);
        assert!((w.phi(y).unwrap() + 30.0).abs() < 1e-8);
        let y = w.phi_inv(20.0).unwrap();
        assert!((w.phi(y).unwrap() - 20.0).abs() < 1e-8);
    }
}
