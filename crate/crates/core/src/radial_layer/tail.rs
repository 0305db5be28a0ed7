//! Tail-dependence coefficients, closed form and empirical.

use super::archimedean::Generator;
use crate::error::{invalid, Result};
use crate::probcore::special::student_t_cdf;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CopulaKind {
    Gaussian { rho: f64 },
    StudentT { theta: f64, rho: f64 },
    Archimedean { generator: Generator },
}

/// Lower and upper tail-dependence coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailCoefficients {
    pub lower: f64,
    pub upper: f64,
}

const NEAR_ZERO: f64 = 1e-8;
const NEAR_INFINITY: f64 = 1e8;

pub fn tail_dependence(kind: &CopulaKind) -> Result<TailCoefficients> {
    match *kind {
        CopulaKind::Gaussian { rho } => {
            check_rho(rho)?;
            let v = if rho < 1.0 { 0.0 } else { 1.0 };
            Ok(TailCoefficients { lower: v, upper: v })
        }
        CopulaKind::StudentT { theta, rho } => {
            check_rho(rho)?;
            if !(theta > 0.0) {
                return Err(invalid("theta", "must be positive"));
            }
            let arg = -((theta + 1.0).sqrt() * (1.0 - rho).sqrt() / (1.0 + rho).sqrt());
            let v = 2.0 * student_t_cdf(arg, theta + 1.0);
            Ok(TailCoefficients { lower: v, upper: v })
        }
        CopulaKind::Archimedean { generator } => {
            generator.validate()?;
            // ψ′(2x)/ψ′(x) on log scale; ψ′ keeps one sign
            let ln_ratio = |x: f64| generator.ln_abs_psi_deriv(1, 2.0 * x) - generator.ln_abs_psi_deriv(1, x);
            let lower = -2.0 * ln_ratio(NEAR_ZERO).exp_m1();
            let upper = 2.0 * ln_ratio(NEAR_INFINITY).exp();
            Ok(TailCoefficients {
                lower: clean(lower),
                upper: clean(upper),
            })
        }
    }
}

fn clean(v: f64) -> f64 {
    if v.abs() < 1e-6 {
        0.0
    } else {
        v
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&rho) && rho > -1.0 {
        Ok(())
    } else {
        Err(invalid("rho", "must lie in (-1, 1]"))
    }
}

/// Normalized ranks `rank/(N+1)` of a sample.
pub fn pseudo_observations(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = alloc::vec![0.0; n];
    for (rank, &i) in idx.iter().enumerate() {
        out[i] = (rank + 1) as f64 / (n + 1) as f64;
    }
    out
}

/// Empirical `λ̂_l(q) = P(U ≤ q, V ≤ q)/q` and
/// `λ̂_u(q) = P(U > 1-q, V > 1-q)/q` on rank pseudo-observations.
pub fn empirical_tail_dependence(a: &[f64], b: &[f64], q: f64) -> TailCoefficients {
    let u = pseudo_observations(a);
    let v = pseudo_observations(b);
    let n = u.len().min(v.len()) as f64;
    let mut lo = 0usize;
    let mut hi = 0usize;
    for (x, y) in u.iter().zip(&v) {
        if *x <= q && *y <= q {
            lo += 1;
        }
        if *x > 1.0 - q && *y > 1.0 - q {
            hi += 1;
        }
    }
    TailCoefficients {
        lower: lo as f64 / (n * q),
        upper: hi as f64 / (n * q),
    }
}
