//! Bracketed inversion of monotone functions.

#[allow(unused_imports)]
use num_traits::Float;
use crate::error::{Result, TpError};
use alloc::format;

const BISECT_REL_WIDTH: f64 = 1e-12;
const NEWTON_STEPS: usize = 3;
const MAX_EXPANSIONS: usize = 2000;
const MAX_BISECTIONS: usize = 4000;

/// Lower end of the domain searched by [`invert_increasing`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    /// `(0, ∞)`
    Positive,
    /// `(-∞, ∞)`
    Real,
}

/// Solves `g(x) = target` for an increasing `g` with derivative `dg`.
///
/// Brackets from `guess`, bisects to relative width 1e-12, then applies
/// three Newton steps that are kept inside the final bracket.
pub fn invert_increasing<G, D>(g: G, dg: D, target: f64, support: Support, guess: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if !target.is_finite() {
        return Err(TpError::Domain(format!("non-finite inversion target {target}")));
    }
    let x0 = match support {
        Support::Positive if !(guess > 0.0) || !guess.is_finite() => 1.0,
        Support::Real if !guess.is_finite() => 0.0,
        _ => guess,
    };
    let (mut lo, mut hi) = bracket(&g, target, support, x0)?;
    if lo == hi {
        return Ok(lo);
    }

    let mut iters = 0;
    while hi - lo > BISECT_REL_WIDTH * lo.abs().max(hi.abs()) + f64::MIN_POSITIVE {
        let mid = match support {
            Support::Positive if hi > 4.0 * lo && lo > 0.0 => (lo * hi).sqrt(),
            Support::Positive if lo == 0.0 => 0.5 * hi,
            _ => 0.5 * (lo + hi),
        };
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        iters += 1;
        if iters > MAX_BISECTIONS {
            return Err(TpError::Numerical(format!(
                "bisection did not reach tolerance in [{lo}, {hi}]"
            )));
        }
    }

    let mut x = 0.5 * (lo + hi);
    for _ in 0..NEWTON_STEPS {
        let slope = dg(x);
        if !(slope > 0.0) || !slope.is_finite() {
            break;
        }
        let next = x - (g(x) - target) / slope;
        if !next.is_finite() || next < lo || next > hi {
            break;
        }
        x = next;
    }
    Ok(x)
}

fn bracket<G: Fn(f64) -> f64>(g: &G, target: f64, support: Support, x0: f64) -> Result<(f64, f64)> {
    let v0 = g(x0);
    if v0 == target {
        return Ok((x0, x0));
    }
    let step0 = x0.abs().max(1.0);
    if v0 < target {
        let mut lo = x0;
        let mut k = 0;
        loop {
            let hi = match support {
                Support::Positive => lo * 2.0,
                Support::Real => x0 + step0 * 2f64.powi(k),
            };
            if !hi.is_finite() {
                break;
            }
            if g(hi) >= target {
                return Ok((lo, hi));
            }
            lo = hi;
            k += 1;
            if k as usize > MAX_EXPANSIONS {
                break;
            }
        }
        Err(TpError::Numerical(format!("could not bracket target {target} above {x0}")))
    } else {
        let mut hi = x0;
        let mut k = 0;
        loop {
            let lo = match support {
                Support::Positive => hi * 0.5,
                Support::Real => x0 - step0 * 2f64.powi(k),
            };
            if support == Support::Positive && lo < 1e-300 {
                return Ok((0.0, hi));
            }
            if !lo.is_finite() {
                break;
            }
            if g(lo) <= target {
                return Ok((lo, hi));
            }
            hi = lo;
            k += 1;
            if k as usize > MAX_EXPANSIONS {
                break;
            }
        }
        Err(TpError::Numerical(format!("could not bracket target {target} below {x0}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverts_cubic() {
        let x = invert_increasing(|x| x * x * x, |x| 3.0 * x * x, 27.0, Support::Real, 0.0).unwrap();
        assert!((x - 3.0).abs() < 1e-14);
    }

    #[test]
    fn inverts_on_positive_axis_from_far_guess() {
        let x = invert_increasing(|x| x.ln(), |x| 1.0 / x, -20.0, Support::Positive, 1e6).unwrap();
        assert!((x - (-20.0f64).exp()).abs() < 1e-20);
    }

    #[test]
    fn unreachable_target_errors() {
        let r = invert_increasing(|x: f64| x.atan(), |x| 1.0 / (1.0 + x * x), 2.0, Support::Real, 0.0);
        assert!(r.is_err());
    }
}
