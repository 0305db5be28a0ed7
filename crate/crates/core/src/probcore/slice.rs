//! Univariate slice sampling with stepping out and shrinkage.

use crate::error::{Result, TpError};
use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceSettings {
    pub burn_in: usize,
    pub width: f64,
    pub max_expansions: usize,
    pub max_shrinks: usize,
    /// Keep every `thin`-th state after burn-in.
    pub thin: usize,
}

impl Default for SliceSettings {
    fn default() -> Self {
        Self {
            burn_in: 100,
            width: 1.0,
            max_expansions: 50,
            max_shrinks: 200,
            thin: 1,
        }
    }
}

/// Slice sampler over an unnormalized log density.
#[derive(Debug, Clone, Copy, Default)]
pub struct SliceSampler {
    pub settings: SliceSettings,
}

impl SliceSampler {
    pub fn new(settings: SliceSettings) -> Self {
        Self { settings }
    }

    /// Runs the chain from `x0` and returns `n` retained states.
    pub fn sample<F, R>(&self, log_density: F, x0: f64, n: usize, rng: &mut R) -> Result<Vec<f64>>
    where
        F: Fn(f64) -> f64,
        R: Rng + ?Sized,
    {
        let mut out = Vec::with_capacity(n);
        if n == 0 {
            return Ok(out);
        }
        let mut x = x0;
        let mut lx = log_density(x);
        if !lx.is_finite() {
            return Err(TpError::Numerical(format!(
                "log density is not finite at the starting point {x0}"
            )));
        }
        let thin = self.settings.thin.max(1);
        let total = self.settings.burn_in + n * thin;
        for step in 0..total {
            let (nx, nl) = self.step(&log_density, x, lx, rng)?;
            x = nx;
            lx = nl;
            if step >= self.settings.burn_in && (step - self.settings.burn_in + 1) % thin == 0 {
                out.push(x);
            }
        }
        Ok(out)
    }

    fn step<F, R>(&self, f: &F, x: f64, lx: f64, rng: &mut R) -> Result<(f64, f64)>
    where
        F: Fn(f64) -> f64,
        R: Rng + ?Sized,
    {
        let w = self.settings.width;
        let e: f64 = -(1.0 - rng.random::<f64>()).ln();
        let level = lx - e;
        let mut lo = x - w * rng.random::<f64>();
        let mut hi = lo + w;
        let mut k = 0;
        while f(lo) > level {
            lo -= w;
            k += 1;
            if k > self.settings.max_expansions {
                return Err(TpError::Numerical(format!(
                    "slice lower endpoint still inside the slice after {} expansions",
                    self.settings.max_expansions
                )));
            }
        }
        k = 0;
        while f(hi) > level {
            hi += w;
            k += 1;
            if k > self.settings.max_expansions {
                return Err(TpError::Numerical(format!(
                    "slice upper endpoint still inside the slice after {} expansions",
                    self.settings.max_expansions
                )));
            }
        }
        for _ in 0..self.settings.max_shrinks {
            let cand = lo + (hi - lo) * rng.random::<f64>();
            let lc = f(cand);
            if lc > level {
                return Ok((cand, lc));
            }
            if cand < x {
                lo = cand;
            } else {
                hi = cand;
            }
        }
        Ok((x, lx))
    }
}
