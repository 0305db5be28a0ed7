//! Tabulated radial map on a log-spaced grid with monotone cubic (PCHIP)
//! interpolation; points outside the grid are evaluated exactly.

use super::elliptical::{alpha_inv_with, alpha_with, EllipticalLayer, RadialLaw};
use crate::error::{Result, TpError};
use crate::probcore::Dist1D;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

pub const GRID_POINTS: usize = 512;

#[derive(Debug, Clone)]
struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        let h: Vec<f64> = (0..n - 1).map(|i| x[i + 1] - x[i]).collect();
        let s: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = alloc::vec![0.0; n];
        for i in 1..n - 1 {
            if s[i - 1] * s[i] > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / s[i - 1] + w2 / s[i]);
            }
        }
        d[0] = end_slope(h[0], h.get(1).copied().unwrap_or(h[0]), s[0], s.get(1).copied().unwrap_or(s[0]));
        d[n - 1] = end_slope(
            h[n - 2],
            if n > 2 { h[n - 3] } else { h[n - 2] },
            s[n - 2],
            if n > 2 { s[n - 3] } else { s[n - 2] },
        );
        Self { x, y, d }
    }

    fn contains(&self, v: f64) -> bool {
        v >= self.x[0] && v <= self.x[self.x.len() - 1]
    }

    fn eval(&self, v: f64) -> f64 {
        let i = match self.x.binary_search_by(|p| p.total_cmp(&v)) {
            Ok(i) => return self.y[i],
            Err(i) => i.clamp(1, self.x.len() - 1) - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let t = (v - self.x[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }
}

fn end_slope(h0: f64, h1: f64, s0: f64, s1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if d.signum() != s0.signum() {
        0.0
    } else if s0.signum() != s1.signum() && d.abs() > 3.0 * s0.abs() {
        3.0 * s0
    } else {
        d
    }
}

/// Lookup table for `α_{n,θ}` and its inverse at a fixed dimension and
/// parameter value.
#[derive(Debug, Clone)]
pub struct AlphaTable {
    dim: usize,
    base: Dist1D,
    target: RadialLaw,
    forward: Pchip,
    backward: Pchip,
}

impl AlphaTable {
    pub fn build(layer: &EllipticalLayer, dim: usize) -> Result<Self> {
        let (base, target) = layer
            .laws(dim)?
            .ok_or_else(|| TpError::Validation("identity radial layers need no table".into()))?;
        let lo = base.quantile(1e-10)?.ln();
        let hi = base.isf(1e-10)?.ln();
        let mut lr = Vec::with_capacity(GRID_POINTS);
        let mut la = Vec::with_capacity(GRID_POINTS);
        for i in 0..GRID_POINTS {
            let l = lo + (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64;
            let a = alpha_with(&base, &target, l.exp())?;
            lr.push(l);
            la.push(a.ln());
        }
        let forward = Pchip::new(lr.clone(), la.clone());
        let backward = Pchip::new(la, lr);
        Ok(Self { dim, base, target, forward, backward })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self, r: f64) -> Result<f64> {
        if r <= 0.0 {
            return Ok(0.0);
        }
        let l = r.ln();
        if self.forward.contains(l) {
            Ok(self.forward.eval(l).exp())
        } else {
            alpha_with(&self.base, &self.target, r)
        }
    }

    pub fn alpha_inv(&self, rho: f64) -> Result<f64> {
        if rho <= 0.0 {
            return Ok(0.0);
        }
        let l = rho.ln();
        if self.backward.contains(l) {
            Ok(self.backward.eval(l).exp())
        } else {
            alpha_inv_with(&self.base, &self.target, rho)
        }
    }

    /// Inverse radial map and its log-determinant using the table.
    pub fn inverse_with_logdet(&self, y: &[f64]) -> Result<(Vec<f64>, f64)> {
        if y.len() != self.dim {
            return Err(TpError::DimensionMismatch { expected: self.dim, got: y.len() });
        }
        let rho = super::elliptical::norm2(y);
        if rho == 0.0 {
            return Err(TpError::Domain("radial log-determinant is singular at the origin".into()));
        }
        let b = self.alpha_inv(rho)?;
        let h = 1e-5 * (1.0 + b);
        let lo = (b - h).max(0.0);
        let d = (self.alpha(b + h)? - self.alpha(lo)?) / (b + h - lo);
        if !(d > 0.0) {
            return Err(TpError::Numerical("tabulated radial derivative is not positive".into()));
        }
        let ld = (self.dim as f64 - 1.0) * (b / rho).ln() - d.ln();
        Ok((y.iter().map(|v| v * (b / rho)).collect(), ld))
    }
}
