#![allow(dead_code)]

use rand::Rng;
use tp_core::probcore::{Dist1D, SplitRng};

pub fn uniform(r: &mut SplitRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * r.random::<f64>()
}

pub fn normal(r: &mut SplitRng) -> f64 {
    Dist1D::std_normal().sample(r)
}

/// Two-sided one-sample Kolmogorov–Smirnov statistic and its asymptotic
/// p-value with the Stephens correction.
pub fn ks_test(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sample.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let mut p = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let k = k as f64;
        p += 2.0 * sign * (-2.0 * k * k * lambda * lambda).exp();
        sign = -sign;
    }
    (d, p.clamp(0.0, 1.0))
}

/// Two-sample Kolmogorov–Smirnov p-value.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    let mut p = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let k = k as f64;
        p += 2.0 * sign * (-2.0 * k * k * lambda * lambda).exp();
        sign = -sign;
    }
    p.clamp(0.0, 1.0)
}

pub fn sorted_inputs(r: &mut SplitRng, n: usize, hi: f64) -> Vec<f64> {
    let mut t: Vec<f64> = (0..n).map(|_| uniform(r, 0.0, hi)).collect();
    t.sort_by(f64::total_cmp);
    t
}
