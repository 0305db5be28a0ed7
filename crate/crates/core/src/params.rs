//! Named scalar parameters with their constraint transforms.

use alloc::string::String;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

/// Map between the unconstrained optimization axis and a parameter's
/// constrained value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Transform {
    Identity,
    /// `softplus(u)`, strictly positive.
    SoftplusPositive,
    /// `lo + (hi - lo)·logistic(u)`, strictly inside `(lo, hi)`.
    IntervalLogit { lo: f64, hi: f64 },
    /// Identity projected onto the closed box `[lo, hi]`.
    Box { lo: f64, hi: f64 },
}

impl Transform {
    pub fn to_constrained(&self, u: f64) -> f64 {
        match *self {
            Transform::Identity => u,
            Transform::SoftplusPositive => softplus(u).max(f64::MIN_POSITIVE),
            Transform::IntervalLogit { lo, hi } => lo + (hi - lo) * logistic(u),
            Transform::Box { lo, hi } => u.clamp(lo, hi),
        }
    }

    pub fn to_unconstrained(&self, v: f64) -> f64 {
        match *self {
            Transform::Identity => v,
            Transform::SoftplusPositive => softplus_inv(v),
            Transform::IntervalLogit { lo, hi } => {
                let p = (v - lo) / (hi - lo);
                p.ln() - (-p).ln_1p()
            }
            Transform::Box { lo, hi } => v.clamp(lo, hi),
        }
    }

    /// Bounds on the unconstrained axis, if any.
    pub fn unconstrained_bounds(&self) -> Option<(f64, f64)> {
        match *self {
            Transform::Box { lo, hi } => Some((lo, hi)),
            _ => None,
        }
    }

    pub fn admits(&self, v: f64) -> bool {
        if !v.is_finite() {
            return false;
        }
        match *self {
            Transform::Identity => true,
            Transform::SoftplusPositive => v > 0.0,
            Transform::IntervalLogit { lo, hi } => v > lo && v < hi,
            Transform::Box { lo, hi } => v >= lo && v <= hi,
        }
    }
}

fn softplus(u: f64) -> f64 {
    if u > 30.0 {
        u + (-u).exp()
    } else {
        u.exp().ln_1p()
    }
}

fn softplus_inv(v: f64) -> f64 {
    if v > 30.0 {
        v + (-(-v).exp()).ln_1p()
    } else {
        v.exp_m1().ln()
    }
}

fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// A named scalar parameter in constrained form.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub value: f64,
    pub transform: Transform,
}

impl Param {
    pub fn new(name: impl Into<String>, value: f64, transform: Transform) -> Self {
        Self {
            name: name.into(),
            value,
            transform,
        }
    }

    pub fn positive(name: impl Into<String>, value: f64) -> Self {
        Self::new(name, value, Transform::SoftplusPositive)
    }

    pub fn free(name: impl Into<String>, value: f64) -> Self {
        Self::new(name, value, Transform::Identity)
    }
}

/// Components that expose their trainable parameters as a flat list.
pub trait Parameterized {
    /// Appends this component's parameters, names prefixed with `prefix`.
    fn collect_params(&self, prefix: &str, out: &mut alloc::vec::Vec<Param>);

    /// Reads values in the order produced by [`Parameterized::collect_params`].
    /// Returns the number of values consumed.
    fn assign_params(&mut self, values: &[f64]) -> usize;

    fn params(&self) -> alloc::vec::Vec<Param> {
        let mut v = alloc::vec::Vec::new();
        self.collect_params("", &mut v);
        v
    }
}

pub(crate) fn join(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        String::from(name)
    } else {
        alloc::format!("{prefix}.{name}")
    }
}
