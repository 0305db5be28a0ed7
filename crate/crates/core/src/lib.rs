#![no_std]
//! Numerical core for transport-map stochastic processes.

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cov_layer;
pub mod error;
pub mod kernels;
pub mod metrics;
pub mod params;
pub mod probcore;
pub mod radial_layer;
pub mod stack;
pub mod trainer;
pub mod warpings;

pub use error::{Result, TpError};
