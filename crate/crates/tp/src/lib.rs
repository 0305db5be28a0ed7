//! Data handling, model files and the experiment harness behind the `tp`
//! command-line tool.

pub mod benchmark;
pub mod config;
pub mod data;
pub mod diagnose;
pub mod error;
pub mod fetch;
pub mod model;

use rayon::prelude::*;
use tp_core::stack::LayerStack;
use tp_core::trainer::{fit_restart, prepare, restart_count, select_best, FitOutcome, TrainConfig};

/// [`tp_core::trainer::fit`] with the restarts run concurrently; the result
/// is identical to the sequential one.
pub fn fit_parallel(stack: &LayerStack, t: &[f64], y: &[f64], cfg: &TrainConfig) -> tp_core::Result<FitOutcome> {
    let start = std::time::Instant::now();
    prepare(stack, t, y, cfg)?;
    let results = (0..restart_count(cfg))
        .into_par_iter()
        .map(|r| fit_restart(stack, t, y, cfg, r))
        .collect();
    let mut out = select_best(stack, cfg, results)?;
    out.report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(out)
}
