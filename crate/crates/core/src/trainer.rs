//! Parameter-space management and NLL minimization by minibatch iRprop⁻ with
//! finite-difference gradients, followed by full-data polish iterations.

use crate::cov_layer::CovarianceLayer;
use crate::error::{Result, TpError};
use crate::params::{Parameterized, Transform};
use crate::probcore::{Dist1D, SplitRng};
use crate::stack::LayerStack;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Flat unconstrained coordinates for every trainable parameter of a stack.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpace {
    pub names: Vec<String>,
    pub transforms: Vec<Transform>,
}

impl ParamSpace {
    /// The space of `stack` and its current position in it.
    pub fn from_stack(stack: &LayerStack) -> (Self, Vec<f64>) {
        let params = stack.params();
        let u = params.iter().map(|p| p.transform.to_unconstrained(p.value)).collect();
        let space = Self {
            names: params.iter().map(|p| p.name.clone()).collect(),
            transforms: params.iter().map(|p| p.transform).collect(),
        };
        (space, u)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn to_constrained(&self, u: &[f64]) -> Vec<f64> {
        self.transforms.iter().zip(u).map(|(t, &v)| t.to_constrained(v)).collect()
    }

    pub fn to_unconstrained(&self, v: &[f64]) -> Vec<f64> {
        self.transforms.iter().zip(v).map(|(t, &x)| t.to_unconstrained(x)).collect()
    }

    /// Projects coordinates with bounded unconstrained range back into it.
    pub fn project(&self, u: &mut [f64]) {
        for (t, v) in self.transforms.iter().zip(u.iter_mut()) {
            if let Some((lo, hi)) = t.unconstrained_bounds() {
                *v = v.clamp(lo, hi);
            }
        }
    }

    /// A copy of `stack` carrying the parameters at `u`.
    pub fn apply(&self, stack: &LayerStack, u: &[f64]) -> Result<LayerStack> {
        if u.len() != self.len() {
            return Err(TpError::DimensionMismatch { expected: self.len(), got: u.len() });
        }
        let v = self.to_constrained(u);
        for ((name, t), x) in self.names.iter().zip(&self.transforms).zip(&v) {
            if !t.admits(*x) {
                return Err(TpError::Numerical(format!("parameter {name} left its domain: {x}")));
            }
        }
        let mut out = stack.clone();
        out.assign_params(&v);
        Ok(out)
    }
}

fn default_iterations() -> usize {
    200
}
fn default_batch() -> usize {
    32
}
fn default_eta_minus() -> f64 {
    0.5
}
fn default_eta_plus() -> f64 {
    1.2
}
fn default_step_min() -> f64 {
    1e-6
}
fn default_step_max() -> f64 {
    1.0
}
fn default_step_init() -> f64 {
    0.05
}
fn default_fd_step() -> f64 {
    1e-5
}
fn default_polish() -> usize {
    100
}
fn default_restarts() -> usize {
    4
}
fn default_restart_scale() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_eta_minus")]
    pub eta_minus: f64,
    #[serde(default = "default_eta_plus")]
    pub eta_plus: f64,
    #[serde(default = "default_step_min")]
    pub step_min: f64,
    #[serde(default = "default_step_max")]
    pub step_max: f64,
    #[serde(default = "default_step_init")]
    pub step_init: f64,
    /// Relative finite-difference step.
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    #[serde(default = "default_polish")]
    pub polish_iterations: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    /// Spread of restart starting points on the unconstrained axis.
    #[serde(default = "default_restart_scale")]
    pub restart_scale: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            iterations: default_iterations(),
            batch_size: default_batch(),
            eta_minus: default_eta_minus(),
            eta_plus: default_eta_plus(),
            step_min: default_step_min(),
            step_max: default_step_max(),
            step_init: default_step_init(),
            fd_step: default_fd_step(),
            polish_iterations: default_polish(),
            restarts: default_restarts(),
            restart_scale: default_restart_scale(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        let positive = [
            ("eta_plus", self.eta_plus - 1.0),
            ("eta_minus", self.eta_minus),
            ("step_min", self.step_min),
            ("step_max", self.step_max - self.step_min),
            ("step_init", self.step_init),
            ("fd_step", self.fd_step),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(TpError::Validation(format!("train.{name} is out of range")));
            }
        }
        if self.eta_minus >= 1.0 {
            return Err(TpError::Validation("train.eta_minus must be below 1".into()));
        }
        if self.restarts == 0 {
            return Err(TpError::Validation("train.restarts must be at least 1".into()));
        }
        if self.batch_size == 0 || self.batch_size > n {
            return Err(TpError::Validation(format!(
                "train.batch_size must lie in [1, {n}], got {}",
                self.batch_size
            )));
        }
        Ok(())
    }
}

/// Outcome of one restart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub restart: usize,
    pub initial_nll: f64,
    pub final_nll: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub flagged_gradients: usize,
    pub jitter_events: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub final_nll: f64,
    pub initial_nll: f64,
    /// Full-data NLL at the start and after every iteration of the winning restart.
    pub trace: Vec<f64>,
    pub param_names: Vec<String>,
    /// Constrained values.
    pub params: Vec<f64>,
    pub seed: u64,
    pub wall_time_s: f64,
    pub jitter_events: usize,
    pub best_restart: usize,
    pub restarts: Vec<RestartSummary>,
}

/// Best point found by one restart.
#[derive(Debug, Clone)]
pub struct RestartResult {
    pub summary: RestartSummary,
    pub trace: Vec<f64>,
    pub u: Vec<f64>,
}

pub struct FitOutcome {
    pub stack: LayerStack,
    pub report: FitReport,
}

/// Central-difference gradient with per-coordinate flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub grad: Vec<f64>,
    /// Coordinates where both probes were infinite; their entry is zero.
    pub flagged: Vec<usize>,
}

/// Central differences with step `rel·(1+|p_i|)`, one-sided where one probe is
/// infinite.
pub fn finite_diff_grad<F>(f: F, p: &[f64], f0: f64, rel: f64) -> Gradient
where
    F: Fn(&[f64]) -> f64,
{
    let mut x = p.to_vec();
    let mut grad = Vec::with_capacity(p.len());
    let mut flagged = Vec::new();
    for i in 0..p.len() {
        let h = rel * (1.0 + p[i].abs());
        x[i] = p[i] + h;
        let up = f(&x);
        x[i] = p[i] - h;
        let down = f(&x);
        x[i] = p[i];
        let g = match (up.is_finite(), down.is_finite()) {
            (true, true) => (up - down) / (2.0 * h),
            (true, false) => (up - f0) / h,
            (false, true) => (f0 - down) / h,
            (false, false) => {
                flagged.push(i);
                0.0
            }
        };
        grad.push(g);
    }
    Gradient { grad, flagged }
}

/// Index subsets for `iterations` steps: each epoch is a fresh permutation cut
/// into batches of size `batch`; a short final batch is filled up with
/// distinct indices drawn from the rest of the epoch.
pub fn minibatch_indices<R: Rng + ?Sized>(n: usize, batch: usize, iterations: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let batch = batch.clamp(1, n.max(1));
    let mut out = Vec::with_capacity(iterations);
    let mut perm: Vec<usize> = (0..n).collect();
    while out.len() < iterations {
        perm.shuffle(rng);
        let mut start = 0;
        while start < n && out.len() < iterations {
            let end = (start + batch).min(n);
            let mut b: Vec<usize> = perm[start..end].to_vec();
            if b.len() < batch {
                let mut rest: Vec<usize> = perm[..start].to_vec();
                rest.shuffle(rng);
                b.extend(rest.into_iter().take(batch - b.len()));
            }
            b.sort_unstable();
            out.push(b);
            start = end;
        }
    }
    out
}

struct Objective<'a> {
    stack: &'a LayerStack,
    space: &'a ParamSpace,
    t: &'a [f64],
    y: &'a [f64],
}

impl Objective<'_> {
    /// NLL at `u` on the rows in `idx` (all rows when `None`), with jitter.
    fn eval(&self, u: &[f64], idx: Option<&[usize]>) -> (f64, f64) {
        let Ok(s) = self.space.apply(self.stack, u) else {
            return (f64::INFINITY, 0.0);
        };
        let r = match idx {
            None => s.nll(self.t, self.y),
            Some(idx) => {
                let tb: Vec<f64> = idx.iter().map(|&i| self.t[i]).collect();
                let yb: Vec<f64> = idx.iter().map(|&i| self.y[i]).collect();
                s.nll(&tb, &yb)
            }
        };
        match r {
            Ok(e) => (e.value, e.jitter),
            Err(_) => (f64::INFINITY, 0.0),
        }
    }
}

struct Rprop<'c> {
    cfg: &'c TrainConfig,
    step: Vec<f64>,
    prev: Vec<f64>,
}

impl<'c> Rprop<'c> {
    fn new(cfg: &'c TrainConfig, dim: usize) -> Self {
        Self { cfg, step: alloc::vec![cfg.step_init; dim], prev: alloc::vec![0.0; dim] }
    }

    /// iRprop⁻ update direction; adapts the step sizes in place.
    fn propose(&mut self, u: &[f64], g: &[f64]) -> Vec<f64> {
        let mut next = u.to_vec();
        for i in 0..u.len() {
            let mut gi = g[i];
            let s = gi * self.prev[i];
            if s > 0.0 {
                self.step[i] = (self.step[i] * self.cfg.eta_plus).min(self.cfg.step_max);
            } else if s < 0.0 {
                self.step[i] = (self.step[i] * self.cfg.eta_minus).max(self.cfg.step_min);
                gi = 0.0;
            }
            self.prev[i] = gi;
            if gi > 0.0 {
                next[i] -= self.step[i];
            } else if gi < 0.0 {
                next[i] += self.step[i];
            }
        }
        next
    }

    fn shrink(&mut self) {
        for (s, p) in self.step.iter_mut().zip(self.prev.iter_mut()) {
            *s = (*s * self.cfg.eta_minus).max(self.cfg.step_min);
            *p = 0.0;
        }
    }
}

/// Starting point of restart `r`: the stack's own parameters for `r = 0`,
/// a random perturbation of them otherwise.
pub fn restart_start(space: &ParamSpace, u0: &[f64], cfg: &TrainConfig, r: usize) -> Vec<f64> {
    if r == 0 {
        return u0.to_vec();
    }
    let mut rng = SplitRng::new(cfg.seed).split(1_000 + r as u64);
    let normal = Dist1D::std_normal();
    let mut u: Vec<f64> = u0.to_vec();
    for (v, t) in u.iter_mut().zip(&space.transforms) {
        match t.unconstrained_bounds() {
            Some((lo, hi)) => *v = lo + (hi - lo) * rng.random::<f64>(),
            None => *v += cfg.restart_scale * (1.0 + v.abs()) * normal.sample(&mut rng),
        }
    }
    u
}

/// Runs restart `r`. Independent restarts may run concurrently; combine
/// them with [`select_best`].
pub fn fit_restart(stack: &LayerStack, t: &[f64], y: &[f64], cfg: &TrainConfig, r: usize) -> Result<RestartResult> {
    let (space, u0) = ParamSpace::from_stack(stack);
    let obj = Objective { stack, space: &space, t, y };
    let mut u = restart_start(&space, &u0, cfg, r);
    space.project(&mut u);
    let (mut full, jit) = obj.eval(&u, None);
    let mut jitter_events = usize::from(jit > 0.0);
    if !full.is_finite() && r > 0 {
        // fall back to the supplied parameters
        u = u0.clone();
        (full, _) = obj.eval(&u, None);
    }
    if !full.is_finite() {
        return Err(TpError::FitFailure {
            reason: "initial parameters give an infinite NLL".into(),
            last_valid: space.to_constrained(&u),
        });
    }
    let initial = full;
    let mut trace = alloc::vec![full];
    let mut best = (full, u.clone());
    let mut accepted = 0;
    let mut rejected = 0;
    let mut flagged = 0;

    let mut rng = SplitRng::new(cfg.seed).split(r as u64);
    let batches = minibatch_indices(t.len(), cfg.batch_size, cfg.iterations, &mut rng);
    let mut opt = Rprop::new(cfg, space.len());
    for idx in &batches {
        let idx = if idx.len() == t.len() { None } else { Some(idx.as_slice()) };
        let before = u.clone();
        let (f0, _) = obj.eval(&u, idx);
        if f0.is_finite() {
            let g = finite_diff_grad(|p| obj.eval(p, idx).0, &u, f0, cfg.fd_step);
            flagged += g.flagged.len();
            let mut cand = opt.propose(&u, &g.grad);
            space.project(&mut cand);
            let mut tries = 0;
            loop {
                let (fc, _) = obj.eval(&cand, idx);
                if fc.is_finite() {
                    u = cand;
                    accepted += 1;
                    break;
                }
                rejected += 1;
                tries += 1;
                if tries >= 8 {
                    break;
                }
                // pull the candidate halfway back toward the current point
                for (c, v) in cand.iter_mut().zip(&u) {
                    *c = 0.5 * (*c + v);
                }
                opt.shrink();
            }
        }
        let (mut f, jit) = obj.eval(&u, None);
        jitter_events += usize::from(jit > 0.0);
        if !f.is_finite() {
            // a batch step that breaks the full data is undone
            u = before;
            f = *trace.last().expect("trace starts with the initial value");
            rejected += 1;
        }
        trace.push(f);
        if f < best.0 {
            best = (f, u.clone());
        }
    }

    // polish on the full data from the best point seen, accepting only descents
    u = best.1.clone();
    full = best.0;
    let mut opt = Rprop::new(cfg, space.len());
    for _ in 0..cfg.polish_iterations {
        let g = finite_diff_grad(|p| obj.eval(p, None).0, &u, full, cfg.fd_step);
        flagged += g.flagged.len();
        let mut cand = opt.propose(&u, &g.grad);
        space.project(&mut cand);
        let (fc, jit) = obj.eval(&cand, None);
        jitter_events += usize::from(jit > 0.0);
        if fc <= full {
            u = cand;
            full = fc;
            accepted += 1;
        } else {
            rejected += 1;
            opt.shrink();
        }
        trace.push(full);
    }
    if full < best.0 {
        best = (full, u.clone());
    }
    if accepted == 0 && rejected > 0 {
        return Err(TpError::FitFailure {
            reason: format!("all {rejected} candidate steps were rejected"),
            last_valid: space.to_constrained(&best.1),
        });
    }
    Ok(RestartResult {
        summary: RestartSummary {
            restart: r,
            initial_nll: initial,
            final_nll: best.0,
            accepted_steps: accepted,
            rejected_steps: rejected,
            flagged_gradients: flagged,
            jitter_events,
        },
        trace,
        u: best.1,
    })
}

/// Number of restarts actually run; without iterations extra restarts are moot.
pub fn restart_count(cfg: &TrainConfig) -> usize {
    if cfg.iterations + cfg.polish_iterations == 0 {
        1
    } else {
        cfg.restarts
    }
}

/// Picks the restart with the lowest full-data NLL (earliest on ties).
pub fn select_best(stack: &LayerStack, cfg: &TrainConfig, results: Vec<Result<RestartResult>>) -> Result<FitOutcome> {
    let (space, _) = ParamSpace::from_stack(stack);
    let mut summaries = Vec::new();
    let mut best: Option<RestartResult> = None;
    let mut last_err = None;
    for r in results {
        match r {
            Ok(res) => {
                summaries.push(res.summary.clone());
                let better = best.as_ref().is_none_or(|b| res.summary.final_nll < b.summary.final_nll);
                if better {
                    best = Some(res);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let Some(best) = best else {
        return Err(last_err.unwrap_or_else(|| TpError::Validation("no restarts were run".into())));
    };
    let fitted = space.apply(stack, &best.u)?;
    fitted.validate()?;
    let report = FitReport {
        final_nll: best.summary.final_nll,
        initial_nll: summaries.first().map_or(best.summary.initial_nll, |s| s.initial_nll),
        trace: best.trace,
        param_names: space.names.clone(),
        params: space.to_constrained(&best.u),
        seed: cfg.seed,
        wall_time_s: 0.0,
        jitter_events: summaries.iter().map(|s| s.jitter_events).sum(),
        best_restart: best.summary.restart,
        restarts: summaries,
    };
    Ok(FitOutcome { stack: fitted, report })
}

/// Fits `stack` to `(t, y)`, running the restarts one after another.
pub fn fit(stack: &LayerStack, t: &[f64], y: &[f64], cfg: &TrainConfig) -> Result<FitOutcome> {
    prepare(stack, t, y, cfg)?;
    let results = (0..restart_count(cfg)).map(|r| fit_restart(stack, t, y, cfg, r)).collect();
    select_best(stack, cfg, results)
}

/// Switches the covariance layer to sparse mode with `m` pseudo-points drawn
/// uniformly without replacement from the training inputs. Pseudo-values
/// start at the observations pulled back through the marginal layers.
pub fn init_pseudo_data<R: Rng + ?Sized>(
    stack: &LayerStack,
    t: &[f64],
    y: &[f64],
    m: usize,
    rng: &mut R,
) -> Result<LayerStack> {
    if t.len() != y.len() {
        return Err(TpError::DimensionMismatch { expected: t.len(), got: y.len() });
    }
    let n = t.len();
    if m == 0 || m >= n {
        return Err(TpError::Validation(format!("pseudo-point count must lie in [1, {}], got {m}", n.saturating_sub(1))));
    }
    let Some(cov) = &stack.covariance else {
        return Err(TpError::Validation("sparse mode needs a covariance layer".into()));
    };
    let mut z = y.to_vec();
    for layer in stack.marginals.iter().rev() {
        z = layer.inverse(t, &z)?;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.partial_shuffle(rng, m);
    let mut chosen: Vec<usize> = idx[..m].to_vec();
    chosen.sort_unstable_by(|&a, &b| t[a].total_cmp(&t[b]));
    let mut out = stack.clone();
    out.covariance = Some(CovarianceLayer::sparse(
        cov.kernel.clone(),
        chosen.iter().map(|&i| t[i]).collect(),
        chosen.iter().map(|&i| z[i]).collect(),
    ));
    Ok(out)
}

/// Checks run before any restart.
pub fn prepare(stack: &LayerStack, t: &[f64], y: &[f64], cfg: &TrainConfig) -> Result<()> {
    if t.len() != y.len() {
        return Err(TpError::DimensionMismatch { expected: t.len(), got: y.len() });
    }
    if t.len() < 2 {
        return Err(TpError::Validation("fitting needs at least two observations".into()));
    }
    stack.validate_for_data(t.len())?;
    cfg.validate(t.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cov_layer::CovarianceLayer;
    use crate::kernels::Kernel;

    #[test]
    fn pseudo_data_is_a_sorted_subsample() {
        let t: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = t.iter().map(|v| v * 0.5).collect();
        let stack = LayerStack::new(None, Some(CovarianceLayer::exact(Kernel::squared_exponential(1.0, 1.0))), Vec::new());
        let sparse = init_pseudo_data(&stack, &t, &y, 4, &mut SplitRng::new(1)).unwrap();
        let Some(CovarianceLayer { mode: crate::cov_layer::CovMode::Sparse { pseudo_inputs, pseudo_values }, .. }) =
            &sparse.covariance
        else {
            panic!("expected sparse mode");
        };
        assert_eq!(pseudo_inputs.len(), 4);
        assert!(pseudo_inputs.windows(2).all(|w| w[0] < w[1]));
        for (s, z) in pseudo_inputs.iter().zip(pseudo_values) {
            assert_eq!(*z, 0.5 * s);
        }
        assert!(init_pseudo_data(&stack, &t, &y, 10, &mut SplitRng::new(1)).is_err());
    }

    #[test]
    fn quadratic_gradient() {
        let f = |p: &[f64]| 3.0 * p[0] * p[0] + p[0] * p[1] - 2.0 * p[1];
        let p = [0.7, -1.2];
        let g = finite_diff_grad(f, &p, f(&p), 1e-5);
        assert!((g.grad[0] - (6.0 * 0.7 - 1.2)).abs() < 1e-8);
        assert!((g.grad[1] - (0.7 - 2.0)).abs() < 1e-8);
        let c = finite_diff_grad(|_| 4.0, &p, 4.0, 1e-5);
        assert_eq!(c.grad, alloc::vec![0.0, 0.0]);
    }

    #[test]
    fn one_sided_and_flagged() {
        let f = |p: &[f64]| if p[0] < 0.0 { f64::INFINITY } else { p[0] * p[0] + p[1] };
        let g = finite_diff_grad(f, &[0.0, 1.0], 1.0, 1e-5);
        assert!((g.grad[0] - 1e-5).abs() < 1e-9);
        let inf = finite_diff_grad(|p: &[f64]| if p[0] == 0.0 { 0.0 } else { f64::INFINITY }, &[0.0], 0.0, 1e-5);
        assert_eq!(inf.flagged, alloc::vec![0]);
        assert_eq!(inf.grad, alloc::vec![0.0]);
    }

    #[test]
    fn minibatch_schedule() {
        let mut a = SplitRng::new(5);
        let mut b = SplitRng::new(5);
        let s1 = minibatch_indices(10, 3, 8, &mut a);
        let s2 = minibatch_indices(10, 3, 8, &mut b);
        assert_eq!(s1, s2);
        let mut seen: Vec<usize> = s1[..4].iter().flatten().copied().collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen, (0..10).collect::<Vec<_>>());
        for batch in &s1 {
            let mut d = batch.clone();
            d.dedup();
            assert_eq!(d.len(), 3);
        }
        let full = minibatch_indices(6, 6, 2, &mut a);
        assert!(full.iter().all(|b| *b == (0..6).collect::<Vec<_>>()));
    }

    #[test]
    fn zero_iterations_keep_initial() {
        let stack = LayerStack::new(
            None,
            Some(CovarianceLayer::exact(Kernel::sum(alloc::vec![
                Kernel::squared_exponential(1.0, 1.0),
                Kernel::white_noise(0.1),
            ]))),
            Vec::new(),
        );
        let t = [0.0, 1.0, 2.0, 3.0];
        let y = [0.1, 0.5, -0.2, 0.3];
        let cfg = TrainConfig { iterations: 0, polish_iterations: 0, batch_size: 4, ..TrainConfig::default() };
        let out = fit(&stack, &t, &y, &cfg).unwrap();
        assert_eq!(out.report.trace.len(), 1);
        let before: Vec<f64> = stack.params().iter().map(|p| p.value).collect();
        for (a, b) in before.iter().zip(&out.report.params) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fit_decreases_nll_and_is_deterministic() {
        let stack = LayerStack::new(
            None,
            Some(CovarianceLayer::exact(Kernel::sum(alloc::vec![
                Kernel::squared_exponential(0.5, 3.0),
                Kernel::white_noise(0.5),
            ]))),
            Vec::new(),
        );
        let t: Vec<f64> = (0..20).map(|i| i as f64 * 0.25).collect();
        let y: Vec<f64> = t.iter().map(|x| (1.3 * x).sin()).collect();
        let cfg = TrainConfig { iterations: 30, polish_iterations: 20, batch_size: 10, restarts: 2, seed: 9, ..TrainConfig::default() };
        let a = fit(&stack, &t, &y, &cfg).unwrap();
        let b = fit(&stack, &t, &y, &cfg).unwrap();
        assert!(a.report.final_nll <= a.report.initial_nll);
        assert_eq!(a.report, b.report);
        assert_eq!(a.report.final_nll, a.stack.nll_value(&t, &y).unwrap());
    }
}
