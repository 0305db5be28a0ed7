//! Paired-split comparison of a warped GP against a warped Student-t process.

use crate::data::Series;
use crate::error::{CliError, CliResult};
use crate::fit_parallel;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use tp_core::cov_layer::CovarianceLayer;
use tp_core::kernels::{Kernel, SmComponent};
use tp_core::metrics::{evaluate, mean_sd, Metrics};
use tp_core::probcore::SplitRng;
use tp_core::radial_layer::EllipticalLayer;
use tp_core::stack::{CopulaLayer, LayerStack};
use tp_core::trainer::TrainConfig;
use tp_core::warpings::{Location, MarginalLayer, Scale, Warping};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Wgp,
    Tgp,
}

impl ModelKind {
    pub fn parse_list(s: &str) -> CliResult<Vec<ModelKind>> {
        s.split(',')
            .map(|m| match m.trim() {
                "wgp" => Ok(ModelKind::Wgp),
                "tgp" => Ok(ModelKind::Tgp),
                other => Err(CliError::Validation(format!("unknown model `{other}` (wgp, tgp)"))),
            })
            .collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Wgp => "wgp",
            ModelKind::Tgp => "tgp",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub models: Vec<ModelKind>,
    pub splits: usize,
    pub train_frac: f64,
    pub samples: usize,
    pub seed: u64,
    pub train: TrainConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            models: vec![ModelKind::Wgp, ModelKind::Tgp],
            splits: 10,
            train_frac: 0.15,
            samples: 200,
            seed: 0,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub split: usize,
    pub n_train: usize,
    pub n_valid: usize,
    pub wgp: Metrics,
    pub tgp: Metrics,
    pub wgp_nll: f64,
    /// TGP NLL at the warm start (WGP parameters, Gaussian copula).
    pub tgp_initial_nll: f64,
    pub tgp_nll: f64,
    pub tgp_nu_inv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub model: ModelKind,
    pub mae: (f64, f64),
    pub eae: (f64, f64),
    pub mse: (f64, f64),
    pub ese: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub models: Vec<ModelKind>,
    pub splits: Vec<SplitResult>,
    pub summary: Vec<Summary>,
    /// Splits where the TGP mean ESE is at most the WGP one.
    pub tgp_ese_wins: usize,
    pub seed: u64,
}

/// Sorted train and validation indices of split `k`.
pub fn split_indices(n: usize, train_frac: f64, seed: u64, k: usize) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = SplitRng::new(seed).split(k as u64);
    idx.shuffle(&mut rng);
    let m = ((train_frac * n as f64).round() as usize).clamp(2, n.saturating_sub(1).max(2));
    let mut train = idx[..m].to_vec();
    let mut valid = idx[m..].to_vec();
    train.sort_unstable();
    valid.sort_unstable();
    (train, valid)
}

/// Frequency with the largest Lomb–Scargle power on a grid up to the
/// pseudo-Nyquist frequency of the sample.
pub fn dominant_frequency(t: &[f64], x: &[f64]) -> f64 {
    let n = t.len() as f64;
    let span = t.iter().cloned().fold(f64::MIN, f64::max) - t.iter().cloned().fold(f64::MAX, f64::min);
    if !(span > 0.0) {
        return 1.0;
    }
    let mean = x.iter().sum::<f64>() / n;
    let f_lo = 1.0 / span;
    let f_hi = 0.5 * n / span;
    let grid = 2000;
    let mut best = (f64::MIN, f_lo);
    for i in 0..grid {
        let f = f_lo + (f_hi - f_lo) * i as f64 / (grid - 1) as f64;
        let w = 2.0 * PI * f;
        let (s2, c2) = t.iter().fold((0.0, 0.0), |(s, c), &ti| (s + (2.0 * w * ti).sin(), c + (2.0 * w * ti).cos()));
        let tau = s2.atan2(c2) / (2.0 * w);
        let (mut cc, mut ss, mut yc, mut ys) = (0.0, 0.0, 0.0, 0.0);
        for (&ti, &xi) in t.iter().zip(x) {
            let a = w * (ti - tau);
            let (s, c) = a.sin_cos();
            cc += c * c;
            ss += s * s;
            yc += (xi - mean) * c;
            ys += (xi - mean) * s;
        }
        let p = yc * yc / cc.max(1e-300) + ys * ys / ss.max(1e-300);
        if p > best.0 {
            best = (p, f);
        }
    }
    best.1
}

/// Warped GP with a two-component spectral-mixture kernel plus noise and a
/// shifted Box–Cox warping, initialized from the training data.
pub fn wgp_stack(train: &Series) -> LayerStack {
    let ymin = train.y.iter().cloned().fold(f64::MAX, f64::min);
    let ymax = train.y.iter().cloned().fold(f64::MIN, f64::max);
    let c = (-ymin).max(0.0) + 0.05 * (ymax - ymin).max(1e-3);
    let lambda = 0.5;
    let warping = Warping::BoxCoxShifted { lambda, c };
    let x: Vec<f64> = train.y.iter().map(|&y| warping.phi(y).expect("box-cox is total")).collect();
    let (m, sd) = mean_sd(&x);
    let sd = if sd > 0.0 { sd } else { 1.0 };
    let span = train.t.iter().cloned().fold(f64::MIN, f64::max) - train.t.iter().cloned().fold(f64::MAX, f64::min);
    let span = if span > 0.0 { span } else { 1.0 };
    let z: Vec<f64> = x.iter().map(|v| (v - m) / sd).collect();
    let f1 = dominant_frequency(&train.t, &z);
    let len1 = 3.0 / f1;
    let len2 = span / 5.0;
    let bw = |l: f64| 1.0 / (2.0 * PI * l).powi(2);
    let kernel = Kernel::sum(vec![
        Kernel::spectral_mixture(vec![
            SmComponent { weight: 0.6f64.sqrt(), mean: f1, variance: bw(len1) },
            SmComponent { weight: 0.3f64.sqrt(), mean: 0.0, variance: bw(len2) },
        ]),
        Kernel::white_noise(0.1f64.sqrt()),
    ]);
    LayerStack::new(
        None,
        Some(CovarianceLayer::exact(kernel)),
        vec![MarginalLayer::new(warping, Location::Constant { m }, Scale::Constant { sigma: sd })],
    )
}

/// The TGP warm start: a fitted WGP with a Student-t copula at `nu_inv = 0`.
pub fn warm_start_tgp(wgp: &LayerStack) -> LayerStack {
    let mut s = wgp.clone();
    s.copula = Some(CopulaLayer::elliptical(EllipticalLayer::student_t(0.0)));
    s
}

fn nu_inv(stack: &LayerStack) -> f64 {
    match stack.copula {
        Some(CopulaLayer::Elliptical { mixing: tp_core::radial_layer::EllipticalMixing::StudentT { nu_inv } }) => nu_inv,
        _ => 0.0,
    }
}

pub fn run_split(series: &Series, cfg: &BenchConfig, k: usize) -> CliResult<SplitResult> {
    let (ti, vi) = split_indices(series.len(), cfg.train_frac, cfg.seed, k);
    let train = series.select(&ti);
    let valid = series.select(&vi);
    let mut tcfg = cfg.train.clone();
    tcfg.seed = cfg.seed.wrapping_add(k as u64);
    tcfg.batch_size = tcfg.batch_size.min(train.len());
    let wgp = fit_parallel(&wgp_stack(&train), &train.t, &train.y, &tcfg)?;
    let tgp_init = warm_start_tgp(&wgp.stack);
    let tgp_initial_nll = tgp_init.nll_value(&train.t, &train.y)?;
    let tgp = fit_parallel(&tgp_init, &train.t, &train.y, &tcfg)?;
    let rng = SplitRng::new(cfg.seed).split(10_000 + k as u64);
    let score = |stack: &LayerStack| -> CliResult<Metrics> {
        let set = stack.posterior_sample(&train.t, &train.y, &valid.t, cfg.samples, &rng)?;
        Ok(evaluate(&valid.y, &set.samples)?)
    };
    Ok(SplitResult {
        split: k,
        n_train: train.len(),
        n_valid: valid.len(),
        wgp: score(&wgp.stack)?,
        tgp: score(&tgp.stack)?,
        wgp_nll: wgp.report.final_nll,
        tgp_initial_nll,
        tgp_nll: tgp.report.final_nll,
        tgp_nu_inv: nu_inv(&tgp.stack),
    })
}

pub fn run_benchmark(series: &Series, cfg: &BenchConfig) -> CliResult<BenchReport> {
    if cfg.splits == 0 || cfg.samples == 0 {
        return Err(CliError::Validation("splits and samples must be positive".into()));
    }
    if !(cfg.train_frac > 0.0 && cfg.train_frac < 1.0) {
        return Err(CliError::Validation("train fraction must lie in (0, 1)".into()));
    }
    if series.len() < 4 {
        return Err(CliError::Validation("benchmark needs at least four observations".into()));
    }
    let splits: Vec<SplitResult> = (0..cfg.splits)
        .into_par_iter()
        .map(|k| run_split(series, cfg, k))
        .collect::<CliResult<_>>()?;
    let summary = cfg
        .models
        .iter()
        .map(|&model| {
            let pick = |f: fn(&Metrics) -> f64| {
                let v: Vec<f64> = splits
                    .iter()
                    .map(|s| f(if model == ModelKind::Wgp { &s.wgp } else { &s.tgp }))
                    .collect();
                mean_sd(&v)
            };
            Summary { model, mae: pick(|m| m.mae), eae: pick(|m| m.eae), mse: pick(|m| m.mse), ese: pick(|m| m.ese) }
        })
        .collect();
    let tgp_ese_wins = splits.iter().filter(|s| s.tgp.ese <= s.wgp.ese).count();
    Ok(BenchReport { models: cfg.models.clone(), splits, summary, tgp_ese_wins, seed: cfg.seed })
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("split,model,mae,eae,mse,ese,nll\n");
        for r in &self.splits {
            for &m in &self.models {
                let (x, nll) = match m {
                    ModelKind::Wgp => (&r.wgp, r.wgp_nll),
                    ModelKind::Tgp => (&r.tgp, r.tgp_nll),
                };
                s.push_str(&format!("{},{},{},{},{},{},{}\n", r.split, m.name(), x.mae, x.eae, x.mse, x.ese, nll));
            }
        }
        s
    }

    pub fn to_table(&self) -> String {
        let mut s = format!("{:<6}", "index");
        for m in &self.summary {
            s.push_str(&format!("{:>28}", m.model.name()));
        }
        s.push('\n');
        let rows: [(&str, fn(&Summary) -> (f64, f64)); 4] =
            [("MAE", |m| m.mae), ("EAE", |m| m.eae), ("MSE", |m| m.mse), ("ESE", |m| m.ese)];
        for (name, f) in rows {
            s.push_str(&format!("{name:<6}"));
            for m in &self.summary {
                let (a, b) = f(m);
                s.push_str(&format!("{:>28}", format!("{a:.3} ± {b:.3}")));
            }
            s.push('\n');
        }
        s.push_str(&format!("TGP ESE <= WGP ESE in {}/{} splits\n", self.tgp_ese_wins, self.splits.len()));
        s
    }
}
