//! Tail-dependence report: closed form where known plus rank-based
//! estimates from simulated or supplied pairs.

use crate::error::{CliError, CliResult};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tp_core::probcore::{Dist1D, MixingDensity, SplitRng};
use tp_core::radial_layer::{empirical_tail_dependence, tail_dependence, CopulaKind, EllipticalMixing, Generator, TailCoefficients};
use tp_core::stack::{CopulaLayer, LayerStack};

pub const LEVELS: [f64; 3] = [0.01, 0.005, 0.001];
const CHUNK: usize = 16_384;

/// Bivariate copula under study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PairCopula {
    Gaussian { rho: f64 },
    StudentT { theta: f64, rho: f64 },
    /// Elliptical with a general radial mixing; no closed form.
    Elliptical { mixing: MixingDensity, rho: f64 },
    Archimedean { generator: Generator },
}

impl PairCopula {
    pub fn closed_form(&self) -> CliResult<Option<TailCoefficients>> {
        let kind = match *self {
            PairCopula::Gaussian { rho } => CopulaKind::Gaussian { rho },
            PairCopula::StudentT { theta, rho } => CopulaKind::StudentT { theta, rho },
            PairCopula::Archimedean { generator } => CopulaKind::Archimedean { generator },
            PairCopula::Elliptical { .. } => return Ok(None),
        };
        Ok(Some(tail_dependence(&kind)?))
    }

    fn rho(&self) -> f64 {
        match *self {
            PairCopula::Gaussian { rho } | PairCopula::StudentT { rho, .. } | PairCopula::Elliptical { rho, .. } => rho,
            PairCopula::Archimedean { .. } => 0.0,
        }
    }

    fn validate(&self) -> CliResult<()> {
        if !(-1.0..=1.0).contains(&self.rho()) {
            return Err(CliError::Validation("rho must lie in [-1, 1]".into()));
        }
        match *self {
            PairCopula::StudentT { theta, .. } if !(theta > 0.0) => {
                Err(CliError::Validation("theta must be positive".into()))
            }
            PairCopula::Elliptical { mixing, .. } => Ok(mixing.validate()?),
            PairCopula::Archimedean { generator } => Ok(generator.validate()?),
            _ => Ok(()),
        }
    }

    /// Draws `n` pairs; chunk `c` uses substream `rng.split(c)`.
    pub fn simulate(&self, n: usize, seed: u64) -> CliResult<(Vec<f64>, Vec<f64>)> {
        self.validate()?;
        let root = SplitRng::new(seed);
        let chunks: Vec<(Vec<f64>, Vec<f64>)> = (0..n.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut r = root.split(c as u64);
                let m = CHUNK.min(n - c * CHUNK);
                let mut a = Vec::with_capacity(m);
                let mut b = Vec::with_capacity(m);
                for _ in 0..m {
                    let (x, y) = self.draw(&mut r);
                    a.push(x);
                    b.push(y);
                }
                (a, b)
            })
            .collect();
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for (x, y) in chunks {
            a.extend(x);
            b.extend(y);
        }
        Ok((a, b))
    }

    fn draw(&self, r: &mut SplitRng) -> (f64, f64) {
        let normal = Dist1D::std_normal();
        let gaussian_pair = |r: &mut SplitRng, rho: f64| {
            let z1 = normal.sample(r);
            let z2 = normal.sample(r);
            (z1, rho * z1 + (1.0 - rho * rho).max(0.0).sqrt() * z2)
        };
        match *self {
            PairCopula::Gaussian { rho } => gaussian_pair(r, rho),
            PairCopula::StudentT { theta, rho } => {
                let (x, y) = gaussian_pair(r, rho);
                let s = MixingDensity::student(theta).sample(r);
                (s * x, s * y)
            }
            PairCopula::Elliptical { mixing, rho } => {
                let (x, y) = gaussian_pair(r, rho);
                let s = mixing.sample(r);
                (s * x, s * y)
            }
            PairCopula::Archimedean { generator } => {
                // E_i / W with W the mixing variable of the generator
                let w = match generator {
                    Generator::Independence => 1.0,
                    Generator::Clayton { theta } => Dist1D::gamma(1.0 / theta, 1.0).expect("validated").sample(r),
                };
                let e = Dist1D::exponential(1.0).expect("unit rate");
                (e.sample(r) / w, e.sample(r) / w)
            }
        }
    }
}

/// The pair copula of a fitted stack between inputs `t1` and `t2`.
pub fn from_stack(stack: &LayerStack, t1: f64, t2: f64) -> CliResult<PairCopula> {
    let rho = match &stack.covariance {
        Some(c) => {
            let k = &c.kernel;
            let v = (k.eval(t1, t1, false) * k.eval(t2, t2, false)).sqrt();
            if !(v > 0.0) {
                return Err(CliError::Numerical("kernel variance vanishes at the chosen inputs".into()));
            }
            (k.eval(t1, t2, false) / v).clamp(-1.0, 1.0)
        }
        None => 0.0,
    };
    Ok(match &stack.copula {
        None => PairCopula::Gaussian { rho },
        Some(CopulaLayer::Elliptical { mixing }) => match *mixing {
            EllipticalMixing::GaussianIdentity => PairCopula::Gaussian { rho },
            EllipticalMixing::StudentT { nu_inv } if nu_inv < tp_core::radial_layer::NU_INV_GAUSSIAN => {
                PairCopula::Gaussian { rho }
            }
            EllipticalMixing::StudentT { nu_inv } => PairCopula::StudentT { theta: 1.0 / nu_inv, rho },
            EllipticalMixing::General { mixing } => PairCopula::Elliptical { mixing, rho },
        },
        Some(CopulaLayer::Archimedean { generator }) => PairCopula::Archimedean { generator: *generator },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalTail {
    pub q: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnoseReport {
    pub copula: Option<PairCopula>,
    pub closed_form: Option<TailCoefficients>,
    pub pairs: usize,
    pub empirical: Vec<EmpiricalTail>,
}

pub fn empirical(a: &[f64], b: &[f64]) -> Vec<EmpiricalTail> {
    LEVELS
        .iter()
        .map(|&q| {
            let c = empirical_tail_dependence(a, b, q);
            EmpiricalTail { q, lower: c.lower, upper: c.upper }
        })
        .collect()
}

pub fn diagnose(copula: Option<PairCopula>, pairs: Option<(Vec<f64>, Vec<f64>)>, n_pairs: usize, seed: u64) -> CliResult<DiagnoseReport> {
    let closed_form = match &copula {
        Some(c) => c.closed_form()?,
        None => None,
    };
    let (a, b) = match (pairs, &copula) {
        (Some(p), _) => p,
        (None, Some(c)) => c.simulate(n_pairs, seed)?,
        (None, None) => return Err(CliError::Validation("diagnose needs a copula or a pairs file".into())),
    };
    if a.len() < 2 {
        return Err(CliError::Validation("need at least two pairs".into()));
    }
    Ok(DiagnoseReport { copula, closed_form, pairs: a.len(), empirical: empirical(&a, &b) })
}

/// Reads two numeric columns (any header).
pub fn read_pairs(path: &std::path::Path) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut a = Vec::new();
    let mut b = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() < 2 {
            return Err(CliError::Parse(format!("{}: line {line}: expected two columns", path.display())));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Parse(format!("{}: line {line}: `{s}` is not a finite number", path.display())))
        };
        a.push(parse(&rec[0])?);
        b.push(parse(&rec[1])?);
    }
    Ok((a, b))
}

impl DiagnoseReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if let Some(c) = &self.copula {
            s.push_str(&format!("copula: {}\n", serde_json::to_string(c).unwrap_or_default()));
        }
        match &self.closed_form {
            Some(c) => s.push_str(&format!("closed form: lower = {:.6}, upper = {:.6}\n", c.lower, c.upper)),
            None => s.push_str("closed form: not available\n"),
        }
        s.push_str(&format!("empirical from {} pairs:\n", self.pairs));
        for e in &self.empirical {
            s.push_str(&format!("  q = {:<6} lower = {:.6}  upper = {:.6}\n", e.q, e.lower, e.upper));
        }
        s
    }
}
