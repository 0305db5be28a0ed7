//! Deep transport process: an ordered composition
//! `[copula?] → [covariance?] → [marginal*]` over Gaussian white noise, with
//! the composite negative log-likelihood and posterior sampling.

use crate::cov_layer::CovarianceLayer;
use crate::error::{Result, TpError};
use crate::params::{join, Param, Parameterized};
use crate::probcore::special::LN_SQRT_2PI;
use crate::probcore::{Dist1D, SplitRng};
use crate::radial_layer::{ArchimedeanLayer, EllipticalLayer, EllipticalMixing};
use crate::warpings::MarginalLayer;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

/// Innermost, generally non-triangular layer acting on the white noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum CopulaLayer {
    Elliptical { mixing: EllipticalMixing },
    Archimedean { generator: crate::radial_layer::Generator },
}

impl CopulaLayer {
    pub fn elliptical(layer: EllipticalLayer) -> Self {
        CopulaLayer::Elliptical { mixing: layer.mixing }
    }

    pub fn archimedean(layer: ArchimedeanLayer) -> Self {
        CopulaLayer::Archimedean { generator: layer.generator }
    }

    fn validate(&self) -> Result<()> {
        match self {
            CopulaLayer::Elliptical { mixing } => EllipticalLayer { mixing: *mixing }.validate(),
            CopulaLayer::Archimedean { generator } => generator.validate(),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            CopulaLayer::Elliptical { .. } => "elliptical",
            CopulaLayer::Archimedean { .. } => "archimedean",
        }
    }
}

/// One layer in application order, used to build a stack from a flat list.
#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Elliptical(EllipticalLayer),
    Archimedean(ArchimedeanLayer),
    Covariance(CovarianceLayer),
    Marginal(MarginalLayer),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerStack {
    #[serde(default)]
    pub copula: Option<CopulaLayer>,
    #[serde(default)]
    pub covariance: Option<CovarianceLayer>,
    #[serde(default)]
    pub marginals: Vec<MarginalLayer>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub layers: Vec<String>,
    pub param_count: usize,
}

/// Result of a likelihood evaluation. A domain violation produces
/// `value = +∞` together with the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct NllEval {
    pub value: f64,
    pub rejection: Option<String>,
    /// Diagonal jitter added to the covariance factor, zero if none.
    pub jitter: f64,
}

impl NllEval {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// Posterior draws at prediction inputs with their provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSampleSet {
    pub tbar: Vec<f64>,
    /// One row per draw, one column per prediction input.
    pub samples: Vec<Vec<f64>>,
    pub seed: u64,
    pub model_hash: String,
}

/// Per-input empirical quantiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileTable {
    pub tbar: Vec<f64>,
    pub probs: Vec<f64>,
    pub mean: Vec<f64>,
    /// `values[i][j]` is quantile `probs[j]` at input `tbar[i]`.
    pub values: Vec<Vec<f64>>,
}

pub const MIN_QUANTILE_SAMPLES: usize = 100;

fn is_domain(e: &TpError) -> bool {
    matches!(
        e,
        TpError::Domain(_) | TpError::CoordinateDomain { .. } | TpError::InvalidParameter { .. }
    )
}

impl LayerStack {
    pub fn new(copula: Option<CopulaLayer>, covariance: Option<CovarianceLayer>, marginals: Vec<MarginalLayer>) -> Self {
        Self { copula, covariance, marginals }
    }

    /// Builds a stack from layers listed in application order, rejecting any
    /// other ordering.
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        let mut stack = LayerStack::default();
        // 0 = nothing yet, 1 = copula seen, 2 = covariance seen, 3 = marginals
        let mut stage = 0;
        for (i, layer) in layers.into_iter().enumerate() {
            match layer {
                Layer::Elliptical(l) => {
                    if stage > 0 {
                        return Err(order_error(i, "a copula layer must come first"));
                    }
                    stack.copula = Some(CopulaLayer::elliptical(l));
                    stage = 1;
                }
                Layer::Archimedean(l) => {
                    if stage > 0 {
                        return Err(order_error(i, "a copula layer must come first"));
                    }
                    stack.copula = Some(CopulaLayer::archimedean(l));
                    stage = 1;
                }
                Layer::Covariance(c) => {
                    if stage > 1 {
                        return Err(order_error(i, "the covariance layer must precede all marginal layers"));
                    }
                    stack.covariance = Some(c);
                    stage = 2;
                }
                Layer::Marginal(m) => {
                    stack.marginals.push(m);
                    stage = 3;
                }
            }
        }
        stack.validate()?;
        Ok(stack)
    }

    pub fn validate(&self) -> Result<ValidationReport> {
        let mut layers = Vec::new();
        if let Some(c) = &self.copula {
            c.validate()?;
            layers.push(String::from(c.name()));
        }
        if let Some(c) = &self.covariance {
            if matches!(self.copula, Some(CopulaLayer::Archimedean { .. })) {
                return Err(TpError::Validation(
                    "an Archimedean copula cannot be combined with a covariance layer".into(),
                ));
            }
            c.validate()?;
            layers.push(String::from(if c.is_sparse() { "covariance(sparse)" } else { "covariance" }));
        }
        for m in &self.marginals {
            m.validate()?;
            layers.push(String::from("marginal"));
        }
        Ok(ValidationReport { layers, param_count: self.params().len() })
    }

    /// Validation plus the checks that depend on the training-set size.
    pub fn validate_for_data(&self, n: usize) -> Result<ValidationReport> {
        let report = self.validate()?;
        if let Some(c) = &self.covariance {
            c.validate_for_data(n)?;
        }
        Ok(report)
    }

    fn elliptical(&self) -> Option<EllipticalLayer> {
        match self.copula {
            Some(CopulaLayer::Elliptical { mixing }) => Some(EllipticalLayer { mixing }),
            _ => None,
        }
    }

    fn archimedean(&self) -> Option<ArchimedeanLayer> {
        match self.copula {
            Some(CopulaLayer::Archimedean { generator }) => Some(ArchimedeanLayer { generator }),
            _ => None,
        }
    }

    /// Pushes reference noise `x` at inputs `t` through every layer.
    pub fn forward(&self, t: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        if t.len() != x.len() {
            return Err(TpError::DimensionMismatch { expected: t.len(), got: x.len() });
        }
        let mut z = match &self.copula {
            Some(CopulaLayer::Elliptical { mixing }) => EllipticalLayer { mixing: *mixing }.forward(x)?,
            Some(CopulaLayer::Archimedean { generator }) => ArchimedeanLayer { generator: *generator }.forward(x)?,
            None => x.to_vec(),
        };
        if let Some(c) = &self.covariance {
            z = c.forward(t, &z)?;
        }
        for m in &self.marginals {
            z = m.forward(t, &z)?;
        }
        Ok(z)
    }

    /// Inverse map to the white-noise reference with `Σ_j log|∇S^{(j)}|` and the
    /// jitter used by the covariance factor.
    pub fn inverse_with_logdet(&self, t: &[f64], y: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
        let (w, mut ld, jitter) = self.inverse_to_copula(t, y)?;
        let x = match &self.copula {
            Some(CopulaLayer::Elliptical { mixing }) => {
                let (x, l) = EllipticalLayer { mixing: *mixing }.inverse_with_logdet(&w)?;
                ld += l;
                x
            }
            Some(CopulaLayer::Archimedean { generator }) => {
                let (x, l) = ArchimedeanLayer { generator: *generator }.inverse_with_logdet(&w)?;
                ld += l;
                x
            }
            None => w,
        };
        Ok((x, ld, jitter))
    }

    /// Inverts the marginal and covariance layers, stopping at the copula output.
    fn inverse_to_copula(&self, t: &[f64], y: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
        if t.len() != y.len() {
            return Err(TpError::DimensionMismatch { expected: t.len(), got: y.len() });
        }
        let mut z = y.to_vec();
        let mut ld = 0.0;
        for m in self.marginals.iter().rev() {
            let (next, l) = m.inverse_with_logdet(t, &z)?;
            ld += l;
            z = next;
        }
        let mut jitter = 0.0;
        if let Some(c) = &self.covariance {
            let f = c.factor(t)?;
            jitter = f.jitter();
            ld += f.logdet_inv();
            z = f.inverse(&z)?;
        }
        Ok((z, ld, jitter))
    }

    /// Composite negative log-likelihood of `y` observed at `t`.
    pub fn nll(&self, t: &[f64], y: &[f64]) -> Result<NllEval> {
        match self.inverse_with_logdet(t, y) {
            Ok((x, ld, jitter)) => {
                let sq: f64 = x.iter().map(|v| v * v).sum();
                let value = x.len() as f64 * LN_SQRT_2PI + 0.5 * sq - ld;
                if value.is_finite() {
                    Ok(NllEval { value, rejection: None, jitter })
                } else {
                    Ok(NllEval {
                        value: f64::INFINITY,
                        rejection: Some(format!("likelihood is not finite ({value})")),
                        jitter,
                    })
                }
            }
            Err(e) if is_domain(&e) => Ok(NllEval {
                value: f64::INFINITY,
                rejection: Some(format!("{e}")),
                jitter: 0.0,
            }),
            Err(e) => Err(e),
        }
    }

    /// Shorthand for the NLL value.
    pub fn nll_value(&self, t: &[f64], y: &[f64]) -> Result<f64> {
        Ok(self.nll(t, y)?.value)
    }

    /// `count` posterior draws at `tbar` given `y` at `t`. Draw `i` uses
    /// substream `rng.split(i)`.
    pub fn posterior_sample(
        &self,
        t: &[f64],
        y: &[f64],
        tbar: &[f64],
        count: usize,
        rng: &SplitRng,
    ) -> Result<PosteriorSampleSet> {
        self.validate()?;
        let nbar = tbar.len();
        let mut samples = Vec::with_capacity(count);
        if let Some(arch) = self.archimedean() {
            let (w, _, _) = self.inverse_to_copula(t, y)?;
            let g = arch.generator;
            let observed: Vec<f64> = w.iter().map(|&v| g.psi(v)).collect();
            for i in 0..count {
                let mut r = rng.split(i as u64);
                let u = arch.conditional_sample(&observed, nbar, &mut r)?;
                let mut z: Vec<f64> = u.iter().map(|&v| g.psi_inv(v)).collect();
                z = self.push_marginals(tbar, z)?;
                samples.push(z);
            }
        } else {
            let (w, _, _) = self.inverse_to_copula(t, y)?;
            let affine = match &self.covariance {
                Some(c) => Some(c.posterior_affine(t, tbar)?),
                None => None,
            };
            let mean = match &affine {
                Some(a) => a.mean(&w)?,
                None => alloc::vec![0.0; nbar],
            };
            let radii = self.posterior_radii(&w, nbar, count, rng)?;
            let normal = Dist1D::std_normal();
            for i in 0..count {
                let mut r = rng.split(i as u64);
                let mut u: Vec<f64> = (0..nbar).map(|_| normal.sample(&mut r)).collect();
                if let Some(radii) = &radii {
                    let norm = crate::radial_layer::norm2(&u);
                    if norm > 0.0 {
                        let s = radii[i] / norm;
                        u.iter_mut().for_each(|v| *v *= s);
                    }
                }
                let z = match &affine {
                    Some(a) => a.map_with_mean(&mean, &u),
                    None => u,
                };
                samples.push(self.push_marginals(tbar, z)?);
            }
        }
        for (i, s) in samples.iter().enumerate() {
            if let Some(j) = s.iter().position(|v| !v.is_finite()) {
                return Err(TpError::Numerical(format!("posterior draw {i} is not finite at input {j}")));
            }
        }
        Ok(PosteriorSampleSet {
            tbar: tbar.to_vec(),
            samples,
            seed: rng.seed(),
            model_hash: String::new(),
        })
    }

    /// Radii `‖w̄‖` of the predictive copula-level vector, or `None` when the
    /// collapsed reference is Gaussian.
    fn posterior_radii(&self, w: &[f64], nbar: usize, count: usize, rng: &SplitRng) -> Result<Option<Vec<f64>>> {
        let Some(layer) = self.elliptical() else {
            return Ok(None);
        };
        if layer.is_identity() {
            return Ok(None);
        }
        let y_norm = crate::radial_layer::norm2(w);
        let n = w.len();
        match layer.mixing {
            EllipticalMixing::General { .. } => {
                // one chain shared by all draws, on its own substream
                let mut r = rng.split(u64::MAX);
                Ok(Some(layer.posterior_radius_general(y_norm, n, nbar, count, &mut r)?))
            }
            _ => {
                let mut out = Vec::with_capacity(count);
                for i in 0..count {
                    let mut r = rng.split(i as u64).split(1);
                    out.push(layer.studentt_posterior_radius(y_norm, n, nbar, &mut r)?);
                }
                Ok(Some(out))
            }
        }
    }

    fn push_marginals(&self, tbar: &[f64], mut z: Vec<f64>) -> Result<Vec<f64>> {
        for m in &self.marginals {
            z = m.forward(tbar, &z)?;
        }
        Ok(z)
    }
}

fn order_error(position: usize, reason: &str) -> TpError {
    TpError::Validation(format!("layer {position}: {reason}"))
}

/// Empirical quantiles (linear interpolation between order statistics).
pub fn quantiles(samples: &PosteriorSampleSet, probs: &[f64]) -> Result<QuantileTable> {
    let n = samples.samples.len();
    if n < MIN_QUANTILE_SAMPLES {
        return Err(TpError::Validation(format!(
            "quantiles need at least {MIN_QUANTILE_SAMPLES} draws, got {n}"
        )));
    }
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(TpError::Validation(format!("probability {p} is outside [0, 1]")));
    }
    let m = samples.tbar.len();
    let mut values = Vec::with_capacity(m);
    let mut mean = Vec::with_capacity(m);
    let mut col = Vec::with_capacity(n);
    for j in 0..m {
        col.clear();
        col.extend(samples.samples.iter().map(|row| row[j]));
        col.sort_by(f64::total_cmp);
        mean.push(col.iter().sum::<f64>() / n as f64);
        values.push(probs.iter().map(|&p| sorted_quantile(&col, p)).collect());
    }
    Ok(QuantileTable { tbar: samples.tbar.clone(), probs: probs.to_vec(), mean, values })
}

pub(crate) fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl PosteriorSampleSet {
    pub fn with_model_hash(mut self, hash: impl Into<String>) -> Self {
        self.model_hash = hash.into();
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

impl Parameterized for LayerStack {
    fn collect_params(&self, prefix: &str, out: &mut Vec<Param>) {
        match &self.copula {
            Some(CopulaLayer::Elliptical { mixing }) => {
                EllipticalLayer { mixing: *mixing }.collect_params(&join(prefix, "copula"), out)
            }
            Some(CopulaLayer::Archimedean { generator }) => {
                ArchimedeanLayer { generator: *generator }.collect_params(&join(prefix, "copula"), out)
            }
            None => {}
        }
        if let Some(c) = &self.covariance {
            c.collect_params(&join(prefix, "covariance"), out);
        }
        for (i, m) in self.marginals.iter().enumerate() {
            m.collect_params(&join(prefix, &format!("marginal{i}")), out);
        }
    }

    fn assign_params(&mut self, v: &[f64]) -> usize {
        let mut used = 0;
        match &mut self.copula {
            Some(CopulaLayer::Elliptical { mixing }) => {
                let mut l = EllipticalLayer { mixing: *mixing };
                used += l.assign_params(v);
                *mixing = l.mixing;
            }
            Some(CopulaLayer::Archimedean { generator }) => {
                let mut l = ArchimedeanLayer { generator: *generator };
                used += l.assign_params(v);
                *generator = l.generator;
            }
            None => {}
        }
        if let Some(c) = &mut self.covariance {
            used += c.assign_params(&v[used..]);
        }
        for m in &mut self.marginals {
            used += m.assign_params(&v[used..]);
        }
        used
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Kernel;
    use crate::probcore::special::ln_gamma;
    use crate::radial_layer::Generator;
    use crate::warpings::Warping;
    use nalgebra::{DMatrix, DVector};

    fn kernel() -> Kernel {
        Kernel::sum(alloc::vec![Kernel::squared_exponential(1.3, 0.8), Kernel::white_noise(0.3)])
    }

    fn gp_nll(k: &Kernel, t: &[f64], y: &[f64]) -> f64 {
        let g = k.gram_sym(t, true);
        let n = t.len() as f64;
        let yv = DVector::from_column_slice(y);
        let inv = g.clone().try_inverse().unwrap();
        0.5 * n * (2.0 * core::f64::consts::PI).ln() + 0.5 * (yv.transpose() * inv * &yv)[0] + 0.5 * g.determinant().ln()
    }

    #[test]
    fn empty_stack_at_zero() {
        let s = LayerStack::default();
        let v = s.nll_value(&[0.0, 1.0, 2.0], &[0.0; 3]).unwrap();
        assert!((v - 1.5 * (2.0 * core::f64::consts::PI).ln()).abs() < 1e-14);
        assert!(s.validate().is_ok());
    }

    #[test]
    fn covariance_only_matches_gp() {
        let s = LayerStack::new(None, Some(CovarianceLayer::exact(kernel())), Vec::new());
        let t = [0.0, 0.4, 1.1, 2.0, 2.2];
        let y = [0.3, -0.5, 1.2, 0.1, 0.0];
        let v = s.nll_value(&t, &y).unwrap();
        assert!((v - gp_nll(&kernel(), &t, &y)).abs() < 1e-9);
    }

    #[test]
    fn student_stack_matches_multivariate_t() {
        let theta: f64 = 5.0;
        let s = LayerStack::new(
            Some(CopulaLayer::elliptical(EllipticalLayer::student_t(1.0 / theta))),
            Some(CovarianceLayer::exact(kernel())),
            Vec::new(),
        );
        let t = [0.0, 0.5, 1.7];
        let y = [0.6, -0.2, 1.4];
        let g: DMatrix<f64> = kernel().gram_sym(&t, true);
        let yv = DVector::from_column_slice(&y);
        let q = (yv.transpose() * g.clone().try_inverse().unwrap() * &yv)[0];
        let n = 3.0;
        let ld = ln_gamma((theta + n) / 2.0) - ln_gamma(theta / 2.0)
            - 0.5 * n * (theta * core::f64::consts::PI).ln()
            - 0.5 * g.determinant().ln()
            - 0.5 * (theta + n) * (q / theta).ln_1p();
        let v = s.nll_value(&t, &y).unwrap();
        assert!((v + ld).abs() < 1e-6, "{v} vs {}", -ld);
    }

    #[test]
    fn order_and_exclusion_rules() {
        let cov = CovarianceLayer::exact(kernel());
        let m = MarginalLayer::identity();
        assert!(LayerStack::from_layers(alloc::vec![Layer::Marginal(m.clone()), Layer::Covariance(cov.clone())]).is_err());
        assert!(LayerStack::from_layers(alloc::vec![
            Layer::Archimedean(ArchimedeanLayer::new(Generator::Independence)),
            Layer::Covariance(cov.clone()),
        ])
        .is_err());
        let ok = LayerStack::from_layers(alloc::vec![
            Layer::Elliptical(EllipticalLayer::student_t(0.1)),
            Layer::Covariance(cov),
            Layer::Marginal(m),
        ])
        .unwrap();
        assert_eq!(ok.validate().unwrap().layers.len(), 3);
        assert!(LayerStack::from_layers(Vec::new()).is_ok());
    }

    #[test]
    fn domain_violation_is_infinite() {
        let s = LayerStack::new(None, None, alloc::vec![MarginalLayer::from_warping(Warping::Log)]);
        let e = s.nll(&[0.0, 1.0], &[1.0, -1.0]).unwrap();
        assert_eq!(e.value, f64::INFINITY);
        assert!(e.rejection.is_some());
    }

    #[test]
    fn noiseless_interpolation() {
        let s = LayerStack::new(None, Some(CovarianceLayer::exact(Kernel::squared_exponential(1.0, 0.5))), Vec::new());
        let t = [0.0, 1.0, 2.5];
        let y = [0.4, -0.3, 0.9];
        let set = s.posterior_sample(&t, &y, &t, 20, &SplitRng::new(3)).unwrap();
        for row in &set.samples {
            for (a, b) in row.iter().zip(&y) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn params_round_trip() {
        let mut s = LayerStack::new(
            Some(CopulaLayer::elliptical(EllipticalLayer::student_t(0.2))),
            Some(CovarianceLayer::exact(kernel())),
            alloc::vec![MarginalLayer::from_warping(Warping::BoxCoxShifted { lambda: 0.5, c: 1.0 })],
        );
        let p = s.params();
        let vals: Vec<f64> = p.iter().map(|q| q.value).collect();
        assert_eq!(s.assign_params(&vals), vals.len());
        assert_eq!(s.params(), p);
        assert_eq!(p[0].name, "copula.student.nu_inv");
    }

    #[test]
    fn quantiles_of_constant_samples() {
        let set = PosteriorSampleSet {
            tbar: alloc::vec![0.0],
            samples: alloc::vec![alloc::vec![2.5]; 100],
            seed: 0,
            model_hash: String::new(),
        };
        let q = quantiles(&set, &[0.5]).unwrap();
        assert_eq!(q.values[0][0], 2.5);
        let short = PosteriorSampleSet { samples: alloc::vec![alloc::vec![1.0]; 10], ..set };
        assert!(quantiles(&short, &[0.5]).is_err());
    }
}
