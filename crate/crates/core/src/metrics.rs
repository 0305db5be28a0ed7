//! Point and sample-based prediction error indices.

use crate::error::{Result, TpError};
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mae: f64,
    pub eae: f64,
    pub mse: f64,
    pub ese: f64,
}

/// Indices of held-out values `y` against `S` sample paths, where
/// `samples[k][i]` is draw `k` at point `i`.
///
/// MSE and MAE score the sample mean, ESE and EAE average the error of each
/// draw.
pub fn evaluate(y: &[f64], samples: &[Vec<f64>]) -> Result<Metrics> {
    if samples.is_empty() {
        return Err(TpError::Validation("metrics need at least one sample path".into()));
    }
    if y.is_empty() {
        return Err(TpError::Validation("metrics need at least one held-out value".into()));
    }
    if let Some(row) = samples.iter().find(|r| r.len() != y.len()) {
        return Err(TpError::DimensionMismatch { expected: y.len(), got: row.len() });
    }
    let s = samples.len() as f64;
    let n = y.len() as f64;
    let (mut mae, mut eae, mut mse, mut ese) = (0.0, 0.0, 0.0, 0.0);
    for (i, &yi) in y.iter().enumerate() {
        let mean = samples.iter().map(|r| r[i]).sum::<f64>() / s;
        let d = yi - mean;
        mae += d.abs();
        mse += d * d;
        let mut ea = 0.0;
        let mut es = 0.0;
        for r in samples {
            let e = yi - r[i];
            ea += e.abs();
            es += e * e;
        }
        eae += ea / s;
        ese += es / s;
    }
    Ok(Metrics { mae: mae / n, eae: eae / n, mse: mse / n, ese: ese / n })
}

/// Mean and sample standard deviation.
pub fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_predictor_by_hand() {
        let y = [1.0, 2.0, 6.0];
        let m = evaluate(&y, &[alloc::vec![3.0; 3]]).unwrap();
        assert_eq!(m.mse, (4.0 + 1.0 + 9.0) / 3.0);
        assert_eq!(m.mae, (2.0 + 1.0 + 3.0) / 3.0);
        assert_eq!(m.ese, m.mse);
        assert_eq!(m.eae, m.mae);
    }

    #[test]
    fn jensen_ordering() {
        let y = [0.5, -1.0];
        let s = [alloc::vec![0.0, 0.0], alloc::vec![1.0, -2.0], alloc::vec![2.0, 1.0]];
        let m = evaluate(&y, &s).unwrap();
        assert!(m.ese >= m.mse && m.eae >= m.mae);
    }

    #[test]
    fn summary_statistics() {
        let (m, sd) = mean_sd(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((sd - 1.0).abs() < 1e-15);
    }
}
