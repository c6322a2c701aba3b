use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Third standardised central moment, population convention.
pub fn skewness(x: &[f64]) -> Result<f64> {
    if x.len() < 3 {
        return Err(Error::InsufficientData {
            required: 3,
            actual: x.len(),
        });
    }
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let (mut m2, mut m3) = (0.0, 0.0);
    for &v in x {
        let d = v - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n;
    m3 /= n;
    if m2 <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(m3 / m2.powf(1.5))
}

/// Coarse description of a sample distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSummary {
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
    /// Equal-width bin counts over `[min, max]`.
    pub bins: Vec<u64>,
}

pub fn histogram(x: &[f64], n_bins: usize) -> Result<HistogramSummary> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n_bins = n_bins.max(1);
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let min = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut bins = vec![0u64; n_bins];
    let width = (max - min) / n_bins as f64;
    for &v in x {
        let k = if width > 0.0 {
            (((v - min) / width) as usize).min(n_bins - 1)
        } else {
            0
        };
        bins[k] += 1;
    }
    Ok(HistogramSummary {
        count: x.len(),
        mean,
        std_dev: var.sqrt(),
        min,
        max,
        bins,
    })
}
