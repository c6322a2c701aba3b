//! Time-series metrics: delay signature, permutation entropy, spectral
//! bandwidth and intensity statistics.

mod acf;
mod entropy;
mod spectrum;
mod stats;

pub use acf::{acf, tds_metric, AcfCurve};
pub use entropy::{
    entropy_scan, normalized_entropy, pattern_counts, permutation_entropy,
    permutation_entropy_with_floor, DEFAULT_WINDOWS_PER_PATTERN,
};
pub use spectrum::{
    bandwidth_80, bandwidth_fraction, power_spectrum, welch, PowerSpectrum, DEFAULT_SEGMENT,
};
pub use stats::{histogram, skewness, HistogramSummary};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Half width of the C_p search window around the delay (s).
    pub half_window: f64,
    pub pe_dimension: usize,
    /// Embedding delay in samples; `None` uses the feedback delay.
    pub pe_lag: Option<usize>,
    pub welch_segment: usize,
    pub histogram_bins: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            half_window: 2e-9,
            pe_dimension: 4,
            pe_lag: None,
            welch_segment: DEFAULT_SEGMENT,
            histogram_bins: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    /// Peak |ACF| near the feedback delay.
    pub cp: f64,
    /// Lag of that peak (s).
    pub peak_lag: f64,
    /// Normalised permutation entropy at the delay embedding.
    pub pe: f64,
    pub pe_dimension: usize,
    pub pe_lag: usize,
    /// 80 % power bandwidth (Hz).
    pub bw80: f64,
    pub skewness: f64,
    pub histogram: HistogramSummary,
    pub tau_ext: f64,
    pub dt: f64,
    pub samples: usize,
}

pub fn analyze_all(x: &TimeSeries, tau_ext: f64) -> Result<AnalysisReport> {
    analyze_with(x, tau_ext, &AnalysisConfig::default())
}

pub fn analyze_with(x: &TimeSeries, tau_ext: f64, cfg: &AnalysisConfig) -> Result<AnalysisReport> {
    let max_lag = tau_ext + cfg.half_window + x.dt;
    let curve = acf(x, max_lag).map_err(|e| e.in_metric("acf"))?;
    let (cp, peak_lag) =
        tds_metric(&curve, tau_ext, cfg.half_window).map_err(|e| e.in_metric("tds_metric"))?;
    let pe_lag = cfg
        .pe_lag
        .unwrap_or_else(|| ((tau_ext / x.dt).round() as usize).max(1));
    let pe = permutation_entropy(&x.samples, cfg.pe_dimension, pe_lag)
        .map_err(|e| e.in_metric("permutation_entropy"))?;
    let ps = welch(x, cfg.welch_segment).map_err(|e| e.in_metric("power_spectrum"))?;
    let bw80 = bandwidth_80(&ps).map_err(|e| e.in_metric("bandwidth_80"))?;
    let skew = skewness(&x.samples).map_err(|e| e.in_metric("skewness"))?;
    let histogram =
        histogram(&x.samples, cfg.histogram_bins).map_err(|e| e.in_metric("histogram"))?;
    Ok(AnalysisReport {
        cp,
        peak_lag,
        pe,
        pe_dimension: cfg.pe_dimension,
        pe_lag,
        bw80,
        skewness: skew,
        histogram,
        tau_ext,
        dt: x.dt,
        samples: x.len(),
    })
}
