//! Welch power spectral density and the 80 % power bandwidth.

use std::f64::consts::PI;
use std::io::Write;

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

pub const DEFAULT_SEGMENT: usize = 16_384;

/// One-sided power spectral density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSpectrum {
    /// Bin frequencies (Hz), starting at DC.
    pub freqs: Vec<f64>,
    /// Density per Hz; `sum(psd) * df` equals the signal variance.
    pub psd: Vec<f64>,
    /// Bin spacing (Hz).
    pub df: f64,
    /// Equivalent noise bandwidth of the analysis window (Hz).
    pub enbw: f64,
    pub segments: usize,
}

impl PowerSpectrum {
    /// Total power, excluding nothing.
    pub fn total_power(&self) -> f64 {
        self.psd.iter().sum::<f64>() * self.df
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["freq_hz", "psd"])?;
        for (f, p) in self.freqs.iter().zip(&self.psd) {
            wtr.write_record([format!("{f:e}"), format!("{p:e}")])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Welch estimate with a Hann window, 50 % overlap and 16384-sample segments.
pub fn power_spectrum(x: &TimeSeries) -> Result<PowerSpectrum> {
    welch(x, DEFAULT_SEGMENT)
}

/// Welch estimate with per-segment mean removal and a periodic Hann window.
pub fn welch(x: &TimeSeries, segment: usize) -> Result<PowerSpectrum> {
    if segment < 4 {
        return Err(Error::InvalidInput(format!(
            "segment length {segment} too short"
        )));
    }
    let n = x.len();
    if n < 2 * segment {
        return Err(Error::InsufficientData {
            required: 2 * segment,
            actual: n,
        });
    }
    let window: Vec<f64> = (0..segment)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / segment as f64).cos())
        .collect();
    let w_sum: f64 = window.iter().sum();
    let w_sq: f64 = window.iter().map(|w| w * w).sum();
    let fs = 1.0 / x.dt;

    let hop = segment / 2;
    let n_seg = (n - segment) / hop + 1;
    let half = segment / 2;
    let mut acc = vec![0.0; half + 1];
    let fft = FftPlanner::new().plan_fft_forward(segment);
    let mut buf = vec![Complex::new(0.0, 0.0); segment];
    for s in 0..n_seg {
        let seg = &x.samples[s * hop..s * hop + segment];
        let m = seg.iter().sum::<f64>() / segment as f64;
        for ((b, &v), &w) in buf.iter_mut().zip(seg).zip(&window) {
            *b = Complex::new((v - m) * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, c) in acc.iter_mut().zip(&buf) {
            *a += c.norm_sqr();
        }
    }
    let scale = 1.0 / (fs * w_sq * n_seg as f64);
    let psd: Vec<f64> = acc
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            let one_sided = if k == 0 || k == half { 1.0 } else { 2.0 };
            one_sided * a * scale
        })
        .collect();
    let df = fs / segment as f64;
    Ok(PowerSpectrum {
        freqs: (0..=half).map(|k| k as f64 * df).collect(),
        psd,
        df,
        enbw: fs * w_sq / (w_sum * w_sum),
        segments: n_seg,
    })
}

/// Smallest frequency below which 80 % of the (DC-excluded) power lies.
///
/// Each bin `j >= 1` carries its power over `(f_{j-1}, f_j]`; the cumulative
/// curve is interpolated linearly inside the crossing bin.
pub fn bandwidth_80(ps: &PowerSpectrum) -> Result<f64> {
    bandwidth_fraction(ps, 0.8)
}

pub fn bandwidth_fraction(ps: &PowerSpectrum, fraction: f64) -> Result<f64> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "fraction {fraction} must lie in (0, 1]"
        )));
    }
    if ps.psd.len() < 2 || ps.psd.len() != ps.freqs.len() {
        return Err(Error::DegenerateSpectrum);
    }
    if ps.psd.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidInput(
            "PSD must be finite and non-negative".into(),
        ));
    }
    let total: f64 = ps.psd[1..].iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateSpectrum);
    }
    let target = fraction * total;
    let mut cum = 0.0;
    for j in 1..ps.psd.len() {
        let next = cum + ps.psd[j];
        if next >= target && ps.psd[j] > 0.0 {
            let t = (target - cum) / ps.psd[j];
            return Ok(ps.freqs[j - 1] + t * (ps.freqs[j] - ps.freqs[j - 1]));
        }
        cum = next;
    }
    Ok(*ps.freqs.last().unwrap())
}
