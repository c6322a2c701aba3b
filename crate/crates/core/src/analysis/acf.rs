//! Normalised autocorrelation and the time-delay-signature peak.

use std::io::Write;

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Autocorrelation values on the lag grid `k * dt`, `k = 0..len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfCurve {
    pub dt: f64,
    pub values: Vec<f64>,
}

impl AcfCurve {
    pub fn lag(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn max_lag(&self) -> f64 {
        self.lag(self.values.len().saturating_sub(1))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["lag_s", "acf"])?;
        for (k, c) in self.values.iter().enumerate() {
            wtr.write_record([format!("{:e}", self.lag(k)), format!("{c:e}")])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Correlation between `x(t + lag)` and `x(t)` over their overlap, each
/// segment using its own time average and variance.
///
/// The lagged cross sums come from a zero-padded FFT; segment means and
/// energies come from prefix sums, so every lag matches the direct sum.
pub fn acf(x: &TimeSeries, max_lag: f64) -> Result<AcfCurve> {
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            actual: n,
        });
    }
    if !(max_lag.is_finite() && max_lag >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "max_lag {max_lag} must be >= 0"
        )));
    }
    if max_lag >= 0.5 * x.span() {
        return Err(Error::InvalidInput(format!(
            "max_lag {max_lag} s must be below half the record span {} s",
            0.5 * x.span()
        )));
    }
    if x.variance() == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let max_k = (max_lag / x.dt).round() as usize;
    let max_k = max_k.min(n / 2);

    let mean = x.mean();
    let y: Vec<f64> = x.samples.iter().map(|v| v - mean).collect();

    let len = (n + max_k + 1).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = Vec::with_capacity(len);
    buf.extend(y.iter().map(|&v| Complex::new(v, 0.0)));
    buf.resize(len, Complex::new(0.0, 0.0));
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    let inv_len = 1.0 / len as f64;

    let mut p1 = Vec::with_capacity(n + 1);
    let mut p2 = Vec::with_capacity(n + 1);
    let (mut s1, mut s2) = (0.0, 0.0);
    p1.push(0.0);
    p2.push(0.0);
    for &v in &y {
        s1 += v;
        s2 += v * v;
        p1.push(s1);
        p2.push(s2);
    }

    let mut values = Vec::with_capacity(max_k + 1);
    values.push(1.0);
    for k in 1..=max_k {
        let m = (n - k) as f64;
        let cross = buf[k].re * inv_len / m;
        let mean_lead = (p1[n] - p1[k]) / m;
        let mean_lag = p1[n - k] / m;
        let var_lead = (p2[n] - p2[k]) / m - mean_lead * mean_lead;
        let var_lag = p2[n - k] / m - mean_lag * mean_lag;
        let denom = (var_lead * var_lag).sqrt();
        let c = if denom > 0.0 {
            ((cross - mean_lead * mean_lag) / denom).clamp(-1.0, 1.0)
        } else {
            0.0
        };
        values.push(c);
    }
    Ok(AcfCurve { dt: x.dt, values })
}

/// Peak |C| in `[tau_ext - half_window, tau_ext + half_window]` and the lag at
/// which it occurs (earliest lag on ties).
pub fn tds_metric(curve: &AcfCurve, tau_ext: f64, half_window: f64) -> Result<(f64, f64)> {
    let lo = tau_ext - half_window;
    let hi = tau_ext + half_window;
    let max = curve.max_lag();
    if !(lo >= 0.0 && hi <= max + 1e-9 * curve.dt && lo <= hi) {
        return Err(Error::OutOfRange { lo, hi, max });
    }
    let k_lo = (lo / curve.dt - 1e-9).ceil().max(0.0) as usize;
    let k_hi = ((hi / curve.dt + 1e-9).floor() as usize).min(curve.values.len() - 1);
    let mut best = (f64::NEG_INFINITY, k_lo);
    for k in k_lo..=k_hi {
        let v = curve.values[k].abs();
        if v > best.0 {
            best = (v, k);
        }
    }
    Ok((best.0.min(1.0), curve.lag(best.1)))
}
