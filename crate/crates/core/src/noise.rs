//! Band-limited Gaussian noise standing in for the injected quantum noise.
//!
//! Strength is expressed as the quantum-to-ground strength ratio
//!
//! ```text
//! QGSR = 5 log10(Q / G)   [dB]
//! ```
//!
//! where `Q` is the mean-square of the noise record and `G` the ground-noise
//! reference. Note the factor 5 rather than the usual 10 (power) or 20
//! (amplitude): a 5 dB step is a factor 10 in mean square.

use rand_distr::{Distribution, StandardNormal};
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{solitary_steady_state, LaserParams};
use crate::seed;

/// Ground reference such that `QGSR = 5 log10(Q) - 45`.
pub const DEFAULT_GROUND_REF: f64 = 1e9;

/// Per-equation coupling factors `(s_R, s_phi, s_N)`, frozen after
/// calibrating the 100 MHz / 16 dB operating point to suppress the delay
/// signature by more than 90 %. Carrier coupling above ~0.1 skews the
/// intensity distribution; the phase channel does most of the work.
pub const DEFAULT_COUPLING: [f64; 3] = [1.0, 120.0, 0.05];

/// Description of the injected noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    /// Low-pass cutoff (Hz).
    pub bandwidth: f64,
    /// Target strength (dB).
    pub qgsr_db: f64,
    /// Ground-noise mean-square reference.
    pub ground_ref: f64,
    /// Coupling factors for the amplitude, phase and carrier equations.
    pub scales: [f64; 3],
    pub seed: u64,
    pub enabled: bool,
    /// Inject one realization into all three equations instead of three
    /// independent ones.
    pub shared_realization: bool,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            bandwidth: 100e6,
            qgsr_db: 16.0,
            ground_ref: DEFAULT_GROUND_REF,
            scales: DEFAULT_COUPLING,
            seed: 0,
            enabled: true,
            shared_realization: false,
        }
    }
}

impl NoiseSpec {
    pub fn disabled() -> Self {
        Self {
            enabled: false,
            ..Self::default()
        }
    }

    pub fn validate(&self, dt: f64) -> Result<()> {
        if !self.enabled {
            return Ok(());
        }
        if !(self.bandwidth.is_finite() && self.bandwidth > 0.0) {
            return Err(Error::InvalidInput(format!(
                "noise bandwidth {} must be > 0",
                self.bandwidth
            )));
        }
        let nyquist = 0.5 / dt;
        if self.bandwidth > nyquist {
            return Err(Error::AboveNyquist {
                cutoff: self.bandwidth,
                nyquist,
            });
        }
        if !(self.ground_ref.is_finite() && self.ground_ref > 0.0) {
            return Err(Error::InvalidReference(self.ground_ref));
        }
        if !self.qgsr_db.is_finite() {
            return Err(Error::InvalidInput("qgsr_db is not finite".into()));
        }
        if self.scales.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "coupling scales {:?} must be >= 0",
                self.scales
            )));
        }
        Ok(())
    }
}

/// Characteristic magnitude of each right-hand side per delay time:
/// `(R_s / tau_ext, 1 / tau_ext, N_th / tau_ext)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitScales(pub [f64; 3]);

impl UnitScales {
    pub fn from_params(p: &LaserParams) -> Result<Self> {
        let (r_s, _) = solitary_steady_state(p)?;
        let inv = 1.0 / p.tau_ext;
        Ok(Self([r_s * inv, inv, p.threshold_carriers() * inv]))
    }
}

/// The three additive forcing records on a uniform grid starting at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseStreams {
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub beta: Vec<f64>,
    /// Grid spacing (s).
    pub dt: f64,
    /// Measured strength of the calibrated streams before coupling.
    pub actual_qgsr_db: Option<f64>,
    pub enabled: bool,
}

impl NoiseStreams {
    pub fn zeros(n: usize, dt: f64) -> Self {
        Self {
            xi: vec![0.0; n],
            eta: vec![0.0; n],
            beta: vec![0.0; n],
            dt,
            actual_qgsr_db: None,
            enabled: false,
        }
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }
}

/// `n` i.i.d. normal(0, sigma^2) samples from `seed`.
pub fn white_gaussian(n: usize, sigma: f64, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::InvalidInput(format!("sigma {sigma} must be >= 0")));
    }
    let mut rng = seed::rng(seed);
    Ok((0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sigma * z
        })
        .collect())
}

/// Brick-wall low-pass: every DFT bin with |f| > cutoff is zeroed.
pub fn bandlimit(x: &[f64], dt: f64, cutoff: f64) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt {dt} must be > 0")));
    }
    let nyquist = 0.5 / dt;
    if !(cutoff.is_finite() && cutoff > 0.0) {
        return Err(Error::InvalidInput(format!("cutoff {cutoff} must be > 0")));
    }
    if cutoff > nyquist {
        return Err(Error::AboveNyquist { cutoff, nyquist });
    }
    let n = x.len();
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let df = 1.0 / (n as f64 * dt);
    for (k, c) in buf.iter_mut().enumerate() {
        let bin = k.min(n - k) as f64;
        if bin * df > cutoff {
            *c = Complex::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    Ok(buf.iter().map(|c| c.re * scale).collect())
}

fn mean_square(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

/// Strength of a record relative to the ground reference, in dB.
pub fn qgsr_of(x: &[f64], ground_ref: f64) -> Result<f64> {
    if !(ground_ref.is_finite() && ground_ref > 0.0) {
        return Err(Error::InvalidReference(ground_ref));
    }
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(5.0 * (mean_square(x) / ground_ref).log10())
}

/// Rescale `x` so that its mean square `Q` satisfies `5 log10(Q/G) = qgsr_db`.
pub fn calibrate_qgsr(x: &[f64], ground_ref: f64, qgsr_db: f64) -> Result<Vec<f64>> {
    if !(ground_ref.is_finite() && ground_ref > 0.0) {
        return Err(Error::InvalidReference(ground_ref));
    }
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let ms = mean_square(x);
    if ms == 0.0 {
        return Err(Error::CannotCalibrate);
    }
    let target = ground_ref * 10f64.powf(qgsr_db / 5.0);
    let g = (target / ms).sqrt();
    Ok(x.iter().map(|v| g * v).collect())
}

/// Generate the three calibrated, coupled forcing records on an `n`-point
/// grid of spacing `dt`.
///
/// Each stream is white noise, band-limited to `spec.bandwidth`, calibrated
/// to mean square `Q` and then coupled into its equation as
/// `s_k * A_k * y / sqrt(G)`, so the forcing RMS is `s_k A_k 10^(QGSR/10)`
/// independent of the chosen ground reference.
pub fn make_streams(
    spec: &NoiseSpec,
    units: &UnitScales,
    n: usize,
    dt: f64,
) -> Result<NoiseStreams> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if !spec.enabled {
        return Ok(NoiseStreams::zeros(n, dt));
    }
    spec.validate(dt)?;
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(3);
    let mut achieved = Vec::with_capacity(3);
    for k in 0..3u64 {
        let idx = if spec.shared_realization { 0 } else { k };
        let white = white_gaussian(n, 1.0, seed::derive(spec.seed, &[0x006e_6f69_7365, idx]))?;
        let limited = bandlimit(&white, dt, spec.bandwidth)?;
        let calibrated = calibrate_qgsr(&limited, spec.ground_ref, spec.qgsr_db)?;
        achieved.push(qgsr_of(&calibrated, spec.ground_ref)?);
        let coupling = spec.scales[k as usize] * units.0[k as usize] / spec.ground_ref.sqrt();
        out.push(calibrated.into_iter().map(|v| coupling * v).collect());
    }
    let beta = out.pop().unwrap();
    let eta = out.pop().unwrap();
    let xi = out.pop().unwrap();
    let actual = achieved.iter().sum::<f64>() / achieved.len() as f64;
    Ok(NoiseStreams {
        xi,
        eta,
        beta,
        dt,
        actual_qgsr_db: Some(actual),
        enabled: true,
    })
}
