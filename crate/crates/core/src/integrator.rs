//! Fixed-step integration of the delayed rate equations.
//!
//! The delayed amplitude and phase live in a ring buffer of exactly
//! `round(tau_ext / dt)` entries. Each step is a Heun predictor-corrector on
//! the deterministic drift; injected band-limited noise enters as smooth
//! forcing sampled at the step midpoint, and the optional intrinsic white
//! noise is added with Euler-Maruyama `sqrt(D dt)` increments.

use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::analysis::{analyze_with, AnalysisConfig, AnalysisReport};
use crate::error::{Error, Result};
use crate::model::{drift_parts, solitary_steady_state, DerivedConsts, LaserParams, LaserState};
use crate::noise::{make_streams, NoiseSpec, NoiseStreams, UnitScales};
use crate::seed;
use crate::series::TimeSeries;

/// Fraction of clamped steps above which a warning is attached.
pub const CLAMP_WARNING_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Integration step (s).
    pub dt: f64,
    /// Simulated span including the transient (s).
    pub t_total: f64,
    /// Discarded initial span (s).
    pub t_transient: f64,
    /// Output decimation interval (s); an integer multiple of `dt`.
    pub sample_interval: f64,
    /// Spacing of the injected-noise grid (s); `None` uses `sample_interval`.
    pub noise_dt: Option<f64>,
    pub seed: u64,
    /// Relative amplitude of the seeded initial kick on R.
    pub init_perturbation: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.5e-12,
            t_total: 50e-6,
            t_transient: 2e-6,
            sample_interval: 100e-12,
            noise_dt: None,
            seed: 0,
            init_perturbation: 1e-3,
        }
    }
}

/// Step counts derived from a [`SimConfig`] and the feedback delay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepPlan {
    pub delay_steps: usize,
    pub sample_every: usize,
    pub transient_steps: u64,
    pub samples: usize,
    pub total_steps: u64,
}

impl SimConfig {
    pub fn noise_grid(&self) -> f64 {
        self.noise_dt.unwrap_or(self.sample_interval)
    }

    pub fn plan(&self, tau_ext: f64) -> Result<StepPlan> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{name} = {v} must be > 0")))
            }
        };
        pos("dt", self.dt)?;
        pos("t_total", self.t_total)?;
        pos("sample_interval", self.sample_interval)?;
        pos("noise_dt", self.noise_grid())?;
        if !(self.t_transient.is_finite() && self.t_transient >= 0.0) {
            return Err(Error::InvalidInput("t_transient must be >= 0".into()));
        }
        if self.t_total <= self.t_transient {
            return Err(Error::InvalidInput(
                "t_total must exceed t_transient".into(),
            ));
        }
        if !(self.init_perturbation.is_finite() && (0.0..1.0).contains(&self.init_perturbation)) {
            return Err(Error::InvalidInput(
                "init_perturbation must lie in [0, 1)".into(),
            ));
        }
        let ratio = self.sample_interval / self.dt;
        let sample_every = ratio.round() as usize;
        if sample_every == 0 || (ratio - sample_every as f64).abs() > 1e-6 * ratio {
            return Err(Error::InvalidInput(format!(
                "sample_interval {} is not an integer multiple of dt {}",
                self.sample_interval, self.dt
            )));
        }
        let delay_steps = (tau_ext / self.dt).round() as usize;
        if delay_steps < 2 {
            return Err(Error::InvalidInput(format!(
                "delay {tau_ext} s spans fewer than two steps of {} s",
                self.dt
            )));
        }
        let transient_samples = (self.t_transient / self.sample_interval).round() as u64;
        let samples =
            ((self.t_total - self.t_transient) / self.sample_interval + 1e-9).floor() as usize;
        if samples == 0 {
            return Err(Error::InvalidInput("no samples after transient".into()));
        }
        let transient_steps = transient_samples * sample_every as u64;
        Ok(StepPlan {
            delay_steps,
            sample_every,
            transient_steps,
            samples,
            total_steps: transient_steps + (samples * sample_every) as u64,
        })
    }
}

/// Past amplitude and phase over one delay time.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryBuffer {
    r: Vec<f64>,
    phi: Vec<f64>,
}

impl HistoryBuffer {
    /// Build from a function of time on `t = -delay_steps*dt .. -dt`.
    pub fn from_fn(delay_steps: usize, dt: f64, mut f: impl FnMut(f64) -> (f64, f64)) -> Self {
        let mut r = Vec::with_capacity(delay_steps);
        let mut phi = Vec::with_capacity(delay_steps);
        for j in 0..delay_steps {
            let t = (j as f64 - delay_steps as f64) * dt;
            let (a, b) = f(t);
            r.push(a);
            phi.push(b);
        }
        Self { r, phi }
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Entry for time `-delay + j*dt`.
    pub fn get(&self, j: usize) -> (f64, f64) {
        (self.r[j], self.phi[j])
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.r
    }

    pub fn phases(&self) -> &[f64] {
        &self.phi
    }

    /// Shift every stored phase by a constant.
    pub fn shift_phase(&mut self, delta: f64) {
        self.phi.iter_mut().for_each(|p| *p += delta);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Diagnostics {
    pub clamp_count: u64,
    pub steps: u64,
    pub delay_steps: usize,
    /// Delay actually realised on the step grid (s).
    pub achieved_delay: f64,
    pub wall_time_s: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Intensity R^2 at the sample interval.
    pub intensity: TimeSeries,
    pub diagnostics: Diagnostics,
    pub final_state: LaserState,
}

/// Initial state and history: solitary steady state with a seeded uniform
/// relative kick of size `init_perturbation` on every amplitude entry.
pub fn init_history(p: &LaserParams, cfg: &SimConfig) -> Result<(LaserState, HistoryBuffer)> {
    let plan = cfg.plan(p.tau_ext)?;
    let (r_s, n_s) = solitary_steady_state(p)?;
    let eps = cfg.init_perturbation;
    let mut rng = seed::rng(seed::derive(cfg.seed, &[0x6869_7374]));
    let mut kick = move || {
        if eps > 0.0 {
            r_s * (1.0 + eps * rng.random_range(-1.0..=1.0))
        } else {
            r_s
        }
    };
    let history = HistoryBuffer::from_fn(plan.delay_steps, cfg.dt, |_| (kick(), 0.0));
    let state = LaserState {
        r: kick(),
        phi: 0.0,
        n: n_s,
    };
    Ok((state, history))
}

/// Integrate from the default initial history.
pub fn integrate(
    p: &LaserParams,
    c: &DerivedConsts,
    streams: &NoiseStreams,
    cfg: &SimConfig,
) -> Result<Trajectory> {
    let (state, history) = init_history(p, cfg)?;
    integrate_from(p, c, streams, cfg, state, history)
}

/// Integrate from an explicit state and history. The history length must
/// equal the delay in steps.
pub fn integrate_from(
    p: &LaserParams,
    c: &DerivedConsts,
    streams: &NoiseStreams,
    cfg: &SimConfig,
    state: LaserState,
    history: HistoryBuffer,
) -> Result<Trajectory> {
    let start = Instant::now();
    let plan = cfg.plan(p.tau_ext)?;
    if history.len() != plan.delay_steps {
        return Err(Error::InvalidInput(format!(
            "history holds {} entries, delay needs {}",
            history.len(),
            plan.delay_steps
        )));
    }
    if !state.is_finite() {
        return Err(Error::InvalidInput("initial state is not finite".into()));
    }
    let dt = cfg.dt;
    let forced = streams.enabled;
    if forced {
        let needed = (plan.total_steps as f64 * dt / streams.dt).ceil() as usize + 2;
        if streams.len() < needed {
            return Err(Error::InvalidInput(format!(
                "noise streams hold {} points, run needs {needed}",
                streams.len()
            )));
        }
    }
    let inv_noise_dt = 1.0 / streams.dt;

    let white = p.noise_strength > 0.0;
    let white_sigma = (p.noise_strength * dt).sqrt();
    let mut rng = seed::rng(seed::derive(cfg.seed, &[0x7768_6974]));

    let HistoryBuffer {
        r: mut hist_r,
        phi: mut hist_phi,
    } = history;
    let d = plan.delay_steps;
    let floor = c.amplitude_floor;
    let half_dt = 0.5 * dt;

    let mut out = Vec::with_capacity(plan.samples);
    let mut clamps = 0u64;
    let (mut r, mut phi, mut n) = (state.r, state.phi, state.n);
    let mut slot = 0usize;
    // steps left until the next recorded sample
    let mut until_sample = plan.transient_steps + plan.sample_every as u64;

    for k in 0..plan.total_steps {
        let next_slot = if slot + 1 == d { 0 } else { slot + 1 };
        let (r_d0, phi_d0) = (hist_r[slot], hist_phi[slot]);
        let (r_d1, phi_d1) = (hist_r[next_slot], hist_phi[next_slot]);

        let (f_r, f_phi, f_n) = if forced {
            let u = (k as f64 + 0.5) * dt * inv_noise_dt;
            let i = u as usize;
            let w = u - i as f64;
            let lerp = |v: &[f64]| v[i] + w * (v[i + 1] - v[i]);
            (lerp(&streams.xi), lerp(&streams.eta), lerp(&streams.beta))
        } else {
            (0.0, 0.0, 0.0)
        };

        let a = drift_parts(r, phi, n, r_d0, phi_d0, c, p);
        let r_p = (r + dt * (a.dr + f_r)).max(floor);
        let phi_p = phi + dt * (a.dphi + f_phi);
        let n_p = n + dt * (a.dn + f_n);
        let b = drift_parts(r_p, phi_p, n_p, r_d1, phi_d1, c, p);

        let mut r_new = r + half_dt * (a.dr + b.dr) + dt * f_r;
        let mut phi_new = phi + half_dt * (a.dphi + b.dphi) + dt * f_phi;
        let mut n_new = n + half_dt * (a.dn + b.dn) + dt * f_n;
        if white {
            let z: [f64; 3] = [
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ];
            r_new += white_sigma * z[0];
            phi_new += white_sigma * z[1];
            n_new += white_sigma * z[2];
        }
        if !(r_new.is_finite() && phi_new.is_finite() && n_new.is_finite()) {
            return Err(Error::Diverged { step: k });
        }
        if r_new < floor {
            r_new = floor;
            clamps += 1;
        }

        hist_r[slot] = r;
        hist_phi[slot] = phi;
        slot = next_slot;
        r = r_new;
        phi = phi_new;
        n = n_new;

        until_sample -= 1;
        if until_sample == 0 {
            out.push(r * r);
            until_sample = plan.sample_every as u64;
        }
    }
    debug_assert_eq!(out.len(), plan.samples);

    let mut warnings = Vec::new();
    if clamps as f64 > CLAMP_WARNING_FRACTION * plan.total_steps as f64 {
        warnings.push(format!(
            "amplitude floor clamped on {clamps} of {} steps",
            plan.total_steps
        ));
    }
    Ok(Trajectory {
        intensity: TimeSeries::new(out, plan.sample_every as f64 * dt)?,
        diagnostics: Diagnostics {
            clamp_count: clamps,
            steps: plan.total_steps,
            delay_steps: d,
            achieved_delay: d as f64 * dt,
            wall_time_s: start.elapsed().as_secs_f64(),
            warnings,
        },
        final_state: LaserState { r, phi, n },
    })
}

/// Everything needed to reproduce one simulated record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub laser: LaserParams,
    pub noise: NoiseSpec,
    pub sim: SimConfig,
    pub analysis: AnalysisConfig,
}

impl RunConfig {
    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub sim_seed: u64,
    pub noise_seed: u64,
    pub noise_enabled: bool,
    pub target_qgsr_db: f64,
    pub actual_qgsr_db: Option<f64>,
    pub achieved_delay: f64,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub metrics: AnalysisReport,
    pub provenance: Provenance,
}

/// The forcing streams a configuration integrates against, covering the whole
/// run on the coarse noise grid.
pub fn streams_for(cfg: &RunConfig) -> Result<NoiseStreams> {
    let plan = cfg.sim.plan(cfg.laser.tau_ext)?;
    let noise_dt = cfg.sim.noise_grid();
    if !cfg.noise.enabled {
        return Ok(NoiseStreams::zeros(0, noise_dt));
    }
    let n_noise = (plan.total_steps as f64 * cfg.sim.dt / noise_dt).ceil() as usize + 2;
    make_streams(
        &cfg.noise,
        &UnitScales::from_params(&cfg.laser)?,
        n_noise,
        noise_dt,
    )
}

/// Streams, integration and analysis for one configuration.
pub fn run_experiment(cfg: &RunConfig) -> Result<(Trajectory, ExperimentReport)> {
    let p = &cfg.laser;
    let c = DerivedConsts::new(p)?;
    let streams = streams_for(cfg)?;
    let traj = integrate(p, &c, &streams, &cfg.sim)?;
    let metrics = analyze_with(&traj.intensity, p.tau_ext, &cfg.analysis)?;
    let report = ExperimentReport {
        metrics,
        provenance: Provenance {
            config_hash: cfg.hash(),
            sim_seed: cfg.sim.seed,
            noise_seed: cfg.noise.seed,
            noise_enabled: cfg.noise.enabled,
            target_qgsr_db: cfg.noise.qgsr_db,
            actual_qgsr_db: streams.actual_qgsr_db,
            achieved_delay: traj.diagnostics.achieved_delay,
            diagnostics: Diagnostics {
                wall_time_s: 0.0,
                ..traj.diagnostics.clone()
            },
        },
    };
    Ok((traj, report))
}
