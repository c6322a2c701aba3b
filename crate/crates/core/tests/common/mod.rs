#![allow(dead_code)]

use lkchaos::integrator::{integrate_from, HistoryBuffer, RunConfig, SimConfig, Trajectory};
use lkchaos::model::{solitary_steady_state, DerivedConsts, LaserParams, LaserState};
use lkchaos::noise::NoiseStreams;

/// Short noiseless run from a smooth analytic history.
pub fn smooth_start(p: &LaserParams, dt: f64, span: f64, phase_shift: f64) -> Trajectory {
    let c = DerivedConsts::new(p).unwrap();
    let (r_s, n_s) = solitary_steady_state(p).unwrap();
    let cfg = SimConfig {
        dt,
        t_total: span,
        t_transient: 0.0,
        sample_interval: 10e-12,
        init_perturbation: 0.0,
        ..SimConfig::default()
    };
    let plan = cfg.plan(p.tau_ext).unwrap();
    let f = |t: f64| {
        let w = 2.0 * std::f64::consts::PI;
        (
            r_s * (1.0 + 0.05 * (w * t / 3e-9).sin()),
            0.3 * (w * t / 7e-9).sin() + phase_shift,
        )
    };
    let history = HistoryBuffer::from_fn(plan.delay_steps, dt, f);
    let (r0, phi0) = f(0.0);
    let state = LaserState {
        r: r0,
        phi: phi0,
        n: n_s,
    };
    integrate_from(
        p,
        &c,
        &NoiseStreams::zeros(0, 100e-12),
        &cfg,
        state,
        history,
    )
    .unwrap()
}

/// Largest intensity difference between step `dt` and `dt/2`, relative to
/// the mean intensity.
pub fn dt_halving_deviation(p: &LaserParams, dt: f64, span: f64) -> f64 {
    let a = smooth_start(p, dt, span, 0.0);
    let b = smooth_start(p, dt / 2.0, span, 0.0);
    assert_eq!(a.intensity.len(), b.intensity.len());
    let scale = b.intensity.mean();
    a.intensity
        .samples
        .iter()
        .zip(&b.intensity.samples)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
        / scale
}

/// A configuration small enough for quick harness checks.
pub fn tiny_config() -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.sim.t_total = 1.0e-6;
    cfg.sim.t_transient = 0.2e-6;
    cfg.analysis.welch_segment = 1024;
    cfg.analysis.pe_lag = Some(50);
    cfg
}
