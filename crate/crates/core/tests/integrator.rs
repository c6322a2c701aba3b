mod common;

use std::time::Instant;

use common::{dt_halving_deviation, smooth_start};
use lkchaos::analysis::{acf, tds_metric};
use lkchaos::integrator::run_experiment;
use lkchaos::model::LaserParams;
use lkchaos::RunConfig;

#[test]
fn halving_the_step_changes_little() {
    let dev = dt_halving_deviation(&LaserParams::default(), 0.5e-12, 1e-9);
    assert!(dev < 1e-3, "deviation {dev}");
}

#[test]
fn constant_phase_shift_leaves_intensity_unchanged() {
    let p = LaserParams::default();
    let a = smooth_start(&p, 0.5e-12, 2e-9, 0.0);
    let b = smooth_start(&p, 0.5e-12, 2e-9, 1.234);
    let scale = a.intensity.mean();
    for (x, y) in a.intensity.samples.iter().zip(&b.intensity.samples) {
        assert!((x - y).abs() / scale < 1e-9, "{x} vs {y}");
    }
    assert!((b.final_state.phi - a.final_state.phi - 1.234).abs() < 1e-6);
}

#[test]
fn feedback_delay_shows_in_autocorrelation() {
    let mut cfg = RunConfig::default();
    cfg.noise.enabled = false;
    cfg.sim.t_total = 10e-6;
    cfg.sim.t_transient = 1e-6;
    let (traj, report) = run_experiment(&cfg).unwrap();
    let curve = acf(&traj.intensity, 100e-9).unwrap();
    let (cp, lag) = tds_metric(&curve, 86.7e-9, 2e-9).unwrap();
    assert!((lag - 86.7e-9).abs() <= 0.5e-9, "peak at {lag}");
    assert!(cp > 0.25, "{cp}");
    assert_eq!(report.provenance.achieved_delay, 173_400.0 * 0.5e-12);
}

#[test]
fn runs_are_reproducible() {
    let cfg = common::tiny_config();
    let (a, ra) = run_experiment(&cfg).unwrap();
    let (b, rb) = run_experiment(&cfg).unwrap();
    assert_eq!(a.intensity, b.intensity);
    assert_eq!(ra, rb);

    let mut other = cfg.clone();
    other.noise.seed += 1;
    let (c, _) = run_experiment(&other).unwrap();
    assert_ne!(a.intensity, c.intensity);
    let mut other = cfg;
    other.sim.seed += 1;
    let (d, _) = run_experiment(&other).unwrap();
    assert_ne!(a.intensity, d.intensity);
}

#[test]
fn cost_grows_linearly_with_span() {
    let mut cfg = common::tiny_config();
    cfg.noise.enabled = false;
    let time = |span: f64| {
        let mut c = cfg.clone();
        c.sim.t_total = span;
        let t = Instant::now();
        run_experiment(&c).unwrap();
        t.elapsed().as_secs_f64()
    };
    time(0.5e-6);
    let short = time(1e-6);
    let long = time(4e-6);
    let ratio = long / short;
    assert!((2.0..8.0).contains(&ratio), "ratio {ratio}");
}
