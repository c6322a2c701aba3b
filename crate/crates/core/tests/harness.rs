mod common;

use std::fs;

use lkchaos::harness::{
    preset, read_rows, run_point, run_sweep, SweepAxis, SweepOptions, SweepPlan,
};
use lkchaos::integrator::run_experiment;

fn small_plan() -> SweepPlan {
    SweepPlan {
        name: "small".into(),
        axis: SweepAxis::Qgsr,
        qgsr_values: vec![9.0, 16.0],
        bandwidth_values: vec![100e6],
        replicas: 2,
        base_seed: 17,
        noise_enabled: true,
        reference_baseline: true,
        base: common::tiny_config(),
    }
}

/// CSV text with the wall-time column blanked.
fn strip_wall_time(path: &std::path::Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn serial_and_parallel_sweeps_agree() {
    let dir = tempfile::tempdir().unwrap();
    let serial_path = dir.path().join("serial.csv");
    let parallel_path = dir.path().join("parallel.csv");
    let plan = small_plan();
    let a = run_sweep(
        &plan,
        &SweepOptions {
            jobs: Some(1),
            out: Some(serial_path.clone()),
        },
    )
    .unwrap();
    let b = run_sweep(
        &plan,
        &SweepOptions {
            jobs: Some(3),
            out: Some(parallel_path.clone()),
        },
    )
    .unwrap();
    assert_eq!(a.rows.len(), 2);
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert_eq!(x.cp_mean.to_bits(), y.cp_mean.to_bits());
        assert_eq!(x.h_mean.to_bits(), y.h_mean.to_bits());
        assert_eq!(x.config_hash, y.config_hash);
    }
    assert_eq!(
        strip_wall_time(&serial_path),
        strip_wall_time(&parallel_path)
    );
    assert_eq!(a.baseline, b.baseline);
    let base = a.baseline.unwrap();
    let qcbr = a.rows[0].qcbr.unwrap();
    assert!((qcbr - 100e6 / base.bw80_mean).abs() < 1e-15);
    assert!(dir.path().join("serial.csv.baseline.json").exists());
}

#[test]
fn sweep_row_equals_direct_point_run() {
    let mut plan = small_plan();
    plan.qgsr_values = vec![12.0];
    plan.reference_baseline = false;
    let res = run_sweep(
        &plan,
        &SweepOptions {
            jobs: Some(1),
            out: None,
        },
    )
    .unwrap();
    let pt = plan.points()[0];
    let cfgs: Vec<_> = (0..plan.replicas)
        .map(|r| plan.config_for(&pt, r))
        .collect();
    let direct = run_point(&cfgs, None).unwrap();
    let mut a = res.rows[0].clone();
    let mut b = direct.row;
    a.wall_time_s = 0.0;
    b.wall_time_s = 0.0;
    assert_eq!(a, b);
    assert!(a.qcbr.is_none());

    // and one replica equals a bare experiment run
    let (_, rep) = run_experiment(&cfgs[0]).unwrap();
    assert_eq!(rep, direct.reports[0]);
}

#[test]
fn disabled_noise_reproduces_the_baseline() {
    let mut plan = small_plan();
    plan.noise_enabled = false;
    plan.qgsr_values = vec![16.0];
    let res = run_sweep(
        &plan,
        &SweepOptions {
            jobs: Some(1),
            out: None,
        },
    )
    .unwrap();
    // same physics, different seeds: only the initial kick differs, so the
    // metrics agree statistically but not bitwise
    let base = res.baseline.unwrap();
    let row = &res.rows[0];
    assert!((row.cp_mean - base.cp_mean).abs() < 0.3);

    // with matching seeds the two are identical
    let pt = plan.points()[0];
    let mut cfg = plan.config_for(&pt, 0);
    let b = plan.baseline_config(0);
    cfg.sim.seed = b.sim.seed;
    let (_, r1) = run_experiment(&cfg).unwrap();
    let (_, r2) = run_experiment(&b).unwrap();
    assert_eq!(r1.metrics, r2.metrics);
}

#[test]
fn interrupted_sweep_resumes_without_rerunning() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let plan = small_plan();

    // first pass covers only the first point
    let mut first = plan.clone();
    first.qgsr_values = vec![9.0];
    run_sweep(
        &first,
        &SweepOptions {
            jobs: Some(1),
            out: Some(out.clone()),
        },
    )
    .unwrap();
    let partial = read_rows(&out).unwrap();
    assert_eq!(partial.len(), 1);

    // the shared point is reused by the larger plan
    let full = run_sweep(
        &plan,
        &SweepOptions {
            jobs: Some(1),
            out: Some(out.clone()),
        },
    )
    .unwrap();
    assert_eq!(full.rows.len(), 2);
    assert_eq!(full.resumed, 1);
    assert_eq!(full.rows[0].cp_mean.to_bits(), partial[0].cp_mean.to_bits());

    // a rerun of the identical plan reuses every row
    let before = fs::read(&out).unwrap();
    let again = run_sweep(
        &plan,
        &SweepOptions {
            jobs: Some(1),
            out: Some(out.clone()),
        },
    )
    .unwrap();
    assert_eq!(again.resumed, 2);
    assert_eq!(again.rows, full.rows);
    assert_eq!(fs::read(&out).unwrap(), before);

    // drop one row and resume: only it is recomputed, bit-identically
    let rows = read_rows(&out).unwrap();
    lkchaos::harness::write_rows(&out, &rows[..1]).unwrap();
    let resumed = run_sweep(
        &plan,
        &SweepOptions {
            jobs: Some(1),
            out: Some(out.clone()),
        },
    )
    .unwrap();
    assert_eq!(resumed.resumed, 1);
    assert_eq!(
        resumed.rows[1].cp_mean.to_bits(),
        full.rows[1].cp_mean.to_bits()
    );
}

#[test]
fn presets_validate() {
    for name in lkchaos::harness::PRESET_NAMES {
        preset(name).unwrap().validate().unwrap();
    }
}
