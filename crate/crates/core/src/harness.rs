//! Sweep orchestration: presets, seed derivation, replica aggregation and
//! CSV persistence.
//!
//! Every (point, replica) pair is an independent task. Seeds are derived from
//! `(base_seed, point index, replica index)` so results do not depend on the
//! number of workers or the order in which tasks finish.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{run_experiment, ExperimentReport, RunConfig};
use crate::noise::NoiseSpec;
use crate::seed;

/// Environment variable consulted for the default worker count.
pub const JOBS_ENV: &str = "LKCHAOS_JOBS";

pub const DEFAULT_QGSR_VALUES: [f64; 6] = [9.0, 10.5, 12.0, 13.5, 15.0, 16.0];
pub const DEFAULT_BANDWIDTHS: [f64; 5] = [100e6, 200e6, 300e6, 400e6, 500e6];
pub const QCBR_BANDWIDTHS: [f64; 6] = [50e6, 100e6, 200e6, 300e6, 400e6, 500e6];

/// Experimental reference values (oscilloscope measurements), used only to
/// annotate reports.
pub mod reference {
    pub const CP_ORIGINAL: f64 = 0.374;
    pub const CP_INJECTED: f64 = 0.023;
    pub const PE_ORIGINAL: f64 = 0.983;
    pub const PE_INJECTED: f64 = 0.999;
    pub const SKEW_ORIGINAL: f64 = 0.529;
    pub const SKEW_NOISE: f64 = 0.001;
    pub const SKEW_INJECTED: f64 = 0.011;
    pub const CP_THEORY_MIN: f64 = 0.020;
    pub const CHAOS_BW80_HZ: f64 = 2.5e9;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    /// Rows grouped by bandwidth, QGSR varying fastest.
    Qgsr,
    /// Rows grouped by QGSR, bandwidth varying fastest.
    Qcbr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPlan {
    #[serde(default)]
    pub name: String,
    pub axis: SweepAxis,
    pub qgsr_values: Vec<f64>,
    pub bandwidth_values: Vec<f64>,
    pub replicas: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Whether the injected noise is switched on at every point.
    #[serde(default = "yes")]
    pub noise_enabled: bool,
    /// Run a noiseless baseline first and report QCBR against its BW80.
    #[serde(default)]
    pub reference_baseline: bool,
    /// Laser, noise template, integration and analysis settings.
    #[serde(default)]
    pub base: RunConfig,
}

fn yes() -> bool {
    true
}

/// One grid point of a plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub bandwidth: f64,
    pub qgsr_db: f64,
}

impl SweepPlan {
    pub fn validate(&self) -> Result<()> {
        if self.qgsr_values.is_empty() || self.bandwidth_values.is_empty() {
            return Err(Error::InvalidInput("sweep axes must be non-empty".into()));
        }
        if self.replicas == 0 {
            return Err(Error::InvalidInput("replicas must be >= 1".into()));
        }
        self.base.laser.validate()?;
        self.base.sim.plan(self.base.laser.tau_ext)?;
        for pt in self.points() {
            self.config_for(&pt, 0)
                .noise
                .validate(self.base.sim.noise_grid())?;
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<SweepPoint> {
        let mut out = Vec::new();
        match self.axis {
            SweepAxis::Qgsr => {
                for &b in &self.bandwidth_values {
                    for &q in &self.qgsr_values {
                        out.push((b, q));
                    }
                }
            }
            SweepAxis::Qcbr => {
                for &q in &self.qgsr_values {
                    for &b in &self.bandwidth_values {
                        out.push((b, q));
                    }
                }
            }
        }
        out.into_iter()
            .enumerate()
            .map(|(index, (bandwidth, qgsr_db))| SweepPoint {
                index,
                bandwidth,
                qgsr_db,
            })
            .collect()
    }

    /// `(sim_seed, noise_seed)` for a replica of a point. Seeds follow the
    /// point's bandwidth and QGSR rather than its position, so the same grid
    /// point in two plans gets the same runs.
    pub fn seeds(&self, pt: &SweepPoint, replica: usize) -> (u64, u64) {
        let key = [pt.bandwidth.to_bits(), pt.qgsr_db.to_bits(), replica as u64];
        (
            seed::derive(self.base_seed, &[key[0], key[1], key[2], 1]),
            seed::derive(self.base_seed, &[key[0], key[1], key[2], 2]),
        )
    }

    pub fn baseline_seeds(&self, replica: usize) -> (u64, u64) {
        (
            seed::derive(self.base_seed, &[u64::MAX, replica as u64, 1]),
            seed::derive(self.base_seed, &[u64::MAX, replica as u64, 2]),
        )
    }

    /// Full run configuration for one replica of one point.
    pub fn config_for(&self, pt: &SweepPoint, replica: usize) -> RunConfig {
        let (sim_seed, noise_seed) = self.seeds(pt, replica);
        let mut cfg = self.base.clone();
        cfg.sim.seed = sim_seed;
        cfg.noise = NoiseSpec {
            bandwidth: pt.bandwidth,
            qgsr_db: pt.qgsr_db,
            seed: noise_seed,
            enabled: self.noise_enabled,
            ..self.base.noise
        };
        cfg
    }

    pub fn baseline_config(&self, replica: usize) -> RunConfig {
        let (sim_seed, noise_seed) = self.baseline_seeds(replica);
        let mut cfg = self.base.clone();
        cfg.sim.seed = sim_seed;
        cfg.noise = NoiseSpec {
            seed: noise_seed,
            enabled: false,
            ..self.base.noise
        };
        cfg
    }

    /// Hash identifying everything that determines a point's row.
    pub fn point_hash(&self, pt: &SweepPoint) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for r in 0..self.replicas {
            h.update(self.config_for(pt, r).hash().as_bytes());
        }
        hex::encode(h.finalize())[..16].to_string()
    }

    fn baseline_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for r in 0..self.replicas {
            h.update(self.baseline_config(r).hash().as_bytes());
        }
        hex::encode(h.finalize())[..16].to_string()
    }
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Aggregated metrics for one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub bandwidth_hz: f64,
    pub qgsr_db: f64,
    /// Noise bandwidth over the baseline chaos bandwidth; empty without a
    /// reference baseline.
    pub qcbr: Option<f64>,
    pub cp_mean: f64,
    pub cp_std: f64,
    pub h_mean: f64,
    pub h_std: f64,
    pub bw80_hz: f64,
    pub bw80_std: f64,
    pub skew: f64,
    pub skew_std: f64,
    /// `sim:noise` seed pairs joined with `;`.
    pub seeds: String,
    pub replicas_ok: usize,
    pub failures: String,
    pub config_hash: String,
    pub wall_time_s: f64,
}

impl SweepRow {
    pub fn is_flagged(&self) -> bool {
        !self.failures.is_empty()
    }
}

/// A replica's result and its wall time.
type Outcome = (Result<ExperimentReport>, f64);

/// Metrics of each replica, kept for callers that want more than mean/std.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub row: SweepRow,
    pub reports: Vec<ExperimentReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub bw80_mean: f64,
    pub bw80_std: f64,
    pub cp_mean: f64,
    pub cp_std: f64,
    pub h_mean: f64,
    pub h_std: f64,
    pub hash: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub plan: SweepPlan,
    pub baseline: Option<Baseline>,
    /// Rows in point order.
    pub rows: Vec<SweepRow>,
    /// Points whose rows were taken from an earlier output file.
    pub resumed: usize,
    pub failures: Vec<String>,
}

/// Run every replica of one configuration and aggregate. A replica that fails
/// is listed in the row's `failures` column; the others are kept.
pub fn run_point(configs: &[RunConfig], baseline_bw80: Option<f64>) -> Result<PointResult> {
    if configs.is_empty() {
        return Err(Error::InvalidInput(
            "run_point needs at least one replica".into(),
        ));
    }
    let outcomes: Vec<Outcome> = configs
        .par_iter()
        .map(|cfg| {
            let t = Instant::now();
            let r = run_experiment(cfg).map(|(_, rep)| rep);
            (r, t.elapsed().as_secs_f64())
        })
        .collect();
    Ok(aggregate(configs, outcomes, baseline_bw80))
}

fn aggregate(
    configs: &[RunConfig],
    outcomes: Vec<Outcome>,
    baseline_bw80: Option<f64>,
) -> PointResult {
    let first = &configs[0];
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    let mut wall = 0.0;
    for (i, (res, t)) in outcomes.into_iter().enumerate() {
        wall += t;
        match res {
            Ok(r) => reports.push(r),
            Err(e) => failures.push(format!("replica {i}: {e}")),
        }
    }
    let pick = |f: fn(&ExperimentReport) -> f64| -> Vec<f64> { reports.iter().map(f).collect() };
    let (cp_mean, cp_std) = mean_std(&pick(|r| r.metrics.cp));
    let (h_mean, h_std) = mean_std(&pick(|r| r.metrics.pe));
    let (bw80_hz, bw80_std) = mean_std(&pick(|r| r.metrics.bw80));
    let (skew, skew_std) = mean_std(&pick(|r| r.metrics.skewness));
    let seeds = configs
        .iter()
        .map(|c| format!("{}:{}", c.sim.seed, c.noise.seed))
        .collect::<Vec<_>>()
        .join(";");
    let config_hash = {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for c in configs {
            h.update(c.hash().as_bytes());
        }
        hex::encode(h.finalize())[..16].to_string()
    };
    let qcbr = baseline_bw80.map(|bw| first.noise.bandwidth / bw);
    PointResult {
        row: SweepRow {
            bandwidth_hz: first.noise.bandwidth,
            qgsr_db: first.noise.qgsr_db,
            qcbr,
            cp_mean,
            cp_std,
            h_mean,
            h_std,
            bw80_hz,
            bw80_std,
            skew,
            skew_std,
            seeds,
            replicas_ok: reports.len(),
            failures: failures.join(" | "),
            config_hash,
            wall_time_s: wall,
        },
        reports,
    }
}

#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    /// Worker threads; `None` reads [`JOBS_ENV`] and falls back to all cores.
    pub jobs: Option<usize>,
    /// CSV destination. Rows already present with a matching hash are reused.
    pub out: Option<PathBuf>,
}

pub fn default_jobs() -> usize {
    std::env::var(JOBS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&j| j > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn baseline_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".baseline.json");
    PathBuf::from(s)
}

/// Execute a plan. With an output path, the CSV is rewritten atomically after
/// every completed point and completed rows are skipped on a rerun.
pub fn run_sweep(plan: &SweepPlan, opts: &SweepOptions) -> Result<SweepResult> {
    plan.validate()?;
    let jobs = opts.jobs.unwrap_or_else(default_jobs).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    pool.install(|| sweep_in_pool(plan, opts))
}

fn sweep_in_pool(plan: &SweepPlan, opts: &SweepOptions) -> Result<SweepResult> {
    let points = plan.points();
    let hashes: Vec<String> = points.iter().map(|p| plan.point_hash(p)).collect();

    let mut done: BTreeMap<usize, SweepRow> = BTreeMap::new();
    let mut baseline: Option<Baseline> = None;
    if let Some(out) = &opts.out {
        if out.exists() {
            let previous = read_rows(out)?;
            for (i, pt) in points.iter().enumerate() {
                if let Some(row) = previous
                    .iter()
                    .find(|r| r.config_hash == hashes[i] && !r.is_flagged())
                {
                    done.insert(pt.index, row.clone());
                }
            }
        }
        let bpath = baseline_path(out);
        if plan.reference_baseline && bpath.exists() {
            let b: Baseline = serde_json::from_slice(&fs::read(&bpath)?)?;
            if b.hash == plan.baseline_hash() {
                baseline = Some(b);
            }
        }
    }
    let resumed = done.len();

    if plan.reference_baseline && baseline.is_none() {
        let cfgs: Vec<RunConfig> = (0..plan.replicas)
            .map(|r| plan.baseline_config(r))
            .collect();
        let res = run_point(&cfgs, None)?;
        if res.row.replicas_ok == 0 {
            return Err(Error::InvalidInput(format!(
                "noiseless baseline failed: {}",
                res.row.failures
            )));
        }
        let b = Baseline {
            bw80_mean: res.row.bw80_hz,
            bw80_std: res.row.bw80_std,
            cp_mean: res.row.cp_mean,
            cp_std: res.row.cp_std,
            h_mean: res.row.h_mean,
            h_std: res.row.h_std,
            hash: plan.baseline_hash(),
        };
        if let Some(out) = &opts.out {
            write_atomic(&baseline_path(out), &serde_json::to_vec_pretty(&b)?)?;
        }
        baseline = Some(b);
    }
    let bw_ref = baseline.as_ref().map(|b| b.bw80_mean);
    // rows restored from disk carry the QCBR they were written with
    for row in done.values_mut() {
        row.qcbr = bw_ref.map(|bw| row.bandwidth_hz / bw);
    }

    let pending: Vec<SweepPoint> = points
        .iter()
        .filter(|p| !done.contains_key(&p.index))
        .copied()
        .collect();
    let tasks: Vec<(SweepPoint, usize)> = pending
        .iter()
        .flat_map(|p| (0..plan.replicas).map(move |r| (*p, r)))
        .collect();

    struct Progress {
        partial: BTreeMap<usize, Vec<Option<Outcome>>>,
        rows: BTreeMap<usize, SweepRow>,
        write_error: Option<Error>,
    }
    let progress = Mutex::new(Progress {
        partial: BTreeMap::new(),
        rows: done,
        write_error: None,
    });

    tasks.par_iter().for_each(|(pt, r)| {
        let cfg = plan.config_for(pt, *r);
        let t = Instant::now();
        let res = run_experiment(&cfg).map(|(_, rep)| rep);
        let elapsed = t.elapsed().as_secs_f64();

        let mut guard = progress.lock().unwrap();
        let g = &mut *guard;
        let slots = g
            .partial
            .entry(pt.index)
            .or_insert_with(|| (0..plan.replicas).map(|_| None).collect());
        slots[*r] = Some((res, elapsed));
        if slots.iter().all(Option::is_some) {
            let outcomes: Vec<_> = g
                .partial
                .remove(&pt.index)
                .unwrap()
                .into_iter()
                .flatten()
                .collect();
            let cfgs: Vec<RunConfig> = (0..plan.replicas).map(|k| plan.config_for(pt, k)).collect();
            let row = aggregate(&cfgs, outcomes, bw_ref).row;
            g.rows.insert(pt.index, row);
            if let Some(out) = &opts.out {
                let rows: Vec<SweepRow> = g.rows.values().cloned().collect();
                if let Err(e) = write_rows(out, &rows) {
                    g.write_error.get_or_insert(e);
                }
            }
        }
    });

    let progress = progress.into_inner().unwrap();
    if let Some(e) = progress.write_error {
        return Err(e);
    }
    let rows: Vec<SweepRow> = progress.rows.into_values().collect();
    let failures = rows
        .iter()
        .filter(|r| r.is_flagged())
        .map(|r| {
            format!(
                "B={} Hz QGSR={} dB: {}",
                r.bandwidth_hz, r.qgsr_db, r.failures
            )
        })
        .collect();
    Ok(SweepResult {
        plan: plan.clone(),
        baseline,
        rows,
        resumed,
        failures,
    })
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub const CSV_HEADER: [&str; 16] = [
    "bandwidth_hz",
    "qgsr_db",
    "qcbr",
    "cp_mean",
    "cp_std",
    "h_mean",
    "h_std",
    "bw80_hz",
    "skew",
    "seeds",
    "bw80_std",
    "skew_std",
    "replicas_ok",
    "failures",
    "config_hash",
    "wall_time_s",
];

pub fn rows_to_csv(rows: &[SweepRow]) -> Result<Vec<u8>> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(CSV_HEADER)?;
    for r in rows {
        wtr.write_record([
            format!("{:e}", r.bandwidth_hz),
            format!("{}", r.qgsr_db),
            r.qcbr.map(|q| format!("{q:e}")).unwrap_or_default(),
            format!("{:e}", r.cp_mean),
            format!("{:e}", r.cp_std),
            format!("{:e}", r.h_mean),
            format!("{:e}", r.h_std),
            format!("{:e}", r.bw80_hz),
            format!("{:e}", r.skew),
            r.seeds.clone(),
            format!("{:e}", r.bw80_std),
            format!("{:e}", r.skew_std),
            r.replicas_ok.to_string(),
            r.failures.clone(),
            r.config_hash.clone(),
            format!("{}", r.wall_time_s),
        ])?;
    }
    wtr.flush()?;
    wtr.into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

pub fn write_rows(path: &Path, rows: &[SweepRow]) -> Result<()> {
    write_atomic(path, &rows_to_csv(rows)?)
}

pub fn read_rows(path: &Path) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let f = |i: usize| -> Result<f64> {
            rec.get(i)
                .unwrap_or("")
                .parse::<f64>()
                .map_err(|e| Error::InvalidInput(format!("column {}: {e}", CSV_HEADER[i])))
        };
        let qcbr = match rec.get(2).unwrap_or("") {
            "" => None,
            s => Some(
                s.parse::<f64>()
                    .map_err(|e| Error::InvalidInput(format!("qcbr: {e}")))?,
            ),
        };
        rows.push(SweepRow {
            bandwidth_hz: f(0)?,
            qgsr_db: f(1)?,
            qcbr,
            cp_mean: f(3)?,
            cp_std: f(4)?,
            h_mean: f(5)?,
            h_std: f(6)?,
            bw80_hz: f(7)?,
            skew: f(8)?,
            seeds: rec.get(9).unwrap_or("").to_string(),
            bw80_std: f(10)?,
            skew_std: f(11)?,
            replicas_ok: rec.get(12).unwrap_or("0").parse().unwrap_or(0),
            failures: rec.get(13).unwrap_or("").to_string(),
            config_hash: rec.get(14).unwrap_or("").to_string(),
            wall_time_s: f(15)?,
        });
    }
    Ok(rows)
}

pub const PRESET_NAMES: [&str; 6] = [
    "fig2_baseline",
    "fig2_injected",
    "fig3a",
    "fig3b",
    "fig3c",
    "fig3d",
];

pub fn preset_description(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig2_baseline" => "noiseless chaos at kappa = 5/ns, rho = 1.35 (control case)",
        "fig2_injected" => "chaos with 100 MHz, 16 dB band-limited noise injection",
        "fig3a" => "C_p versus QGSR for five noise bandwidths",
        "fig3b" => "H versus QGSR for five noise bandwidths",
        "fig3c" => "C_p versus QCBR for six QGSR levels",
        "fig3d" => "H versus QCBR for six QGSR levels",
        _ => return None,
    })
}

/// Frozen plan for a named operating point.
pub fn preset(name: &str) -> Result<SweepPlan> {
    let base = RunConfig::default();
    let single = |enabled: bool| SweepPlan {
        name: name.to_string(),
        axis: SweepAxis::Qgsr,
        qgsr_values: vec![16.0],
        bandwidth_values: vec![100e6],
        replicas: 5,
        base_seed: 0,
        noise_enabled: enabled,
        reference_baseline: false,
        base: base.clone(),
    };
    let plan = match name {
        "fig2_baseline" => single(false),
        "fig2_injected" => single(true),
        "fig3a" | "fig3b" => SweepPlan {
            name: name.to_string(),
            axis: SweepAxis::Qgsr,
            qgsr_values: DEFAULT_QGSR_VALUES.to_vec(),
            bandwidth_values: DEFAULT_BANDWIDTHS.to_vec(),
            replicas: 5,
            base_seed: 0,
            noise_enabled: true,
            reference_baseline: true,
            base: base.clone(),
        },
        "fig3c" | "fig3d" => SweepPlan {
            name: name.to_string(),
            axis: SweepAxis::Qcbr,
            qgsr_values: DEFAULT_QGSR_VALUES.to_vec(),
            bandwidth_values: QCBR_BANDWIDTHS.to_vec(),
            replicas: 5,
            base_seed: 0,
            noise_enabled: true,
            reference_baseline: true,
            base: base.clone(),
        },
        _ => {
            return Err(Error::UnknownPreset {
                name: name.to_string(),
                valid: PRESET_NAMES.join(", "),
            })
        }
    };
    Ok(plan)
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let (mx, _) = mean_std(&rx);
    let (my, _) = mean_std(&ry);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_base() -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.sim.t_total = 1.0e-6;
        cfg.sim.t_transient = 0.2e-6;
        cfg.analysis.welch_segment = 1024;
        cfg.analysis.pe_lag = Some(50);
        cfg
    }

    #[test]
    fn preset_values() {
        let p = preset("fig2_injected").unwrap();
        assert_eq!(p.points().len(), 1);
        let cfg = p.config_for(&p.points()[0], 0);
        assert!(cfg.noise.enabled);
        assert_eq!(cfg.noise.bandwidth, 100e6);
        assert_eq!(cfg.noise.qgsr_db, 16.0);
        assert_eq!(cfg.laser.kappa, 5e9);
        assert_eq!(cfg.laser.pump_factor, 1.35);
        assert_eq!(cfg.laser.tau_ext, 86.7e-9);

        let b = preset("fig2_baseline").unwrap();
        assert!(!b.config_for(&b.points()[0], 0).noise.enabled);

        for name in ["fig3c", "fig3d"] {
            let p = preset(name).unwrap();
            assert_eq!(p.axis, SweepAxis::Qcbr);
            assert_eq!(p.qgsr_values, vec![9.0, 10.5, 12.0, 13.5, 15.0, 16.0]);
            assert_eq!(p.points().len(), 36);
        }
        let a = preset("fig3a").unwrap();
        assert_eq!(a.points().len(), 30);
        assert_eq!(a.replicas, 5);
    }

    #[test]
    fn unknown_preset_lists_valid_names() {
        match preset("fig9") {
            Err(Error::UnknownPreset { valid, .. }) => {
                for n in PRESET_NAMES {
                    assert!(valid.contains(n));
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let p = preset("fig3a").unwrap();
        let mut all = std::collections::HashSet::new();
        for pt in p.points() {
            for r in 0..5 {
                let (a, b) = p.seeds(&pt, r);
                assert!(all.insert(a));
                assert!(all.insert(b));
                assert_eq!((a, b), p.seeds(&pt, r));
            }
        }
        for r in 0..5 {
            let (a, b) = p.baseline_seeds(r);
            assert!(all.insert(a) && all.insert(b));
        }
        let pt = p.points()[0];
        let q = SweepPlan {
            base_seed: 1,
            ..p.clone()
        };
        assert_ne!(p.seeds(&pt, 0), q.seeds(&pt, 0));

        // shared grid points get the same configuration in every preset
        let c = preset("fig3c").unwrap();
        let shared = c
            .points()
            .into_iter()
            .filter(|x| x.bandwidth >= 100e6)
            .count();
        assert_eq!(shared, 30);
        for x in c.points().into_iter().filter(|x| x.bandwidth >= 100e6) {
            let y = p
                .points()
                .into_iter()
                .find(|y| y.bandwidth == x.bandwidth && y.qgsr_db == x.qgsr_db)
                .unwrap();
            assert_eq!(c.point_hash(&x), p.point_hash(&y));
        }
    }

    #[test]
    fn point_order_follows_axis() {
        let mut p = preset("fig3a").unwrap();
        p.qgsr_values = vec![1.0, 2.0];
        p.bandwidth_values = vec![10e6, 20e6];
        let pts: Vec<(f64, f64)> = p
            .points()
            .iter()
            .map(|x| (x.bandwidth, x.qgsr_db))
            .collect();
        assert_eq!(
            pts,
            vec![(10e6, 1.0), (10e6, 2.0), (20e6, 1.0), (20e6, 2.0)]
        );
        p.axis = SweepAxis::Qcbr;
        let pts: Vec<(f64, f64)> = p
            .points()
            .iter()
            .map(|x| (x.bandwidth, x.qgsr_db))
            .collect();
        assert_eq!(
            pts,
            vec![(10e6, 1.0), (20e6, 1.0), (10e6, 2.0), (20e6, 2.0)]
        );
    }

    #[test]
    fn plan_validation() {
        let mut p = preset("fig3a").unwrap();
        p.replicas = 0;
        assert!(p.validate().is_err());
        let mut p = preset("fig3a").unwrap();
        p.qgsr_values.clear();
        assert!(p.validate().is_err());
        let mut p = preset("fig3a").unwrap();
        p.bandwidth_values = vec![20e9];
        assert!(p.validate().is_err());
        assert!(preset("fig3c").unwrap().validate().is_ok());
    }

    #[test]
    fn plan_json_round_trip() {
        let p = preset("fig3c").unwrap();
        let back: SweepPlan = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(p, back);
        let minimal: SweepPlan = serde_json::from_str(
            r#"{"axis": "qgsr", "qgsr_values": [9.0], "bandwidth_values": [1e8], "replicas": 2}"#,
        )
        .unwrap();
        assert!(minimal.noise_enabled);
        assert_eq!(minimal.base, RunConfig::default());
    }

    #[test]
    fn mean_std_and_spearman() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - 1.290_994_448_735_805_6).abs() < 1e-12);
        assert_eq!(mean_std(&[3.0]), (3.0, 0.0));
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!((spearman(&x, &[10.0, 20.0, 25.0, 70.0, 80.0]) - 1.0).abs() < 1e-12);
        assert!((spearman(&x, &[5.0, 4.0, 3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        // one adjacent swap among six points
        let y = [1.0, 2.0, 4.0, 3.0, 5.0, 6.0];
        let x6 = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        assert!((spearman(&x6, &y) - (1.0 - 6.0 * 2.0 / 210.0)).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip() {
        let row = SweepRow {
            bandwidth_hz: 1e8,
            qgsr_db: 10.5,
            qcbr: Some(0.04),
            cp_mean: 0.1,
            cp_std: 0.01,
            h_mean: 0.99,
            h_std: 0.001,
            bw80_hz: 2.9e9,
            bw80_std: 1e7,
            skew: 0.02,
            skew_std: 0.003,
            seeds: "1:2;3:4".into(),
            replicas_ok: 2,
            failures: String::new(),
            config_hash: "abc".into(),
            wall_time_s: 1.5,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        let rows = vec![row.clone(), SweepRow { qcbr: None, ..row }];
        write_rows(&path, &rows).unwrap();
        assert_eq!(read_rows(&path).unwrap(), rows);
    }

    #[test]
    fn point_run_is_deterministic_and_off_switch_matches_baseline() {
        let mut plan = preset("fig2_injected").unwrap();
        plan.base = tiny_base();
        plan.replicas = 1;
        let pt = plan.points()[0];
        let cfgs = vec![plan.config_for(&pt, 0)];
        let a = run_point(&cfgs, None).unwrap();
        let b = run_point(&cfgs, None).unwrap();
        assert_eq!(a.row.cp_mean.to_bits(), b.row.cp_mean.to_bits());
        assert_eq!(a.reports, b.reports);

        let mut off = cfgs[0].clone();
        off.noise.enabled = false;
        let row = run_point(std::slice::from_ref(&off), None).unwrap();
        let (_, direct) = run_experiment(&off).unwrap();
        assert_eq!(row.row.cp_mean, direct.metrics.cp);
        assert_eq!(row.row.h_mean, direct.metrics.pe);
    }

    #[test]
    fn failing_replica_is_flagged_not_fatal() {
        let mut good = tiny_base();
        good.noise.enabled = false;
        let mut bad = good.clone();
        bad.analysis.pe_dimension = 9;
        let res = run_point(&[good, bad], None).unwrap();
        assert_eq!(res.row.replicas_ok, 1);
        assert!(res.row.is_flagged());
        assert!(res.row.failures.contains("replica 1"));
    }
}
