use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use lkchaos::analysis::{acf, analyze_with, welch, AnalysisConfig, AnalysisReport};
use lkchaos::harness::{self, reference, SweepOptions, SweepPlan};
use lkchaos::integrator::{run_experiment, streams_for};
use lkchaos::trace::{self, TraceMeta};
use lkchaos::{Error, Result, RunConfig};

#[derive(Parser)]
#[command(
    name = "lkchaos",
    version,
    about = "Feedback-laser chaos with band-limited noise injection"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write the intensity trace.
    Simulate(SimulateArgs),
    /// Compute C_p, permutation entropy, BW80 and skewness of a trace.
    Analyze(AnalyzeArgs),
    /// Run a preset or a plan file over its parameter grid.
    Sweep(SweepArgs),
    /// List or print the built-in sweep presets.
    Presets(PresetArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Run configuration (JSON); omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output prefix: writes <prefix>.f64, <prefix>.f64.json and <prefix>.report.json.
    #[arg(long)]
    out: PathBuf,
    /// Override the simulation seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the noise seed.
    #[arg(long)]
    noise_seed: Option<u64>,
    /// Also write the three forcing streams.
    #[arg(long)]
    dump_noise: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Raw little-endian f64 trace.
    #[arg(long = "in")]
    input: PathBuf,
    /// Sample spacing (s); read from the sidecar when omitted.
    #[arg(long)]
    dt: Option<f64>,
    /// Feedback delay (s).
    #[arg(long, default_value_t = 86.7e-9)]
    delay: f64,
    #[arg(long)]
    report: PathBuf,
    #[arg(long, default_value_t = 4)]
    pe_dimension: usize,
    /// Embedding lag in samples (default: the delay).
    #[arg(long)]
    pe_lag: Option<usize>,
    /// Welch segment length in samples.
    #[arg(long, default_value_t = lkchaos::analysis::DEFAULT_SEGMENT)]
    welch_segment: usize,
    #[arg(long)]
    acf_csv: Option<PathBuf>,
    #[arg(long)]
    psd_csv: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, conflicts_with = "plan", required_unless_present = "plan")]
    preset: Option<String>,
    /// Sweep plan (JSON).
    #[arg(long)]
    plan: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads.
    #[arg(long, env = harness::JOBS_ENV)]
    jobs: Option<usize>,
    #[arg(long)]
    base_seed: Option<u64>,
    #[arg(long)]
    replicas: Option<usize>,
    /// Override the simulated span (s).
    #[arg(long)]
    t_total: Option<f64>,
}

#[derive(Args)]
struct PresetArgs {
    #[arg(long)]
    list: bool,
    /// Print the plan of one preset as JSON.
    #[arg(long)]
    show: Option<String>,
}

#[derive(Serialize)]
struct Reference {
    cp_original: f64,
    cp_injected: f64,
    pe_original: f64,
    pe_injected: f64,
    skew_original: f64,
    skew_injected: f64,
}

#[derive(Serialize)]
struct AnalyzeOutput<'a> {
    input: String,
    metrics: &'a AnalysisReport,
    experimental_reference: Reference,
}

fn read_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => Ok(serde_json::from_slice(&fs::read(p)?)?),
        None => Ok(RunConfig::default()),
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let mut cfg = read_config(a.config.as_deref())?;
    if let Some(s) = a.seed {
        cfg.sim.seed = s;
    }
    if let Some(s) = a.noise_seed {
        cfg.noise.seed = s;
    }
    let (traj, report) = run_experiment(&cfg)?;
    for w in &traj.diagnostics.warnings {
        eprintln!("warning: {w}");
    }
    let meta = TraceMeta {
        dt: traj.intensity.dt,
        samples: traj.intensity.len(),
        config_hash: cfg.hash(),
        sim_seed: cfg.sim.seed,
        noise_seed: cfg.noise.seed,
        config: cfg.clone(),
        diagnostics: report.provenance.diagnostics.clone(),
    };
    let trace_path = with_suffix(&a.out, ".f64");
    trace::write_trace(&trace_path, &traj.intensity, &meta)?;
    fs::write(
        with_suffix(&a.out, ".report.json"),
        serde_json::to_vec_pretty(&report)?,
    )?;
    if a.dump_noise {
        trace::write_streams(&a.out, &streams_for(&cfg)?)?;
    }
    let m = &report.metrics;
    println!(
        "{}: C_p={:.4} H={:.4} BW80={:.3} GHz skew={:.4} ({:.1} s)",
        trace_path.display(),
        m.cp,
        m.pe,
        m.bw80 / 1e9,
        m.skewness,
        traj.diagnostics.wall_time_s
    );
    Ok(())
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    let (series, _) = trace::read_trace(&a.input, a.dt)?;
    let cfg = AnalysisConfig {
        pe_dimension: a.pe_dimension,
        pe_lag: a.pe_lag,
        welch_segment: a.welch_segment,
        ..AnalysisConfig::default()
    };
    let metrics = analyze_with(&series, a.delay, &cfg)?;
    if let Some(p) = &a.acf_csv {
        acf(&series, a.delay + 2.0 * cfg.half_window)?.write_csv(fs::File::create(p)?)?;
    }
    if let Some(p) = &a.psd_csv {
        welch(&series, cfg.welch_segment)?.write_csv(fs::File::create(p)?)?;
    }
    let out = AnalyzeOutput {
        input: a.input.display().to_string(),
        metrics: &metrics,
        experimental_reference: Reference {
            cp_original: reference::CP_ORIGINAL,
            cp_injected: reference::CP_INJECTED,
            pe_original: reference::PE_ORIGINAL,
            pe_injected: reference::PE_INJECTED,
            skew_original: reference::SKEW_ORIGINAL,
            skew_injected: reference::SKEW_INJECTED,
        },
    };
    fs::write(&a.report, serde_json::to_vec_pretty(&out)?)?;
    println!(
        "C_p={:.4} (lag {:.2} ns) H={:.4} BW80={:.3} GHz skew={:.4}",
        metrics.cp,
        metrics.peak_lag * 1e9,
        metrics.pe,
        metrics.bw80 / 1e9,
        metrics.skewness
    );
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let mut plan: SweepPlan = match (&a.preset, &a.plan) {
        (Some(name), _) => harness::preset(name)?,
        (None, Some(p)) => serde_json::from_slice(&fs::read(p)?)?,
        (None, None) => return Err(Error::InvalidInput("need --preset or --plan".into())),
    };
    if let Some(s) = a.base_seed {
        plan.base_seed = s;
    }
    if let Some(r) = a.replicas {
        plan.replicas = r;
    }
    if let Some(t) = a.t_total {
        plan.base.sim.t_total = t;
    }
    let res = harness::run_sweep(
        &plan,
        &SweepOptions {
            jobs: a.jobs,
            out: Some(a.out.clone()),
        },
    )?;
    if let Some(b) = &res.baseline {
        println!(
            "baseline: BW80={:.3} GHz C_p={:.4} H={:.4}",
            b.bw80_mean / 1e9,
            b.cp_mean,
            b.h_mean
        );
    }
    for r in &res.rows {
        println!(
            "B={:>5.0} MHz QGSR={:>5.1} dB  C_p={:.4}±{:.4}  H={:.5}±{:.5}  skew={:+.4}",
            r.bandwidth_hz / 1e6,
            r.qgsr_db,
            r.cp_mean,
            r.cp_std,
            r.h_mean,
            r.h_std,
            r.skew
        );
    }
    if res.resumed > 0 {
        println!("{} point(s) reused from {}", res.resumed, a.out.display());
    }
    for f in &res.failures {
        eprintln!("failed: {f}");
    }
    Ok(())
}

fn presets(a: PresetArgs) -> Result<()> {
    if let Some(name) = a.show {
        let plan = harness::preset(&name)?;
        println!("{}", serde_json::to_string_pretty(&plan)?);
        return Ok(());
    }
    for name in harness::PRESET_NAMES {
        let plan = harness::preset(name)?;
        println!(
            "{name:<14} {:>3} point(s) x {} replicas  {}",
            plan.points().len(),
            plan.replicas,
            harness::preset_description(name).unwrap_or("")
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Command::Simulate(a) => simulate(a),
        Command::Analyze(a) => analyze(a),
        Command::Sweep(a) => sweep(a),
        Command::Presets(a) => presets(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
