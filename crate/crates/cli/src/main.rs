//! `occsim`: command-line front end for the chunked-code line-network
//! simulator. Subcommands map onto the library modules: `simulate` runs
//! seeded overhead sweeps, `rank` drives banded-matrix rank experiments,
//! `bounds` evaluates the analytic calculators, and `report` re-analyzes
//! existing result files.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use occsim_core::bounds::{
    aperture_lower_bound, cc_chunk_failure_condition, occ_hyperchunk_failure_condition,
    theorem_outer_bounds, ApertureMode, BoundParams,
};
use occsim_core::harness::{
    overhead_at_target, read_csv, run_sweep, write_csv, ExperimentConfig, Metric, RunManifest,
    StopRule, SweepResult,
};
use occsim_core::netsim::{EmptyChunkPolicy, ScheduleMode};
use occsim_core::rankexp::{conjecture_regime_check, estimate_failure, BandedMatrixSpec};
use serde::Deserialize;

#[derive(Parser)]
#[command(name = "occsim", version, about = "Chunked-code line-network simulator")]
struct Cli {
    /// Worker thread count (default: available cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run overhead sweeps from a config file and write CSV results
    Simulate(SimulateArgs),
    /// Monte Carlo rank experiment on a banded random matrix class
    Rank(RankArgs),
    /// Evaluate the analytic decodability conditions and outer bounds
    Bounds(BoundsArgs),
    /// Compute overhead-at-target from existing run manifests
    Report(ReportArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Path to the TOML experiment config
    #[arg(long, short = 'c')]
    config: PathBuf,
    /// Output directory for CSVs and manifests
    #[arg(long, short = 'o', default_value = "results")]
    out: PathBuf,
    /// Override the config's master seed
    #[arg(long)]
    seed: Option<u64>,
}

/// Shared sweep settings plus one `[[combos]]` entry per (k, alpha, tau).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateConfig {
    l: usize,
    lambda_grid: Vec<f64>,
    master_seed: u64,
    #[serde(default)]
    chi: Option<usize>,
    #[serde(default)]
    stop_rule: StopRule,
    #[serde(default)]
    empty_chunk_policy: EmptyChunkPolicy,
    #[serde(default)]
    schedule_mode: ScheduleMode,
    #[serde(default)]
    gamma_a: f64,
    combos: Vec<Combo>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Combo {
    k: usize,
    alpha: usize,
    tau: usize,
}

#[derive(Args)]
struct RankArgs {
    #[arg(long, value_enum)]
    variant: RankVariant,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    alpha: usize,
    #[arg(long)]
    gamma: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Target failure probability for the regime check
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum RankVariant {
    RegularSymmetric,
    RegularAsymmetric,
    IrregularSymmetric,
    IrregularAsymmetric,
}

#[derive(Args)]
struct BoundsArgs {
    /// Evaluate the per-chunk (cc) or per-hyperchunk (occ) condition
    #[arg(long, value_enum)]
    mode: Option<CondMode>,
    /// Evaluate the outer MER/PER bound interval instead
    #[arg(long)]
    theorem_bounds: bool,
    /// Evaluate the order-of-growth aperture lower bound (advisory)
    #[arg(long, value_enum)]
    aperture: Option<CondMode>,
    #[arg(long, default_value_t = 4)]
    l: u32,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    #[arg(long, default_value_t = 64)]
    alpha: u32,
    #[arg(long, default_value_t = 1)]
    tau: u32,
    #[arg(long, default_value_t = 1)]
    chi: u32,
    #[arg(long, default_value_t = 0.0)]
    c_hidden: f64,
    #[arg(long, default_value_t = 1)]
    q: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum CondMode {
    Cc,
    Occ,
}

#[derive(Args)]
struct ReportArgs {
    /// Run manifests; each is expected next to its CSV (same stem)
    manifests: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = MetricArg::Mer)]
    metric: MetricArg,
    #[arg(long)]
    target: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Mer,
    PerTrue,
    PerBlock,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Mer => Metric::Mer,
            MetricArg::PerTrue => Metric::PerTrue,
            MetricArg::PerBlock => Metric::PerBlock,
        }
    }
}

enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Runtime(_) => ExitCode::from(1),
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Runtime(m) => m,
        }
    }
}

fn config_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Config(e.to_string())
}

fn runtime_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .is_err()
        {
            eprintln!("error: could not configure {jobs} worker threads");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Simulate(args) => simulate(&args),
        Command::Rank(args) => rank(&args),
        Command::Bounds(args) => bounds(&args),
        Command::Report(args) => report(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

fn combo_stem(c: &Combo) -> String {
    format!("sweep_k{}_a{}_t{}", c.k, c.alpha, c.tau)
}

fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("config {}: {e}", args.config.display())))?;
    let sim: SimulateConfig = toml::from_str(&text).map_err(config_err)?;
    if sim.combos.is_empty() {
        return Err(CliError::Config("combos must not be empty".into()));
    }

    let configs: Vec<(String, ExperimentConfig)> = sim
        .combos
        .iter()
        .map(|c| {
            let cfg = ExperimentConfig {
                l: sim.l,
                k: c.k,
                alpha: c.alpha,
                tau: c.tau,
                chi: sim.chi,
                lambda_grid: sim.lambda_grid.clone(),
                stop_rule: sim.stop_rule,
                empty_chunk_policy: sim.empty_chunk_policy,
                schedule_mode: sim.schedule_mode,
                master_seed: args.seed.unwrap_or(sim.master_seed),
                gamma_a: sim.gamma_a,
            };
            (combo_stem(c), cfg)
        })
        .collect();
    // validate everything up front so a bad combo fails before any output
    for (stem, cfg) in &configs {
        cfg.validate()
            .map_err(|e| CliError::Config(format!("{stem}: {e}")))?;
    }

    std::fs::create_dir_all(&args.out).map_err(runtime_err)?;
    for (stem, cfg) in configs {
        let manifest_path = args.out.join(format!("{stem}.manifest.json"));
        let csv_path = args.out.join(format!("{stem}.csv"));
        let mut manifest = RunManifest::new(cfg.clone());
        write_json(&manifest_path, &manifest)?;

        let started = Instant::now();
        let sweep = run_sweep(&cfg).map_err(runtime_err)?;
        let file = std::fs::File::create(&csv_path).map_err(runtime_err)?;
        write_csv(&sweep, file).map_err(runtime_err)?;

        manifest.wall_time_secs = started.elapsed().as_secs_f64();
        write_json(&manifest_path, &manifest)?;
        println!("{}: {} grid points", csv_path.display(), sweep.points.len());
    }
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(value).map_err(runtime_err)?;
    std::fs::write(path, json).map_err(runtime_err)
}

fn rank(args: &RankArgs) -> Result<(), CliError> {
    let (regular, symmetric) = match args.variant {
        RankVariant::RegularSymmetric => (true, true),
        RankVariant::RegularAsymmetric => (true, false),
        RankVariant::IrregularSymmetric => (false, true),
        RankVariant::IrregularAsymmetric => (false, false),
    };
    let spec = BandedMatrixSpec {
        n: args.n,
        k: args.k,
        alpha: args.alpha,
        gamma: args.gamma,
        regular,
        symmetric,
    };
    spec.chi().map_err(config_err)?;
    if !(args.epsilon > 0.0 && args.epsilon < 1.0) {
        return Err(CliError::Config("epsilon must be in (0,1)".into()));
    }
    let result = estimate_failure(&spec, args.trials, args.seed).map_err(runtime_err)?;
    let verdict = conjecture_regime_check(&spec, args.epsilon);
    let out = serde_json::json!({
        "spec": spec,
        "result": result,
        "regime_check": verdict,
        "note": "evidence check for an unproven conjecture",
    });
    println!("{}", serde_json::to_string_pretty(&out).map_err(runtime_err)?);
    Ok(())
}

fn bounds(args: &BoundsArgs) -> Result<(), CliError> {
    let p = BoundParams {
        l: args.l,
        lambda: args.lambda,
        epsilon: args.epsilon,
        alpha: args.alpha,
        tau: args.tau,
        chi: args.chi,
        c_hidden: args.c_hidden,
    };
    let advisory_note = "ADVISORY: depends on an asymptotic constant (c_hidden)";
    let out = if args.theorem_bounds {
        if !(args.epsilon > 0.0 && args.epsilon < 1.0) {
            return Err(CliError::Config("epsilon must be in (0,1)".into()));
        }
        let b = theorem_outer_bounds(args.epsilon, args.q, args.chi, args.tau);
        serde_json::json!({ "theorem_bounds": b })
    } else if let Some(mode) = args.aperture {
        let mode = match mode {
            CondMode::Cc => ApertureMode::Cc,
            CondMode::Occ => ApertureMode::Occ,
        };
        let v = aperture_lower_bound(&p, mode).map_err(config_err)?;
        serde_json::json!({ "aperture_lower_bound": v, "note": advisory_note })
    } else {
        match args.mode {
            Some(CondMode::Cc) => {
                let audit = cc_chunk_failure_condition(&p).map_err(config_err)?;
                let note = audit.advisory.then_some(advisory_note);
                serde_json::json!({ "cc_condition": audit, "note": note })
            }
            Some(CondMode::Occ) => {
                let audit = occ_hyperchunk_failure_condition(&p).map_err(config_err)?;
                let note = audit.advisory.then_some(advisory_note);
                serde_json::json!({ "occ_condition": audit, "note": note })
            }
            None => {
                return Err(CliError::Config(
                    "choose one of --mode, --theorem-bounds, --aperture".into(),
                ))
            }
        }
    };
    println!("{}", serde_json::to_string_pretty(&out).map_err(runtime_err)?);
    Ok(())
}

fn report(args: &ReportArgs) -> Result<(), CliError> {
    if args.manifests.is_empty() {
        return Err(CliError::Config("no manifests given".into()));
    }
    if args.target <= 0.0 {
        return Err(CliError::Config("target must be positive".into()));
    }
    for path in &args.manifests {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        let manifest: RunManifest = serde_json::from_str(&text).map_err(runtime_err)?;
        let csv_path = sibling_csv(path)?;
        let file = std::fs::File::open(&csv_path)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", csv_path.display())))?;
        let points = read_csv(file).map_err(runtime_err)?;
        let sweep = SweepResult {
            config: manifest.config,
            points,
        };
        let label = format!(
            "k={} alpha={} tau={}",
            sweep.config.k, sweep.config.alpha, sweep.config.tau
        );
        match overhead_at_target(&sweep, args.metric.into(), args.target) {
            Ok(lambda) => println!("{label}: overhead {lambda:.4}"),
            Err(e) => println!("{label}: {e}"),
        }
    }
    Ok(())
}

/// `foo.manifest.json` -> `foo.csv`
fn sibling_csv(manifest: &Path) -> Result<PathBuf, CliError> {
    let name = manifest
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| CliError::Config(format!("bad manifest path {}", manifest.display())))?;
    let stem = name.strip_suffix(".manifest.json").ok_or_else(|| {
        CliError::Config(format!("{name}: expected a *.manifest.json file"))
    })?;
    Ok(manifest.with_file_name(format!("{stem}.csv")))
}
