//! Monte Carlo experiment driver: overhead sweeps, stopping rules, MER/PER
//! estimation, concentration statistics, CSV/manifest persistence.
//!
//! Determinism contract: trial `t` at grid point `g` draws every random
//! choice from a seed derived as `derive_seed(master_seed, [g, t])`.
//! Trials run in fixed-size parallel batches and the stopping rule is
//! applied by scanning trial results in index order, so counts and CSV
//! output are identical for any worker count.

use crate::chunking::ChunkingScheme;
use crate::decoder::{analyze_hyperchunks, decode_cc, decode_occ};
use crate::netsim::{build_schedule, transmit, EmptyChunkPolicy, ScheduleMode};
use crate::seed::derive_seed;
use crate::stats::{clopper_pearson, mean_std};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum HarnessError {
    #[error("config error: {0}")]
    ConfigError(String),
    #[error("target {target} not bracketed by the sweep's {metric} values")]
    TargetNotBracketed { metric: String, target: f64 },
}

fn default_max_trials() -> usize {
    4000
}

/// When to stop sampling a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopRule {
    FixedTrials { count: usize },
    /// Stop at `count` decoding failures, or at `max_trials` when failures
    /// are too rare to collect in reasonable time.
    FixedFailures {
        count: usize,
        #[serde(default = "default_max_trials")]
        max_trials: usize,
    },
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule::FixedFailures {
            count: 100,
            max_trials: default_max_trials(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub l: usize,
    pub k: usize,
    pub alpha: usize,
    pub tau: usize,
    /// Hyperchunk size for block accounting (tau >= 2). None picks
    /// max(2, ceil(2(tau-1)/lambda)) per grid point, clamped to the scheme's
    /// valid range.
    #[serde(default)]
    pub chi: Option<usize>,
    pub lambda_grid: Vec<f64>,
    #[serde(default)]
    pub stop_rule: StopRule,
    #[serde(default)]
    pub empty_chunk_policy: EmptyChunkPolicy,
    #[serde(default)]
    pub schedule_mode: ScheduleMode,
    pub master_seed: u64,
    /// Deviation threshold for concentration reporting.
    #[serde(default)]
    pub gamma_a: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<ChunkingScheme, HarnessError> {
        if self.l < 1 {
            return Err(HarnessError::ConfigError("l must be >= 1".into()));
        }
        if self.lambda_grid.is_empty() {
            return Err(HarnessError::ConfigError(
                "lambda_grid must not be empty".into(),
            ));
        }
        if self.lambda_grid.iter().any(|&x| !(0.0..=64.0).contains(&x)) {
            return Err(HarnessError::ConfigError(
                "lambda_grid entries must be finite and nonnegative".into(),
            ));
        }
        if self.gamma_a < 0.0 {
            return Err(HarnessError::ConfigError(
                "gamma_a must be nonnegative".into(),
            ));
        }
        match self.stop_rule {
            StopRule::FixedTrials { count } if count == 0 => {
                return Err(HarnessError::ConfigError(
                    "stop_rule count must be positive".into(),
                ));
            }
            StopRule::FixedFailures { count, max_trials } if count == 0 || max_trials == 0 => {
                return Err(HarnessError::ConfigError(
                    "stop_rule counts must be positive".into(),
                ));
            }
            _ => {}
        }
        let scheme = ChunkingScheme::new(self.k, self.alpha, self.tau)
            .map_err(|e| HarnessError::ConfigError(e.to_string()))?;
        if let Some(chi) = self.chi {
            if self.tau >= 2 {
                scheme
                    .hyperchunk_width(chi)
                    .map_err(|e| HarnessError::ConfigError(e.to_string()))?;
                if chi >= scheme.q() {
                    return Err(HarnessError::ConfigError(format!(
                        "chi ({chi}) must be smaller than q ({})",
                        scheme.q()
                    )));
                }
            }
        }
        Ok(scheme)
    }

    fn chi_at(&self, scheme: &ChunkingScheme, lambda: f64) -> usize {
        if let Some(chi) = self.chi {
            return chi;
        }
        let wanted = if lambda > 0.0 {
            (2.0 * (self.tau as f64 - 1.0) / lambda).ceil() as usize
        } else {
            usize::MAX
        };
        wanted.max(2).min(scheme.max_chi())
    }
}

/// Aggregated estimates for one overhead grid point.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GridPointResult {
    pub lambda: f64,
    pub n: usize,
    pub trials: u64,
    pub failures: u64,
    pub mer: f64,
    pub mer_lo: f64,
    pub mer_hi: f64,
    pub per_true: f64,
    pub per_block: f64,
    pub chunk_frac_mean: f64,
    pub chunk_frac_std: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    pub points: Vec<GridPointResult>,
}

struct TrialOutcome {
    failure: bool,
    unrecovered_frac: f64,
    block_bad_frac: f64,
    chunk_bad_frac: f64,
}

fn run_trial(
    cfg: &ExperimentConfig,
    scheme: &ChunkingScheme,
    n: usize,
    chi: usize,
    grid_index: u64,
    trial: u64,
) -> TrialOutcome {
    let seed = derive_seed(cfg.master_seed, &[grid_index, trial]);
    let sched = build_schedule(cfg.l, n, cfg.schedule_mode, derive_seed(seed, &[0]));
    let packets = transmit(scheme, &sched, derive_seed(seed, &[1]), cfg.empty_chunk_policy);
    if cfg.tau == 1 {
        let outcome = decode_cc(scheme, &packets).expect("tau = 1");
        let per_chunk = outcome.per_chunk_decodable.as_ref().expect("cc mode");
        let bad_chunks = per_chunk.iter().filter(|&&d| !d).count();
        let frac = outcome.unrecovered_fraction();
        TrialOutcome {
            failure: !outcome.success,
            unrecovered_frac: frac,
            // for CC a block equals a chunk, so the accountings coincide
            block_bad_frac: frac,
            chunk_bad_frac: bad_chunks as f64 / scheme.q() as f64,
        }
    } else {
        let outcome = decode_occ(scheme, &packets).expect("tau >= 2");
        let report = analyze_hyperchunks(scheme, &packets, chi).expect("chi validated");
        let block_size = scheme.alpha() / scheme.tau();
        TrialOutcome {
            failure: !outcome.success,
            unrecovered_frac: outcome.unrecovered_fraction(),
            block_bad_frac: (report.bad_blocks.len() * block_size) as f64 / scheme.k() as f64,
            chunk_bad_frac: report.bad_hyperchunks.len() as f64 / scheme.q() as f64,
        }
    }
}

const TRIAL_BATCH: u64 = 128;

/// Run the stopping rule at one grid point, returning outcomes for exactly
/// the trials the rule admits (in trial-index order).
fn collect_trials(
    cfg: &ExperimentConfig,
    scheme: &ChunkingScheme,
    n: usize,
    chi: usize,
    grid_index: u64,
) -> Vec<TrialOutcome> {
    let (failure_target, trial_cap) = match cfg.stop_rule {
        StopRule::FixedTrials { count } => (u64::MAX, count as u64),
        StopRule::FixedFailures { count, max_trials } => (count as u64, max_trials as u64),
    };
    let mut outcomes: Vec<TrialOutcome> = Vec::new();
    let mut failures = 0u64;
    let mut next = 0u64;
    while next < trial_cap && failures < failure_target {
        let hi = (next + TRIAL_BATCH).min(trial_cap);
        let batch: Vec<TrialOutcome> = (next..hi)
            .into_par_iter()
            .map(|t| run_trial(cfg, scheme, n, chi, grid_index, t))
            .collect();
        for outcome in batch {
            let done = failures >= failure_target;
            if done {
                break;
            }
            failures += u64::from(outcome.failure);
            outcomes.push(outcome);
        }
        next = hi;
    }
    outcomes
}

/// Capacity for overhead lambda: n = ceil((1 + lambda) k).
pub fn capacity_for(k: usize, lambda: f64) -> usize {
    ((1.0 + lambda) * k as f64).ceil() as usize
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult, HarnessError> {
    let scheme = cfg.validate()?;
    let points = cfg
        .lambda_grid
        .iter()
        .enumerate()
        .map(|(gi, &lambda)| {
            let n = capacity_for(cfg.k, lambda);
            let chi = if cfg.tau >= 2 {
                cfg.chi_at(&scheme, lambda)
            } else {
                1
            };
            let outcomes = collect_trials(cfg, &scheme, n, chi, gi as u64);
            let trials = outcomes.len() as u64;
            let failures = outcomes.iter().filter(|o| o.failure).count() as u64;
            let mer = failures as f64 / trials as f64;
            let (mer_lo, mer_hi) = clopper_pearson(failures, trials, 0.95);
            let per_true =
                outcomes.iter().map(|o| o.unrecovered_frac).sum::<f64>() / trials as f64;
            let per_block =
                outcomes.iter().map(|o| o.block_bad_frac).sum::<f64>() / trials as f64;
            let chunk_fracs: Vec<f64> = outcomes.iter().map(|o| o.chunk_bad_frac).collect();
            let (chunk_frac_mean, chunk_frac_std) = mean_std(&chunk_fracs);
            GridPointResult {
                lambda,
                n,
                trials,
                failures,
                mer,
                mer_lo,
                mer_hi,
                per_true,
                per_block,
                chunk_frac_mean,
                chunk_frac_std,
                seed: derive_seed(cfg.master_seed, &[gi as u64]),
            }
        })
        .collect();
    Ok(SweepResult {
        config: cfg.clone(),
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Mer,
    PerTrue,
    PerBlock,
}

impl Metric {
    fn of(self, p: &GridPointResult) -> f64 {
        match self {
            Metric::Mer => p.mer,
            Metric::PerTrue => p.per_true,
            Metric::PerBlock => p.per_block,
        }
    }
}

/// Smallest overhead at which the metric reaches `target`, by log-linear
/// interpolation between the first pair of adjacent grid points bracketing
/// it. Zero rates are floored at half of one event per sample for the log.
pub fn overhead_at_target(
    sr: &SweepResult,
    metric: Metric,
    target: f64,
) -> Result<f64, HarnessError> {
    assert!(target > 0.0, "target rate must be positive");
    let mut points: Vec<&GridPointResult> = sr.points.iter().collect();
    points.sort_by(|a, b| a.lambda.partial_cmp(&b.lambda).expect("finite lambda"));
    let not_bracketed = || HarnessError::TargetNotBracketed {
        metric: format!("{metric:?}"),
        target,
    };
    let floor = |p: &GridPointResult| {
        let events = (p.trials as f64 * sr.config.k as f64).max(1.0);
        Metric::of(metric, p).max(0.5 / events)
    };
    for pair in points.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if Metric::of(metric, a) <= target {
            return Ok(a.lambda);
        }
        if Metric::of(metric, b) <= target {
            if Metric::of(metric, b) == target {
                return Ok(b.lambda);
            }
            let (ra, rb) = (floor(a), floor(b));
            let t = (ra.ln() - target.ln()) / (ra.ln() - rb.ln());
            return Ok(a.lambda + t * (b.lambda - a.lambda));
        }
    }
    if let Some(last) = points.last() {
        if Metric::of(metric, last) <= target {
            return Ok(last.lambda);
        }
    }
    Err(not_bracketed())
}

/// Repeated single runs at one overhead, tracking how the undecodable-chunk
/// fraction concentrates.
#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationReport {
    pub lambda: f64,
    pub repeats: u64,
    pub mean: f64,
    pub std: f64,
    pub gamma_a: f64,
    /// Empirical Pr[|fraction - mean| > gamma_a].
    pub deviation_prob: f64,
}

pub fn concentration_report(
    cfg: &ExperimentConfig,
    repeats: u64,
) -> Result<ConcentrationReport, HarnessError> {
    let scheme = cfg.validate()?;
    if cfg.tau != 1 {
        return Err(HarnessError::ConfigError(
            "concentration report requires tau = 1".into(),
        ));
    }
    let lambda = cfg.lambda_grid[0];
    let n = capacity_for(cfg.k, lambda);
    let fracs: Vec<f64> = (0..repeats)
        .into_par_iter()
        .map(|t| run_trial(cfg, &scheme, n, 1, 0, t).chunk_bad_frac)
        .collect();
    let (mean, std) = mean_std(&fracs);
    let deviation_prob =
        fracs.iter().filter(|&&f| (f - mean).abs() > cfg.gamma_a).count() as f64 / repeats as f64;
    Ok(ConcentrationReport {
        lambda,
        repeats,
        mean,
        std,
        gamma_a: cfg.gamma_a,
        deviation_prob,
    })
}

/// Write sweep points as CSV with the stable column order
/// `lambda,n,trials,failures,mer,mer_lo,mer_hi,per_true,per_block,chunk_frac_mean,chunk_frac_std,seed`.
pub fn write_csv<W: std::io::Write>(sr: &SweepResult, writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for p in &sr.points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_bytes(sr: &SweepResult) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv(sr, &mut buf).expect("in-memory write");
    buf
}

pub fn read_csv<R: std::io::Read>(reader: R) -> csv::Result<Vec<GridPointResult>> {
    csv::Reader::from_reader(reader).deserialize().collect()
}

/// Run manifest: the exact resolved configuration plus provenance, written
/// before any result file so a deleted output can be regenerated from it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub tool_version: String,
    pub wall_time_secs: f64,
}

impl RunManifest {
    pub fn new(config: ExperimentConfig) -> Self {
        Self {
            config,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_secs: 0.0,
        }
    }
}
