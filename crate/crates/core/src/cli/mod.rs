//! Experiment configs, sweeps, CSV output and verification suites behind the
//! `focus-lab` command.

mod config;
mod output;
pub mod verify;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

pub use config::{parse_config, parse_config_str, ExperimentConfig, Seeds, CONFIG_VERSION};
pub use output::{
    fmt_g17, sanitize, write_audit_csv, write_checkpoint_csv, write_runs_csv, write_summary_csv, AUDIT_HEADER,
    CHECKPOINT_HEADER, RUNS_HEADER, SUMMARY_HEADER,
};

use crate::harness::{
    aggregate, check_reduction, optimism_audit, run, CellSummary, HarnessError, OptimismAudit, Oracles, RunConfig,
    RunRecord,
};
use crate::instances::{InstanceBundle, InstanceError};
use crate::mdp::{solve_discounted, solve_gain_bias, write_mdp_file, MdpError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("io error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("run failed for cell {cell}, seed {seed}: {source}")]
    Run { cell: String, seed: u64, source: HarnessError },
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Mdp(#[from] MdpError),
    #[error("usage: {0}")]
    Usage(String),
}

/// Command-line overrides applied on top of a config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub snapshots: bool,
    pub exact_m: bool,
}

impl Overrides {
    pub fn apply(&self, config: &mut ExperimentConfig) -> Result<(), CliError> {
        if let Some(out) = &self.out {
            config.output_dir = out.clone();
        }
        if let Some(w) = self.workers {
            config.workers = w;
        }
        if let Some(seed) = self.seed {
            config.seeds = Seeds::List(vec![seed]);
        }
        config.snapshots |= self.snapshots;
        if self.exact_m {
            for v in &mut config.variants {
                v.exact_m = true;
            }
        }
        config.validate()
    }
}

/// Records of a sweep together with the oracles used to score them.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub records: Vec<RunRecord>,
    pub oracles: Vec<Arc<Oracles>>,
    pub reduction: Vec<bool>,
    pub summaries: Vec<CellSummary>,
    pub audits: Option<Vec<OptimismAudit>>,
}

impl SweepResult {
    pub fn pairs(&self) -> Vec<(&RunRecord, &Oracles)> {
        self.records.iter().zip(&self.oracles).map(|(r, o)| (r, o.as_ref())).collect()
    }
}

struct Job {
    instance: usize,
    variant: usize,
    horizon: u64,
    seed: u64,
    oracle: usize,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))
}

/// Builds every instance of a config.
pub fn build_instances(config: &ExperimentConfig) -> Result<Vec<InstanceBundle>, CliError> {
    config
        .instances
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            spec.build().map_err(|e| CliError::Schema { path: format!("instances[{i}]"), message: e.to_string() })
        })
        .collect()
}

/// Runs the cross product instance × variant × T × seed without touching the disk.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult, CliError> {
    config.validate()?;
    let bundles = build_instances(config)?;
    let seeds = config.seeds.expand();

    let mut oracle_keys: Vec<(usize, f64)> = Vec::new();
    let mut oracle_index: HashMap<(usize, u64), usize> = HashMap::new();
    let mut jobs = Vec::new();
    for (i, _) in bundles.iter().enumerate() {
        for (v, variant) in config.variants.iter().enumerate() {
            for &horizon in &config.t_grid {
                let gamma = variant.gamma_policy.resolve(horizon)?;
                let oracle = *oracle_index.entry((i, gamma.to_bits())).or_insert_with(|| {
                    oracle_keys.push((i, gamma));
                    oracle_keys.len() - 1
                });
                for &seed in &seeds {
                    jobs.push(Job { instance: i, variant: v, horizon, seed, oracle });
                }
            }
        }
    }

    let pool = pool(config.workers)?;
    let oracles: Vec<Arc<Oracles>> = pool.install(|| {
        oracle_keys
            .par_iter()
            .map(|&(i, gamma)| {
                Oracles::compute(&bundles[i].mdp, gamma, config.oracle).map(Arc::new).map_err(|e| CliError::Run {
                    cell: format!("{} oracle at gamma {gamma}", bundles[i].label),
                    seed: 0,
                    source: e,
                })
            })
            .collect::<Result<_, _>>()
    })?;

    let records: Vec<RunRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let variant = &config.variants[job.variant];
                let mut rc = RunConfig::new(
                    config.instances[job.instance].clone(),
                    variant.clone(),
                    job.horizon,
                    job.seed,
                    config.delta,
                );
                rc.snapshots = config.snapshots;
                run(&bundles[job.instance], &rc, &oracles[job.oracle]).map_err(|e| CliError::Run {
                    cell: format!("{} / {} / T={}", bundles[job.instance].label, variant.label, job.horizon),
                    seed: job.seed,
                    source: e,
                })
            })
            .collect::<Result<_, _>>()
    })?;

    let run_oracles: Vec<Arc<Oracles>> = jobs.iter().map(|j| Arc::clone(&oracles[j.oracle])).collect();
    let reduction = records.iter().zip(&run_oracles).map(|(r, o)| check_reduction(r, o).passed()).collect();
    let audits = if config.snapshots {
        Some(records.iter().zip(&run_oracles).map(|(r, o)| optimism_audit(r, o)).collect::<Result<Vec<_>, _>>()?)
    } else {
        None
    };
    let summaries = aggregate(&records)?;
    Ok(SweepResult { records, oracles: run_oracles, reduction, summaries, audits })
}

/// Path of a run's checkpoint file inside an output directory.
pub fn checkpoint_path(dir: &Path, record: &RunRecord) -> PathBuf {
    dir.join("checkpoints").join(format!(
        "{}__{}__T{}__seed{}.csv",
        sanitize(&record.instance_label),
        sanitize(&record.variant_label),
        record.horizon,
        record.seed
    ))
}

/// Writes `runs.csv`, `summary.csv`, one checkpoint file per run and, with
/// snapshots, `audit.csv`.
pub fn write_sweep(result: &SweepResult, dir: &Path) -> Result<(), CliError> {
    output::ensure_dir(&dir.join("checkpoints"))?;
    write_runs_csv(&dir.join("runs.csv"), &result.records, &result.reduction)?;
    write_summary_csv(&dir.join("summary.csv"), &result.summaries)?;
    for r in &result.records {
        write_checkpoint_csv(&checkpoint_path(dir, r), &r.checkpoints)?;
    }
    if let Some(audits) = &result.audits {
        let rows: Vec<_> = result.records.iter().zip(audits.iter().cloned()).collect();
        write_audit_csv(&dir.join("audit.csv"), &rows)?;
    }
    Ok(())
}

/// Runs a config and writes its CSV files to `config.output_dir`.
pub fn execute(config: &ExperimentConfig) -> Result<SweepResult, CliError> {
    output::ensure_dir(&config.output_dir)?;
    let result = run_sweep(config)?;
    write_sweep(&result, &config.output_dir)?;
    Ok(result)
}

/// Restricts a config to a single (instance, variant, T) cell.
pub fn select_cell(
    config: &ExperimentConfig,
    instance: usize,
    variant: usize,
    horizon: Option<u64>,
) -> Result<ExperimentConfig, CliError> {
    let mut out = config.clone();
    out.instances = vec![config
        .instances
        .get(instance)
        .cloned()
        .ok_or_else(|| CliError::Usage(format!("instance index {instance} out of range")))?];
    out.variants = vec![config
        .variants
        .get(variant)
        .cloned()
        .ok_or_else(|| CliError::Usage(format!("variant index {variant} out of range")))?];
    out.t_grid = vec![horizon.unwrap_or(config.t_grid[0])];
    out.validate()?;
    Ok(out)
}

/// Human-readable oracle report for every instance of a config.
pub fn solve_report(config: &ExperimentConfig, gamma: Option<f64>) -> Result<String, CliError> {
    let bundles = build_instances(config)?;
    let gamma = match gamma {
        Some(g) => g,
        None => config.variants[0].gamma_policy.resolve(config.t_grid[0])?,
    };
    let mut out = String::new();
    for b in &bundles {
        let gain = solve_gain_bias(&b.mdp, config.oracle.gain)?;
        let disc = solve_discounted(&b.mdp, gamma, config.oracle.discounted)?;
        let _ = writeln!(out, "instance {}", b.label);
        let _ = writeln!(out, "  S = {}, A = {}", b.mdp.n_states(), b.mdp.n_actions());
        let _ = writeln!(
            out,
            "  rho* = {} (error bound {}), span h* = {}, proxy gamma = {}",
            fmt_g17(gain.rho_star),
            fmt_g17(gain.error_bound),
            fmt_g17(gain.span_h),
            fmt_g17(gain.gamma_proxy)
        );
        if let (Some(g), Some(s)) = (b.known_gain, b.known_span_h) {
            let _ = writeln!(out, "  analytic: rho* = {}, span h* = {}", fmt_g17(g), fmt_g17(s));
        }
        let _ = writeln!(out, "  gamma = {}, span V* = {}", fmt_g17(gamma), fmt_g17(disc.span_v));
        let v: Vec<String> = disc.v_star.iter().map(|x| fmt_g17(*x)).collect();
        let _ = writeln!(out, "  V* = [{}]", v.join(", "));
    }
    Ok(out)
}

/// Writes every instance of a config as an MDP file; returns the paths written.
pub fn export_instances(config: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    output::ensure_dir(dir)?;
    let mut paths = Vec::new();
    for b in build_instances(config)? {
        let path = dir.join(format!("{}.toml", sanitize(&b.label)));
        write_mdp_file(&b.mdp, &path)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Suites run by `verify` without a config: operator properties, oracle
/// cross-check and a small built-in sweep checked for the run invariants.
pub fn builtin_verification() -> Result<Vec<verify::SuiteReport>, CliError> {
    let mut reports = vec![verify::operator_property_suite(1000, 0), verify::oracle_cross_check(1e-3)?];
    let started = std::time::Instant::now();
    let config = parse_config_str(BUILTIN_SWEEP)?;
    let result = run_sweep(&config)?;
    let mut checks = verify::run_invariant_checks(&result.pairs(), 10.0);
    let (bad, n) = verify::optimism_violating_runs(&result.pairs())?;
    checks.push(verify::CheckLine::new(
        "optimism audit",
        bad as f64 <= config.delta * n as f64,
        format!("{bad} of {n} runs with a violation"),
    ));
    reports.push(verify::SuiteReport {
        name: "run invariants (built-in sweep)".into(),
        checks,
        elapsed_s: started.elapsed().as_secs_f64(),
    });
    Ok(reports)
}

/// Invariant suite over the runs of a config.
pub fn config_verification(config: &ExperimentConfig, c: f64) -> Result<verify::SuiteReport, CliError> {
    let started = std::time::Instant::now();
    let result = run_sweep(config)?;
    let mut checks = verify::run_invariant_checks(&result.pairs(), c);
    if config.snapshots {
        let (bad, n) = verify::optimism_violating_runs(&result.pairs())?;
        checks.push(verify::CheckLine::new(
            "optimism audit",
            bad as f64 <= config.delta * n as f64,
            format!("{bad} of {n} runs with a violation"),
        ));
    }
    Ok(verify::SuiteReport {
        name: "run invariants".into(),
        checks,
        elapsed_s: started.elapsed().as_secs_f64(),
    })
}

const BUILTIN_SWEEP: &str = r#"
version = 1
t_grid = [2048]
seeds = { base = 0, count = 5 }
snapshots = true

[[instances]]
family = "two_state_pair"
b = 5.0

[[instances]]
family = "deterministic_cycle"
rewards = [1.0, 0.0, 0.5, 0.0]

[[instances]]
family = "random_communicating"
s = 5
a = 3
gamma_support = 3
seed = 1

[[variants]]
label = "focus"
h_policy = { kind = "explicit", value = 10.0 }
gamma_policy = { kind = "explicit", value = 0.99 }
"#;
