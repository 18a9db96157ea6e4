use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use focus_lab::cli::{self, CliError, Overrides};

#[derive(Parser)]
#[command(name = "focus-lab", version, about = "Optimistic tabular learner: oracles, runs, sweeps and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads, overriding the config.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Replace the config's seeds with this single seed.
    #[arg(long, global = true)]
    seed_override: Option<u64>,
    /// Record per-episode tables and audit optimism.
    #[arg(long, global = true)]
    snapshots: bool,
    /// Run the full iteration budget in every episode (no early exit).
    #[arg(long, global = true)]
    exact_m: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print gain, bias span and discounted values of each instance.
    Solve {
        /// Discount factor; defaults to the first variant's policy at the first horizon.
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Run a single (instance, variant, T) cell over all seeds.
    Run {
        #[arg(long, default_value_t = 0)]
        instance: usize,
        #[arg(long, default_value_t = 0)]
        variant: usize,
        /// Horizon; defaults to the first entry of the grid.
        #[arg(long = "horizon")]
        horizon: Option<u64>,
    },
    /// Run the full cross product of the config.
    Sweep,
    /// Run the property and inequality suites; exit 2 if any check fails.
    Verify {
        /// Constant of the cumulative variance bound.
        #[arg(long, default_value_t = 10.0)]
        var_constant: f64,
    },
    /// Write each instance of the config as an MDP file.
    ExportInstance,
}

enum Outcome {
    Done,
    VerificationFailed,
}

fn load(common: &Common) -> Result<cli::ExperimentConfig, CliError> {
    let path = common.config.as_ref().ok_or_else(|| CliError::Usage("--config PATH is required".into()))?;
    let mut config = cli::parse_config(path)?;
    Overrides {
        out: common.out.clone(),
        workers: common.workers,
        seed: common.seed_override,
        snapshots: common.snapshots,
        exact_m: common.exact_m,
    }
    .apply(&mut config)?;
    Ok(config)
}

fn report_sweep(result: &cli::SweepResult, dir: &std::path::Path) {
    let failed = result.reduction.iter().filter(|ok| !**ok).count();
    println!("{} runs written to {}", result.records.len(), dir.display());
    for s in &result.summaries {
        println!(
            "{} | {} | T={} | seeds={} | avg regret {} ± {} | gamma regret {}",
            s.instance_label,
            s.variant_label,
            s.horizon,
            s.n_seeds,
            cli::fmt_g17(s.avg_regret.mean),
            cli::fmt_g17(s.avg_regret.std),
            cli::fmt_g17(s.gamma_regret.mean)
        );
    }
    if failed > 0 {
        eprintln!("warning: reduction check failed on {failed} runs");
    }
}

fn dispatch(args: Cli) -> Result<Outcome, CliError> {
    match args.command {
        Command::Solve { gamma } => {
            let config = load(&args.common)?;
            print!("{}", cli::solve_report(&config, gamma)?);
        }
        Command::Run { instance, variant, horizon } => {
            let config = cli::select_cell(&load(&args.common)?, instance, variant, horizon)?;
            let result = cli::execute(&config)?;
            report_sweep(&result, &config.output_dir);
        }
        Command::Sweep => {
            let config = load(&args.common)?;
            let result = cli::execute(&config)?;
            report_sweep(&result, &config.output_dir);
        }
        Command::Verify { var_constant } => {
            let mut reports = Vec::new();
            if args.common.config.is_some() {
                let config = load(&args.common)?;
                reports.push(cli::verify::operator_property_suite(1000, 0));
                reports.push(cli::config_verification(&config, var_constant)?);
            } else {
                reports.extend(cli::builtin_verification()?);
            }
            for r in &reports {
                print!("{r}");
            }
            if !reports.iter().all(|r| r.passed()) {
                return Ok(Outcome::VerificationFailed);
            }
        }
        Command::ExportInstance => {
            let config = load(&args.common)?;
            let dir = args.common.out.clone().unwrap_or_else(|| config.output_dir.clone());
            for p in cli::export_instances(&config, &dir)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(Outcome::Done)
}

fn main() -> ExitCode {
    let args = Cli::parse();
    match dispatch(args) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
