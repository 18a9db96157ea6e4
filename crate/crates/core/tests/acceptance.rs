//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use focus_lab::agent::MONOTONE_TOL;
use focus_lab::cli::verify::{operator_property_suite, optimism_violating_runs, oracle_cross_check};
use focus_lab::cli::{parse_config_str, run_sweep, SweepResult};
use focus_lab::harness::{
    check_reduction, check_var_bound, fit_loglog_slope, run, smallest_var_constant, AgentVariant, GammaPolicy,
    HPolicy, OracleTolerances, Oracles, RunConfig, RunRecord,
};
use focus_lab::instances::InstanceSpec;

const OPTIMISM: &str = r#"
version = 1
t_grid = [5000]
seeds = { base = 0, count = 20 }
delta = 0.1
snapshots = true

[[instances]]
family = "two_state_pair"
b = 5.0
member = "p1"

[[variants]]
label = "focus"
h_policy = { kind = "explicit", value = 10.0 }
gamma_policy = { kind = "explicit", value = 0.99 }
"#;

const DETERMINISTIC: &str = r#"
version = 1
t_grid = [8192, 131072]
seeds = { base = 0, count = 10 }
delta = 0.1

[[instances]]
family = "deterministic_cycle"
rewards = [1.0, 0.0, 0.5, 0.0, 1.0, 0.25, 0.0, 0.75]

[[variants]]
label = "focus"
h_policy = { kind = "priorless_avg" }
gamma_policy = { kind = "avg_mode" }
"#;

const SCALING: &str = r#"
version = 1
t_grid = [4096, 8192, 16384, 32768, 65536, 131072]
seeds = { base = 0, count = 10 }
delta = 0.1

[[instances]]
family = "random_communicating"
s = 5
a = 3
gamma_support = 3
seed = 1

[[variants]]
label = "focus"
h_policy = { kind = "prior" }
gamma_policy = { kind = "avg_mode" }
"#;

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: u32, name: &str, passed: bool, detail: String) {
        let tag = if passed { "PASS" } else { "FAIL" };
        if !passed {
            self.failed += 1;
        }
        println!("{tag} criterion {id} ({name}): {detail}");
    }
}

fn sweep(text: &str) -> (SweepResult, f64) {
    let config = parse_config_str(text).expect("suite config is valid");
    let started = Instant::now();
    let result = run_sweep(&config).expect("suite runs");
    (result, started.elapsed().as_secs_f64())
}

fn mean_regret(result: &SweepResult, horizon: u64) -> f64 {
    let cell: Vec<f64> = result.records.iter().filter(|r| r.horizon == horizon).map(|r| r.avg_regret).collect();
    cell.iter().sum::<f64>() / cell.len() as f64
}

fn main() -> ExitCode {
    let mut report = Report { failed: 0 };

    // 1: operator properties
    let started = Instant::now();
    let ops = operator_property_suite(1000, 0);
    let secs = started.elapsed().as_secs_f64();
    let details: Vec<String> = ops.checks.iter().map(|c| c.detail.clone()).collect();
    report.line(1, "operator properties", ops.passed() && secs <= 10.0, format!("{}; {secs:.2}s", details.join("; ")));

    let (optimism, optimism_secs) = sweep(OPTIMISM);
    let (deterministic, _) = sweep(DETERMINISTIC);
    let (scaling, scaling_secs) = sweep(SCALING);
    let suites = [&optimism, &deterministic, &scaling];
    let pairs: Vec<(&RunRecord, &Oracles)> = suites.iter().flat_map(|s| s.pairs()).collect();

    // 2: monotone iterates and norm bound
    let solves: Vec<_> = pairs.iter().flat_map(|(r, _)| &r.episode_log).collect();
    let bad = solves.iter().filter(|e| e.monotone_violation > MONOTONE_TOL || !e.within_norm_bound).count();
    let worst = solves.iter().map(|e| e.monotone_violation).fold(0.0, f64::max);
    report.line(
        2,
        "monotone iterates and norm bound",
        bad == 0,
        format!("{bad} of {} solves violate; worst relative decrease {worst:.2e}", solves.len()),
    );

    // 3: optimism audit
    let (violating, n) = optimism_violating_runs(&optimism.pairs()).expect("snapshots recorded");
    report.line(
        3,
        "optimism audit",
        violating <= 2 && optimism_secs <= 60.0,
        format!("{violating} of {n} seeds with a violation (allowed 2); {optimism_secs:.2}s"),
    );

    // 4: deterministic instance
    let zero_var = deterministic.records.iter().all(|r| r.var_star == 0.0);
    let (lo, hi) = (mean_regret(&deterministic, 8192), mean_regret(&deterministic, 131072));
    let ratio = hi / lo.max(1.0);
    report.line(
        4,
        "deterministic zero variance",
        zero_var && ratio <= 3.0,
        format!("Var* = 0 in every run: {zero_var}; mean regret {lo:.1} at 2^13, {hi:.1} at 2^17, ratio {ratio:.2} (allowed 3)"),
    );

    // 5: sqrt(T) scaling
    let grid: Vec<f64> = [4096u64, 8192, 16384, 32768, 65536, 131072].iter().map(|&t| t as f64).collect();
    let means: Vec<f64> = grid.iter().map(|&t| mean_regret(&scaling, t as u64)).collect();
    let (ok, detail) = match fit_loglog_slope(&grid, &means) {
        Ok(fit) => (
            (0.35..=0.65).contains(&fit.slope) && scaling_secs <= 600.0,
            format!("slope {:.3} (allowed [0.35, 0.65]); {scaling_secs:.1}s single worker", fit.slope),
        ),
        Err(e) => (false, format!("fit failed: {e}")),
    };
    report.line(5, "sqrt(T) scaling", ok, detail);

    // 6: reduction inequality
    let fails = pairs.iter().filter(|(r, o)| !check_reduction(r, o).passed()).count();
    report.line(6, "reduction inequality", fails == 0, format!("{fails} of {} runs fail", pairs.len()));

    // 7: variance bound with c = 10
    let fails = pairs.iter().filter(|(r, o)| !check_var_bound(r, o.discounted.span_v, 10.0).passed()).count();
    let c = pairs.iter().map(|(r, o)| smallest_var_constant(r, o.discounted.span_v)).fold(0.0, f64::max);
    report.line(
        7,
        "variance bound",
        fails == 0,
        format!("{fails} of {} runs fail at c = 10; smallest passing c = {c:.4e}", pairs.len()),
    );

    // 8: episode count
    let fails = pairs.iter().filter(|(r, _)| !r.episodes_within_bound()).count();
    let ratio = pairs
        .iter()
        .map(|(r, _)| r.episodes as f64 / RunRecord::episode_bound(r.n_states, r.n_actions, r.horizon) as f64)
        .fold(0.0, f64::max);
    report.line(8, "episode accounting", fails == 0, format!("{fails} of {} runs exceed; max episodes/bound {ratio:.3}", pairs.len()));

    // 9: oracle cross-check
    match oracle_cross_check(1e-3) {
        Ok(suite) => {
            let details: Vec<String> = suite.checks.iter().map(|c| c.detail.clone()).collect();
            report.line(9, "oracle cross-check", suite.passed(), details.join("; "));
        }
        Err(e) => report.line(9, "oracle cross-check", false, e.to_string()),
    }

    // 10: performance envelope
    let horizon = 100_000;
    let spec = InstanceSpec::RandomCommunicating { s: 10, a: 4, gamma_support: 3, seed: 1 };
    let bundle = spec.build().expect("instance");
    let variant = AgentVariant::new("focus", HPolicy::PriorlessAvg, GammaPolicy::AvgMode);
    let config = RunConfig::new(spec, variant, horizon, 0, 0.1);
    let gamma = config.gamma().expect("gamma");
    let oracles = Oracles::compute(&bundle.mdp, gamma, OracleTolerances::default()).expect("oracles");
    let started = Instant::now();
    let record = run(&bundle, &config, &oracles).expect("run");
    let secs = started.elapsed().as_secs_f64();
    let log = &record.episode_log;
    let within_budget = log.iter().all(|e| e.applications <= 2 * e.budget + e.newton_steps + 2);
    let total: u64 = log.iter().map(|e| e.applications).sum();
    let budget: u64 = log.iter().map(|e| e.budget).sum();
    report.line(
        10,
        "performance envelope",
        secs <= 5.0 && within_budget && record.episodes_within_bound() && log.len() as u64 + 1 == record.episodes,
        format!(
            "{secs:.2}s; {} episodes; {total} operator applications against a summed budget of {budget}; per-episode counts within budget: {within_budget}",
            record.episodes
        ),
    );

    println!("{} of 10 criteria passed", 10 - report.failed);
    if report.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
