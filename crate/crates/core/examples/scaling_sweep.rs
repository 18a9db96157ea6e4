//! Regret over a horizon grid with a log-log slope fit.

use focus_lab::cli::{parse_config_str, run_sweep};
use focus_lab::harness::fit_loglog_slope;

const CONFIG: &str = r#"
version = 1
t_grid = [4096, 16384, 65536]
seeds = { base = 0, count = 5 }
workers = 4

[[instances]]
family = "random_communicating"
s = 5
a = 3
gamma_support = 3
seed = 1

[[variants]]
label = "focus"
h_policy = { kind = "prior" }
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let result = run_sweep(&parse_config_str(CONFIG)?)?;
    let mut horizons = Vec::new();
    let mut means = Vec::new();
    for s in &result.summaries {
        println!("T = {:>6}: mean regret {:>8.1} ± {:.1}", s.horizon, s.avg_regret.mean, s.avg_regret.std);
        horizons.push(s.horizon as f64);
        means.push(s.avg_regret.mean);
    }
    let fit = fit_loglog_slope(&horizons, &means)?;
    println!("log-log slope {:.3}, intercept {:.3}", fit.slope, fit.intercept);
    Ok(())
}
