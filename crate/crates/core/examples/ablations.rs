//! Bonus, solve-mode and clipping variants on one model.

use focus_lab::cli::{parse_config_str, run_sweep};

const CONFIG: &str = r#"
version = 1
t_grid = [20000]
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

[[variants]]
label = "hoeffding"
h_policy = { kind = "prior" }
bonus = "hoeffding"

[[variants]]
label = "one_step"
h_policy = { kind = "prior" }
solve_mode = "one_step"

[[variants]]
label = "no_clip"
h_policy = { kind = "prior" }
clip = false
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let result = run_sweep(&parse_config_str(CONFIG)?)?;
    for s in &result.summaries {
        println!(
            "{:<10} mean regret {:>9.1} ± {:>7.1}, episodes {:.1}",
            s.variant_label, s.avg_regret.mean, s.avg_regret.std, s.episodes_mean
        );
    }
    Ok(())
}
