use std::fs;
use std::path::Path;
use std::process::Command;

use focus_lab::cli::*;

const MINIMAL: &str = r#"
version = 1
t_grid = [300]
seeds = [7]

[[instances]]
family = "two_state_pair"
b = 5.0

[[variants]]
label = "focus"
h_policy = { kind = "explicit", value = 10.0 }
gamma_policy = { kind = "explicit", value = 0.99 }
"#;

const GRID: &str = r#"
version = 1
t_grid = [200, 400]
seeds = { base = 3, count = 3 }

[[instances]]
family = "random_communicating"
s = 4
a = 2
gamma_support = 2
seed = 1

[[instances]]
family = "deterministic_cycle"
rewards = [1.0, 0.0, 0.5]

[[variants]]
label = "focus"
h_policy = { kind = "prior" }

[[variants]]
label = "hoeffding"
h_policy = { kind = "explicit", value = 3.0 }
bonus = "hoeffding"
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_focus-lab"))
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path
}

/// Drops the trailing wall-time column of every runs.csv line.
fn without_wall_time(text: &str) -> Vec<String> {
    text.lines().map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string()).collect()
}

#[test]
fn config_examples() {
    assert!(parse_config_str(MINIMAL).is_ok());
    let repeated = MINIMAL.replace("t_grid = [300]", "t_grid = [100, 100]");
    match parse_config_str(&repeated) {
        Err(CliError::Schema { path, message }) => {
            assert_eq!(path, "t_grid[1]");
            assert!(message.contains("strictly increasing"));
        }
        other => panic!("unexpected {other:?}"),
    }
    let typo = MINIMAL.replace("version = 1", "version = 1\ngama = 0.9");
    match parse_config_str(&typo) {
        Err(e @ CliError::Schema { .. }) => assert!(e.to_string().contains("gama")),
        other => panic!("unexpected {other:?}"),
    }
    let broken = MINIMAL.replace("seeds = [7]", "seeds = [7");
    assert!(matches!(parse_config_str(&broken), Err(CliError::Parse(_))));
    let seeds = parse_config_str(GRID).unwrap().seeds.expand();
    assert_eq!(seeds, vec![3, 4, 5]);
}

#[test]
fn minimal_sweep_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), MINIMAL);
    let out = dir.path().join("out");
    let status = bin().args(["sweep", "--config"]).arg(&config).arg("--out").arg(&out).status().unwrap();
    assert!(status.success());
    let runs = fs::read_to_string(out.join("runs.csv")).unwrap();
    let lines: Vec<&str> = runs.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], RUNS_HEADER.join(","));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().next().unwrap(), SUMMARY_HEADER.join(","));
    assert_eq!(summary.lines().count(), 2);
    let checkpoints: Vec<_> = fs::read_dir(out.join("checkpoints")).unwrap().collect();
    assert_eq!(checkpoints.len(), 1);
}

#[test]
fn reruns_are_identical_except_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), GRID);
    let mut outputs = Vec::new();
    for (name, workers) in [("a", "1"), ("b", "4")] {
        let out = dir.path().join(name);
        let status = bin()
            .args(["sweep", "--workers", workers, "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(out);
    }
    let runs: Vec<String> = outputs.iter().map(|o| fs::read_to_string(o.join("runs.csv")).unwrap()).collect();
    assert_eq!(runs[0].lines().count(), 1 + 2 * 2 * 2 * 3);
    assert_eq!(without_wall_time(&runs[0]), without_wall_time(&runs[1]));
    for file in ["summary.csv"] {
        assert_eq!(fs::read(outputs[0].join(file)).unwrap(), fs::read(outputs[1].join(file)).unwrap());
    }
    for entry in fs::read_dir(outputs[0].join("checkpoints")).unwrap() {
        let name = entry.unwrap().file_name();
        let a = fs::read(outputs[0].join("checkpoints").join(&name)).unwrap();
        let b = fs::read(outputs[1].join("checkpoints").join(&name)).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn parallel_sweep_matches_serial() {
    let mut config = parse_config_str(GRID).unwrap();
    let serial = run_sweep(&config).unwrap();
    config.workers = 3;
    let parallel = run_sweep(&config).unwrap();
    assert_eq!(serial.records.len(), parallel.records.len());
    for (a, b) in serial.records.iter().zip(&parallel.records) {
        let (mut a, mut b) = (a.clone(), b.clone());
        a.wall_time_s = 0.0;
        b.wall_time_s = 0.0;
        assert_eq!(a, b);
    }
    assert_eq!(serial.summaries, parallel.summaries);
}

#[test]
fn empty_record_list_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("runs.csv");
    write_runs_csv(&path, &[], &[]).unwrap();
    assert_eq!(fs::read_to_string(&path).unwrap(), format!("{}\n", RUNS_HEADER.join(",")));
    let path = dir.path().join("summary.csv");
    write_summary_csv(&path, &[]).unwrap();
    assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 1);
}

#[test]
fn floats_use_seventeen_digits() {
    assert_eq!(fmt_g17(0.1), "0.10000000000000001");
    assert_eq!(fmt_g17(1.0), "1");
    assert_eq!(fmt_g17(1e-20).parse::<f64>().unwrap(), 1e-20);
    let x = 2.0f64.sqrt() * 1e7;
    assert_eq!(fmt_g17(x).parse::<f64>().unwrap(), x);
}

#[test]
fn verify_exits_zero_on_builtin_suites() {
    let out = bin().arg("verify").output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("[PASS] constant shift"));
    assert!(!stdout.contains("[FAIL]"));
}

#[test]
fn verify_exits_two_on_failed_check() {
    let dir = tempfile::tempdir().unwrap();
    let stochastic = MINIMAL.replace("seeds = [7]", "seeds = [1, 2]");
    let config = write_config(dir.path(), &stochastic);
    // c = 0 cannot bound a positive cumulative variance
    let out = bin().args(["verify", "--var-constant", "0", "--config"]).arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("[FAIL]"));
}

#[test]
fn unwritable_output_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), MINIMAL);
    let blocker = dir.path().join("file");
    fs::write(&blocker, "not a directory").unwrap();
    let out = bin().args(["sweep", "--config"]).arg(&config).arg("--out").arg(blocker.join("out")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn missing_config_exits_one() {
    let out = bin().args(["sweep", "--config", "/nonexistent/config.toml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().arg("sweep").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn solve_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), GRID);
    let out = bin().args(["solve", "--config"]).arg(&config).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("random_communicating(S=4,A=2,G=2,seed=1)"));
    assert!(text.contains("deterministic_cycle(S=3)"));

    let export = dir.path().join("export");
    let out = bin().args(["export-instance", "--config"]).arg(&config).arg("--out").arg(&export).output().unwrap();
    assert!(out.status.success());
    let written: Vec<String> = String::from_utf8_lossy(&out.stdout).lines().map(str::to_string).collect();
    assert_eq!(written.len(), 2);
    for (path, spec) in written.iter().zip(parse_config_str(GRID).unwrap().instances) {
        let back = focus_lab::mdp::read_mdp_file(Path::new(path)).unwrap();
        assert_eq!(back, spec.build().unwrap().mdp);
    }
}

#[test]
fn run_subcommand_selects_one_cell() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), GRID);
    let out_dir = dir.path().join("cell");
    let out = bin()
        .args(["run", "--instance", "1", "--variant", "1", "--horizon", "400", "--seed-override", "9", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let runs = fs::read_to_string(out_dir.join("runs.csv")).unwrap();
    let rows: Vec<&str> = runs.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("deterministic_cycle(S=3),hoeffding,400,9,"));
}

#[test]
fn snapshots_flag_writes_audit() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), MINIMAL);
    let out = dir.path().join("out");
    let status = bin()
        .args(["sweep", "--snapshots", "--exact-m", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let audit = fs::read_to_string(out.join("audit.csv")).unwrap();
    assert_eq!(audit.lines().next().unwrap(), AUDIT_HEADER.join(","));
    assert_eq!(audit.lines().count(), 2);
}
