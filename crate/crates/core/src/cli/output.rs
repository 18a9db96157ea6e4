use std::fs;
use std::path::Path;

use super::CliError;
use crate::harness::{CellSummary, Checkpoint, OptimismAudit, RunRecord};

/// `%.17g`-style rendering: 17 significant digits, trailing zeros removed.
pub fn fmt_g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific rendering has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if !(-4..17).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (16 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub const RUNS_HEADER: [&str; 12] = [
    "instance_label",
    "variant_label",
    "T",
    "seed",
    "gamma",
    "H",
    "avg_regret",
    "gamma_regret",
    "var_star",
    "episodes",
    "reduction_check",
    "wall_time_s",
];

pub const SUMMARY_HEADER: [&str; 10] = [
    "instance_label",
    "variant_label",
    "T",
    "n_seeds",
    "avg_regret_mean",
    "avg_regret_std",
    "gamma_regret_mean",
    "gamma_regret_std",
    "var_star_mean",
    "episodes_mean",
];

pub const CHECKPOINT_HEADER: [&str; 4] = ["t", "cum_avg_regret", "cum_gamma_regret", "cum_var_star"];

pub const AUDIT_HEADER: [&str; 7] =
    ["instance_label", "variant_label", "T", "seed", "episodes_checked", "violations", "worst_margin"];

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write_rows<const N: usize>(path: &Path, header: [&str; N], rows: Vec<[String; N]>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Writes `runs.csv`. `reduction` holds the reduction check outcome per record.
pub fn write_runs_csv(path: &Path, records: &[RunRecord], reduction: &[bool]) -> Result<(), CliError> {
    let rows = records
        .iter()
        .zip(reduction)
        .map(|(r, &ok)| {
            [
                r.instance_label.clone(),
                r.variant_label.clone(),
                r.horizon.to_string(),
                r.seed.to_string(),
                fmt_g17(r.gamma),
                fmt_g17(r.h),
                fmt_g17(r.avg_regret),
                fmt_g17(r.gamma_regret),
                fmt_g17(r.var_star),
                r.episodes.to_string(),
                if ok { "pass" } else { "fail" }.to_string(),
                fmt_g17(r.wall_time_s),
            ]
        })
        .collect();
    write_rows(path, RUNS_HEADER, rows)
}

pub fn write_summary_csv(path: &Path, summaries: &[CellSummary]) -> Result<(), CliError> {
    let rows = summaries
        .iter()
        .map(|c| {
            [
                c.instance_label.clone(),
                c.variant_label.clone(),
                c.horizon.to_string(),
                c.n_seeds.to_string(),
                fmt_g17(c.avg_regret.mean),
                fmt_g17(c.avg_regret.std),
                fmt_g17(c.gamma_regret.mean),
                fmt_g17(c.gamma_regret.std),
                fmt_g17(c.var_star_mean),
                fmt_g17(c.episodes_mean),
            ]
        })
        .collect();
    write_rows(path, SUMMARY_HEADER, rows)
}

pub fn write_checkpoint_csv(path: &Path, checkpoints: &[Checkpoint]) -> Result<(), CliError> {
    let rows = checkpoints
        .iter()
        .map(|c| {
            [c.t.to_string(), fmt_g17(c.cum_avg_regret), fmt_g17(c.cum_gamma_regret), fmt_g17(c.cum_var_star)]
        })
        .collect();
    write_rows(path, CHECKPOINT_HEADER, rows)
}

pub fn write_audit_csv(path: &Path, audits: &[(&RunRecord, OptimismAudit)]) -> Result<(), CliError> {
    let rows = audits
        .iter()
        .map(|(r, a)| {
            [
                r.instance_label.clone(),
                r.variant_label.clone(),
                r.horizon.to_string(),
                r.seed.to_string(),
                a.episodes_checked.to_string(),
                a.violations().to_string(),
                fmt_g17(a.worst_margin),
            ]
        })
        .collect();
    write_rows(path, AUDIT_HEADER, rows)
}

/// File-name-safe form of a label.
pub fn sanitize(label: &str) -> String {
    let mut out = String::with_capacity(label.len());
    for c in label.chars() {
        if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
            out.push(c);
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_matches('_').to_string()
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}
