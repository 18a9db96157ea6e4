use serde::{Deserialize, Serialize};

use super::{HarnessError, Oracles, RunRecord};

/// Result of an inequality check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum CheckOutcome {
    /// `lhs ≤ rhs + slack`.
    Pass { lhs: f64, rhs: f64, slack: f64 },
    Fail { lhs: f64, rhs: f64, slack: f64 },
    /// The record's own bookkeeping is inconsistent; nothing was checked.
    Inconsistent { detail: f64 },
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, CheckOutcome::Pass { .. })
    }

    fn compare(lhs: f64, rhs: f64, slack: f64) -> Self {
        if lhs <= rhs + slack {
            CheckOutcome::Pass { lhs, rhs, slack }
        } else {
            CheckOutcome::Fail { lhs, rhs, slack }
        }
    }
}

/// `Regret(T) ≤ (1−γ)·span(V*_γ)·T + Regret_γ(T)`, with slack
/// `(tol + error_bound)·T` for the oracle accuracies.
pub fn check_reduction(record: &RunRecord, oracles: &Oracles) -> CheckOutcome {
    if !record.identity_holds() {
        return CheckOutcome::Inconsistent { detail: record.avg_regret - record.gamma_regret - record.offset_sum };
    }
    let t = record.horizon as f64;
    let rhs = (1.0 - record.gamma) * oracles.discounted.span_v * t + record.gamma_regret;
    let slack = (oracles.discounted.tolerance + oracles.gain.error_bound) * t;
    CheckOutcome::compare(record.avg_regret, rhs, slack)
}

/// `span·T + span²·ln(T/δ)`, the scale of the cumulative variance bound.
pub fn var_bound_scale(record: &RunRecord, span_v: f64) -> f64 {
    let t = record.horizon as f64;
    span_v * t + span_v * span_v * (t / record.delta).ln()
}

/// `Var*_γ ≤ c·(span·T + span²·ln(T/δ))`.
pub fn check_var_bound(record: &RunRecord, span_v: f64, c: f64) -> CheckOutcome {
    CheckOutcome::compare(record.var_star, c * var_bound_scale(record, span_v), 0.0)
}

/// Smallest `c` for which [`check_var_bound`] passes.
pub fn smallest_var_constant(record: &RunRecord, span_v: f64) -> f64 {
    if record.var_star <= 0.0 {
        return 0.0;
    }
    let scale = var_bound_scale(record, span_v);
    if scale > 0.0 {
        record.var_star / scale
    } else {
        f64::INFINITY
    }
}

/// Tolerance below which `Q̂_k − Q* + ε_k` counts as a violation.
pub const OPTIMISM_TOL: f64 = 1e-9;

/// Optimism audit of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimismAudit {
    pub episodes_checked: usize,
    /// Episode indices `k` with `min (Q̂_k − Q* + ε_k) < −tol`.
    pub violating_episodes: Vec<u64>,
    /// Smallest value of `Q̂_k − Q* + ε_k` over all episodes and pairs.
    pub worst_margin: f64,
}

impl OptimismAudit {
    pub fn violations(&self) -> usize {
        self.violating_episodes.len()
    }
}

/// Counts episodes whose table falls below `Q* − ε_k`. The oracle's own
/// tolerance is added to the threshold.
pub fn optimism_audit(record: &RunRecord, oracles: &Oracles) -> Result<OptimismAudit, HarnessError> {
    let snaps = record.snapshots.as_ref().ok_or(HarnessError::SnapshotsMissing)?;
    let q_star = &oracles.discounted.q_star;
    let tol = OPTIMISM_TOL + oracles.discounted.tolerance;
    let mut violating_episodes = Vec::new();
    let mut worst_margin = f64::INFINITY;
    for snap in snaps {
        let margin = snap
            .q
            .as_slice()
            .iter()
            .zip(q_star.as_slice())
            .map(|(q, s)| q - s + snap.epsilon)
            .fold(f64::INFINITY, f64::min);
        worst_margin = worst_margin.min(margin);
        if margin < -tol {
            violating_episodes.push(snap.k);
        }
    }
    Ok(OptimismAudit { episodes_checked: snaps.len(), violating_episodes, worst_margin })
}
