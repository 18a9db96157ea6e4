//! Seeded simulation, regret and variance accounting, inequality checks,
//! multi-seed aggregation and scaling fits.

mod checks;
mod policy;
mod run;
mod stats;

use thiserror::Error;

pub use checks::{
    check_reduction, check_var_bound, optimism_audit, smallest_var_constant, var_bound_scale, CheckOutcome,
    OptimismAudit, OPTIMISM_TOL,
};
pub use policy::{AgentVariant, GammaPolicy, HPolicy, OracleTolerances, Oracles, RunConfig};
pub use run::{checkpoint_times, run, Checkpoint, QSnapshot, RunRecord};
pub use stats::{aggregate, fit_loglog_slope, summarize_cell, CellSummary, LogLogFit, Stats};

use crate::agent::AgentError;
use crate::instances::InstanceError;
use crate::mdp::MdpError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Mdp(#[from] MdpError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error("oracle computed at gamma {found}, run uses {expected}")]
    OracleMismatch { expected: f64, found: f64 },
    #[error("run was executed without Q-table snapshots")]
    SnapshotsMissing,
    #[error("no records in cell")]
    EmptyCell,
    #[error("cannot take the log of nonpositive value {value} at grid point {index}")]
    NonpositiveRegret { index: usize, value: f64 },
    #[error("a log-log fit needs at least 3 distinct points, got {0}")]
    TooFewPoints(usize),
    #[error("bad policy: {0}")]
    BadPolicy(String),
}
