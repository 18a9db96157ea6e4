//! Tabular MDP model, elementary operators and exact oracles.

mod file;
mod model;
mod ops;
mod oracle;

use thiserror::Error;

pub use file::{read_mdp_file, write_mdp_file, MDP_FILE_SCHEMA};
pub use model::{QTable, RawMdp, TabularMdp, ValueVector, PROB_TOL};
pub use ops::{argmax, clip, greedy, span, variance};
pub(crate) use ops::{min_max, variance_unchecked};
pub use oracle::{metadata, solve_discounted, solve_gain_bias, GainBias, MdpMetadata, SolvedDiscounted};

#[derive(Debug, Error)]
pub enum MdpError {
    #[error("transition row {row} is not a probability distribution (sum {sum})")]
    RowNotStochastic { row: String, sum: f64 },
    #[error("reward {value} at (state {state}, action {action}) outside [0, 1]")]
    RewardOutOfRange { state: usize, action: usize, value: f64 },
    #[error("bad initial distribution: {0}")]
    BadInitialDist(String),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty vector")]
    EmptyVector,
    #[error("clipping level must be nonnegative, got {0}")]
    NegativeH(f64),
    #[error("discount factor must lie in (0, 1), got {0}")]
    BadGamma(f64),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("value iteration did not converge after {iterations} iterations (certified error {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("mdp file: {0}")]
    File(String),
}
