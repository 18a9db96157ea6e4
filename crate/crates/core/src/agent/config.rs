use serde::{Deserialize, Serialize};

use super::AgentError;

/// Exploration bonus shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BonusKind {
    /// `max{c_var·√(Var·U/n), c_lin·H·U/n}`.
    #[default]
    Bernstein,
    /// `c_var·H·√(U/n)`; ablation.
    Hoeffding,
}

/// How the optimistic table is recomputed at the start of an episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    /// Solve the clipped optimistic fixed point to accuracy `ε_k`.
    #[default]
    Full,
    /// Apply the operator once to the previous table; ablation.
    OneStep,
}

/// Numeric constants of the bonus and of the confidence level `δ′ = δ / (c_union·S²AT)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BonusConstants {
    pub variance: f64,
    pub linear: f64,
    pub union: f64,
}

impl Default for BonusConstants {
    fn default() -> Self {
        Self { variance: 4.0, linear: 32.0, union: 9.0 }
    }
}

/// Inputs of the learner. The defaults for `bonus`, `solve_mode` and `clip`
/// give the unmodified algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocusConfig {
    pub horizon: u64,
    pub gamma: f64,
    pub delta: f64,
    /// Span clipping level `H ≥ 1`.
    pub h: f64,
    pub bonus: BonusKind,
    pub solve_mode: SolveMode,
    pub clip: bool,
    /// Run exactly the iteration budget `m` from the zero table, without
    /// early exit or extrapolation.
    pub exact_m: bool,
    pub constants: BonusConstants,
}

impl FocusConfig {
    pub fn new(horizon: u64, gamma: f64, delta: f64, h: f64) -> Self {
        Self {
            horizon,
            gamma,
            delta,
            h,
            bonus: BonusKind::default(),
            solve_mode: SolveMode::default(),
            clip: true,
            exact_m: false,
            constants: BonusConstants::default(),
        }
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        if self.horizon == 0 {
            return Err(AgentError::BadConfig("horizon must be at least 1".into()));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(AgentError::BadConfig(format!("gamma must lie in (0, 1), got {}", self.gamma)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(AgentError::BadConfig(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.h >= 1.0) || !self.h.is_finite() {
            return Err(AgentError::BadConfig(format!("H must be finite and at least 1, got {}", self.h)));
        }
        let c = &self.constants;
        if !(c.variance > 0.0 && c.linear > 0.0 && c.union > 0.0) {
            return Err(AgentError::BadConfig("bonus constants must be positive".into()));
        }
        Ok(())
    }

    /// Span level used inside the bonus. Without clipping the `H` term is
    /// replaced by the trivial span bound `1/(1−γ)`.
    pub fn bonus_h(&self) -> f64 {
        if self.clip {
            self.h
        } else {
            1.0 / (1.0 - self.gamma)
        }
    }

    /// Upper bound `(1 + c_lin·H·U)/(1−γ)` on every optimistic table.
    pub fn q_bound(&self, u: f64) -> f64 {
        (1.0 + self.constants.linear * self.bonus_h() * u) / (1.0 - self.gamma)
    }
}
