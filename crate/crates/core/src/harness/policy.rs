use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::agent::{BonusConstants, BonusKind, FocusConfig, SolveMode};
use crate::instances::{InstanceBundle, InstanceSpec};
use crate::mdp::{solve_discounted, solve_gain_bias, GainBias, SolvedDiscounted, TabularMdp};

/// How the clipping level `H` is chosen for a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HPolicy {
    Explicit { value: f64 },
    /// `2·span(h*)` from the gain/bias oracle, floored at 1.
    Prior,
    /// `√(T/(S³A))`, floored at 1.
    PriorlessAvg,
    /// `1/(1−γ)`.
    DiscountedNaive,
}

/// How the discount factor is chosen for a run.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GammaPolicy {
    Explicit { value: f64 },
    /// `1 − 1/T`.
    #[default]
    AvgMode,
}

impl GammaPolicy {
    pub fn resolve(&self, horizon: u64) -> Result<f64, HarnessError> {
        let gamma = match *self {
            GammaPolicy::Explicit { value } => value,
            GammaPolicy::AvgMode => 1.0 - 1.0 / horizon as f64,
        };
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(HarnessError::BadPolicy(format!("resolved gamma {gamma} outside (0, 1)")));
        }
        Ok(gamma)
    }
}

impl HPolicy {
    pub fn resolve(&self, mdp: &TabularMdp, horizon: u64, gamma: f64, gain: &GainBias) -> Result<f64, HarnessError> {
        let h = match *self {
            HPolicy::Explicit { value } => value,
            HPolicy::Prior => (2.0 * gain.span_h).max(1.0),
            HPolicy::PriorlessAvg => {
                let s = mdp.n_states() as f64;
                let a = mdp.n_actions() as f64;
                (horizon as f64 / (s * s * s * a)).sqrt().max(1.0)
            }
            HPolicy::DiscountedNaive => 1.0 / (1.0 - gamma),
        };
        if !(h >= 1.0) || !h.is_finite() {
            return Err(HarnessError::BadPolicy(format!("resolved H {h} is not a finite value ≥ 1")));
        }
        Ok(h)
    }
}

fn default_true() -> bool {
    true
}

/// Algorithm variant: the learner's switches plus its `H` and `γ` policies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentVariant {
    pub label: String,
    /// Required: no default clipping level is assumed.
    pub h_policy: HPolicy,
    #[serde(default)]
    pub gamma_policy: GammaPolicy,
    #[serde(default)]
    pub bonus: BonusKind,
    #[serde(default)]
    pub solve_mode: SolveMode,
    #[serde(default = "default_true")]
    pub clip: bool,
    #[serde(default)]
    pub exact_m: bool,
    #[serde(default)]
    pub constants: BonusConstants,
}

impl AgentVariant {
    /// The unmodified learner with the given policies.
    pub fn new(label: impl Into<String>, h_policy: HPolicy, gamma_policy: GammaPolicy) -> Self {
        Self {
            label: label.into(),
            h_policy,
            gamma_policy,
            bonus: BonusKind::default(),
            solve_mode: SolveMode::default(),
            clip: true,
            exact_m: false,
            constants: BonusConstants::default(),
        }
    }
}

/// Oracle accuracy targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleTolerances {
    pub discounted: f64,
    pub gain: f64,
}

impl Default for OracleTolerances {
    fn default() -> Self {
        Self { discounted: 1e-6, gain: 1e-4 }
    }
}

/// Ground truth used to score a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Oracles {
    pub discounted: SolvedDiscounted,
    pub gain: GainBias,
}

impl Oracles {
    pub fn compute(mdp: &TabularMdp, gamma: f64, tol: OracleTolerances) -> Result<Self, HarnessError> {
        Ok(Self { discounted: solve_discounted(mdp, gamma, tol.discounted)?, gain: solve_gain_bias(mdp, tol.gain)? })
    }
}

/// One run: instance, variant, horizon and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub instance: InstanceSpec,
    pub variant: AgentVariant,
    pub horizon: u64,
    pub seed: u64,
    pub delta: f64,
    /// Keep a copy of every episode's optimistic table.
    #[serde(default)]
    pub snapshots: bool,
    /// Random stream index used together with the seed.
    #[serde(default)]
    pub stream: u64,
}

impl RunConfig {
    pub fn new(instance: InstanceSpec, variant: AgentVariant, horizon: u64, seed: u64, delta: f64) -> Self {
        Self { instance, variant, horizon, seed, delta, snapshots: false, stream: 0 }
    }

    pub fn gamma(&self) -> Result<f64, HarnessError> {
        self.variant.gamma_policy.resolve(self.horizon)
    }

    /// Learner configuration for this run.
    pub fn focus_config(&self, bundle: &InstanceBundle, gain: &GainBias) -> Result<FocusConfig, HarnessError> {
        let gamma = self.gamma()?;
        let h = self.variant.h_policy.resolve(&bundle.mdp, self.horizon, gamma, gain)?;
        let v = &self.variant;
        let config = FocusConfig {
            horizon: self.horizon,
            gamma,
            delta: self.delta,
            h,
            bonus: v.bonus,
            solve_mode: v.solve_mode,
            clip: v.clip,
            exact_m: v.exact_m,
            constants: v.constants,
        };
        config.validate()?;
        Ok(config)
    }
}
