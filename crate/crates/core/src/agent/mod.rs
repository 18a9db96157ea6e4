//! The optimistic learner: counts, empirical model, doubling episodes and
//! the clipped optimistic fixed-point solve.

mod config;
mod operator;
mod solver;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{BonusConstants, BonusKind, FocusConfig, SolveMode};
pub use operator::{bonus, iteration_budget, EmpiricalOperator};
pub use solver::{SolveStats, MONOTONE_TOL};

use crate::mdp::{argmax, clip, min_max, QTable, TabularMdp, ValueVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error("invalid agent configuration: {0}")]
    BadConfig(String),
    #[error("{name} must be positive, got {value}")]
    NonpositiveArgument { name: &'static str, value: f64 },
    #[error("dimension error: {0}")]
    Dimension(String),
}

/// `(δ′, U)` with `δ′ = δ/(c·S²AT)` and `U = ln(1/δ′)`.
pub fn confidence_level(config: &FocusConfig, n_states: usize, n_actions: usize) -> (f64, f64) {
    let s = n_states as f64;
    let denom = config.constants.union * s * s * n_actions as f64 * config.horizon as f64;
    let delta_prime = config.delta / denom;
    (delta_prime, (denom / config.delta).ln())
}

/// Empirical kernel of a count table, with uniform rows where nothing was observed.
pub fn empirical_kernel(counts_sas: &[u64], n_states: usize, n_actions: usize) -> Vec<f64> {
    let mut p = vec![0.0; n_states * n_actions * n_states];
    for (row, (out, counts)) in p.chunks_mut(n_states).zip(counts_sas.chunks(n_states)).enumerate() {
        debug_assert!(row < n_states * n_actions);
        let n: u64 = counts.iter().sum();
        if n == 0 {
            out.fill(1.0 / n_states as f64);
        } else {
            for (o, &c) in out.iter_mut().zip(counts) {
                *o = c as f64 / n as f64;
            }
        }
    }
    p
}

impl EmpiricalOperator {
    /// Operator built from raw transition counts `N(s,a,s′)` (row `s*A + a`).
    pub fn from_counts(
        config: &FocusConfig,
        n_states: usize,
        n_actions: usize,
        reward: &[f64],
        counts_sas: &[u64],
    ) -> Result<Self, AgentError> {
        config.validate()?;
        if reward.len() != n_states * n_actions || counts_sas.len() != n_states * n_actions * n_states {
            return Err(AgentError::Dimension(format!(
                "expected {} rewards and {} counts",
                n_states * n_actions,
                n_states * n_actions * n_states
            )));
        }
        let (_, u) = confidence_level(config, n_states, n_actions);
        let counts = counts_sas.chunks(n_states).map(|c| c.iter().sum()).collect();
        let p_hat = empirical_kernel(counts_sas, n_states, n_actions);
        Ok(Self::new(config, u, reward.to_vec(), p_hat, counts, n_states, n_actions))
    }
}

/// Summary of one episode's recomputation of the optimistic table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeReport {
    pub k: u64,
    pub t: u64,
    pub epsilon: f64,
    /// Iteration budget `m` of the episode.
    pub budget: u64,
    pub applications: u64,
    pub newton_steps: u64,
    pub certified_gap: f64,
    pub monotone_violation: f64,
    pub q_norm: f64,
    pub v_span: f64,
    pub within_norm_bound: bool,
}

/// Learner state. One instance serves one run.
#[derive(Debug, Clone)]
pub struct FocusAgent {
    config: FocusConfig,
    n_states: usize,
    n_actions: usize,
    reward: Vec<f64>,
    counts_sa: Vec<u64>,
    counts_sas: Vec<u64>,
    episode: u64,
    t: u64,
    delta_prime: f64,
    u: f64,
    epsilon: f64,
    p_hat: Vec<f64>,
    q_hat: QTable,
    v_hat: ValueVector,
    operator: Option<EmpiricalOperator>,
    reports: Vec<EpisodeReport>,
}

impl FocusAgent {
    /// Fresh learner with the known reward table (`reward[s*A + a]`).
    pub fn new(config: FocusConfig, n_states: usize, n_actions: usize, reward: Vec<f64>) -> Result<Self, AgentError> {
        config.validate()?;
        if n_states == 0 || n_actions == 0 || reward.len() != n_states * n_actions {
            return Err(AgentError::Dimension(format!(
                "reward table must have {n_states}x{n_actions} > 0 entries, got {}",
                reward.len()
            )));
        }
        let (delta_prime, u) = confidence_level(&config, n_states, n_actions);
        let q0 = 1.0 / (1.0 - config.gamma);
        Ok(Self {
            config,
            n_states,
            n_actions,
            reward,
            counts_sa: vec![0; n_states * n_actions],
            counts_sas: vec![0; n_states * n_actions * n_states],
            episode: 1,
            t: 1,
            delta_prime,
            u,
            epsilon: f64::INFINITY,
            p_hat: vec![1.0 / n_states as f64; n_states * n_actions * n_states],
            q_hat: QTable::constant(n_states, n_actions, q0),
            v_hat: ValueVector::constant(n_states, q0),
            operator: None,
            reports: Vec::new(),
        })
    }

    /// Learner for a model, reading the reward table from it.
    pub fn for_mdp(config: FocusConfig, mdp: &TabularMdp) -> Result<Self, AgentError> {
        let (s_n, a_n) = (mdp.n_states(), mdp.n_actions());
        let reward = (0..s_n).flat_map(|s| (0..a_n).map(move |a| (s, a))).map(|(s, a)| mdp.reward(s, a)).collect();
        Self::new(config, s_n, a_n, reward)
    }

    /// Greedy action of the current table, lowest index on ties.
    pub fn act(&self, s: usize) -> usize {
        argmax(self.q_hat.row(s))
    }

    /// Records the transition `(s, a, s_next)` taken at time `t` (1-based).
    /// Returns `true` when a new episode started.
    pub fn observe(&mut self, s: usize, a: usize, s_next: usize, t: u64) -> bool {
        let i = s * self.n_actions + a;
        self.counts_sa[i] += 1;
        self.counts_sas[i * self.n_states + s_next] += 1;
        self.t = t + 1;
        if self.counts_sa[i].is_power_of_two() {
            self.start_episode(t);
            true
        } else {
            false
        }
    }

    fn start_episode(&mut self, t: u64) {
        let gamma = self.config.gamma;
        self.episode += 1;
        self.epsilon = 1.0 / (t as f64 * (1.0 - gamma));
        self.p_hat = empirical_kernel(&self.counts_sas, self.n_states, self.n_actions);
        let op = EmpiricalOperator::new(
            &self.config,
            self.u,
            self.reward.clone(),
            self.p_hat.clone(),
            self.counts_sa.clone(),
            self.n_states,
            self.n_actions,
        );
        let budget = operator::iteration_budget_with(
            self.config.constants.linear,
            gamma,
            self.epsilon,
            self.config.bonus_h(),
            self.u,
        )
        .expect("validated configuration gives positive budget arguments");
        let (q, stats) = match self.config.solve_mode {
            SolveMode::OneStep => {
                let q = op.apply(&self.q_hat);
                (q, SolveStats { applications: 1, ..SolveStats::default() })
            }
            SolveMode::Full if self.config.exact_m => solver::solve_exact(&op, budget),
            SolveMode::Full => solver::solve_accelerated(&op, self.epsilon, budget),
        };
        self.q_hat = q;
        self.v_hat = self.clipped_values();
        let q_norm = self.q_hat.sup_norm();
        self.reports.push(EpisodeReport {
            k: self.episode,
            t,
            epsilon: self.epsilon,
            budget,
            applications: stats.applications,
            newton_steps: stats.newton_steps,
            certified_gap: stats.certified_gap,
            monotone_violation: stats.monotone_violation,
            q_norm,
            v_span: {
                let (lo, hi) = min_max(&self.v_hat);
                hi - lo
            },
            within_norm_bound: q_norm <= self.config.q_bound(self.u) * (1.0 + 1e-12),
        });
        self.operator = Some(op);
    }

    fn clipped_values(&self) -> ValueVector {
        let mq: Vec<f64> = (0..self.n_states).map(|s| self.q_hat.row(s)[self.act(s)]).collect();
        if self.config.clip {
            clip(&mq, self.config.h).expect("H is validated to be at least 1")
        } else {
            ValueVector(mq)
        }
    }

    pub fn config(&self) -> &FocusConfig {
        &self.config
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// Current episode index `k` (starts at 1).
    pub fn episode(&self) -> u64 {
        self.episode
    }

    /// Next timestep to be observed.
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn delta_prime(&self) -> f64 {
        self.delta_prime
    }

    /// Accuracy target of the current episode (infinite before the first trigger).
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn q_hat(&self) -> &QTable {
        &self.q_hat
    }

    /// `Clip_H(M Q̂_k)` (or `M Q̂_k` without clipping).
    pub fn v_hat(&self) -> &ValueVector {
        &self.v_hat
    }

    /// `N(s,a)`, row `s*A + a`.
    pub fn counts_sa(&self) -> &[u64] {
        &self.counts_sa
    }

    /// `N(s,a,s′)`, index `(s*A + a)*S + s′`.
    pub fn counts_sas(&self) -> &[u64] {
        &self.counts_sas
    }

    /// Empirical kernel of the current episode, row `s*A + a`.
    pub fn p_hat(&self) -> &[f64] {
        &self.p_hat
    }

    /// Operator of the current episode, if one has started.
    pub fn operator(&self) -> Option<&EmpiricalOperator> {
        self.operator.as_ref()
    }

    pub fn reports(&self) -> &[EpisodeReport] {
        &self.reports
    }

    /// `(1 + c_lin·H·U)/(1−γ)`.
    pub fn q_bound(&self) -> f64 {
        self.config.q_bound(self.u)
    }
}
