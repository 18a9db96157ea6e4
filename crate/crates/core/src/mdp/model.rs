use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use super::MdpError;

/// Tolerance used when checking that probability rows sum to one.
pub const PROB_TOL: f64 = 1e-12;

/// Unvalidated model data, as read from an MDP file or assembled by a generator.
///
/// `transitions` holds one row of `n_states` probabilities per (state, action),
/// ordered state-major: row `s * n_actions + a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMdp {
    pub n_states: usize,
    pub n_actions: usize,
    pub rewards: Vec<Vec<f64>>,
    pub transitions: Vec<Vec<f64>>,
    pub initial_dist: Vec<f64>,
}

/// A validated finite MDP with known deterministic rewards in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    n_states: usize,
    n_actions: usize,
    // (s * A + a) * S + s'
    transition: Vec<f64>,
    // s * A + a
    reward: Vec<f64>,
    initial_dist: Vec<f64>,
}

fn check_row(row: &[f64], what: impl Fn() -> String) -> Result<(), MdpError> {
    let mut sum = 0.0;
    for &p in row {
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            return Err(MdpError::RowNotStochastic { row: what(), sum: f64::NAN });
        }
        sum += p;
    }
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(MdpError::RowNotStochastic { row: what(), sum });
    }
    Ok(())
}

impl TabularMdp {
    /// Validates raw model data.
    pub fn validate(raw: RawMdp) -> Result<Self, MdpError> {
        let RawMdp { n_states, n_actions, rewards, transitions, initial_dist } = raw;
        if n_states == 0 || n_actions == 0 {
            return Err(MdpError::Dimension("n_states and n_actions must be positive".into()));
        }
        if rewards.len() != n_states || rewards.iter().any(|r| r.len() != n_actions) {
            return Err(MdpError::Dimension(format!(
                "rewards must be a {n_states}x{n_actions} table"
            )));
        }
        if transitions.len() != n_states * n_actions || transitions.iter().any(|r| r.len() != n_states) {
            return Err(MdpError::Dimension(format!(
                "transitions must hold {} rows of {n_states} probabilities",
                n_states * n_actions
            )));
        }
        if initial_dist.len() != n_states {
            return Err(MdpError::Dimension(format!("initial_dist must have length {n_states}")));
        }

        let mut reward = Vec::with_capacity(n_states * n_actions);
        for (s, row) in rewards.iter().enumerate() {
            for (a, &r) in row.iter().enumerate() {
                if !r.is_finite() || !(0.0..=1.0).contains(&r) {
                    return Err(MdpError::RewardOutOfRange { state: s, action: a, value: r });
                }
                reward.push(r);
            }
        }
        let mut transition = Vec::with_capacity(n_states * n_actions * n_states);
        for (idx, row) in transitions.iter().enumerate() {
            check_row(row, || format!("(state {}, action {})", idx / n_actions, idx % n_actions))?;
            transition.extend_from_slice(row);
        }
        let mut sum = 0.0;
        for &p in &initial_dist {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(MdpError::BadInitialDist(format!("entry {p} outside [0, 1]")));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(MdpError::BadInitialDist(format!("sums to {sum}")));
        }

        Ok(Self { n_states, n_actions, transition, reward, initial_dist })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// Next-state distribution of `(s, a)`.
    #[inline]
    pub fn row(&self, s: usize, a: usize) -> &[f64] {
        let start = (s * self.n_actions + a) * self.n_states;
        &self.transition[start..start + self.n_states]
    }

    #[inline]
    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.reward[s * self.n_actions + a]
    }

    pub fn initial_dist(&self) -> &[f64] {
        &self.initial_dist
    }

    pub fn to_raw(&self) -> RawMdp {
        let (s_n, a_n) = (self.n_states, self.n_actions);
        RawMdp {
            n_states: s_n,
            n_actions: a_n,
            rewards: (0..s_n).map(|s| (0..a_n).map(|a| self.reward(s, a)).collect()).collect(),
            transitions: (0..s_n * a_n)
                .map(|i| self.row(i / a_n, i % a_n).to_vec())
                .collect(),
            initial_dist: self.initial_dist.clone(),
        }
    }
}

/// Real value per state.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValueVector(pub Vec<f64>);

impl ValueVector {
    pub fn constant(n: usize, c: f64) -> Self {
        Self(vec![c; n])
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl Deref for ValueVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for ValueVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for ValueVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Real value per (state, action), stored state-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    n_states: usize,
    n_actions: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn constant(n_states: usize, n_actions: usize, c: f64) -> Self {
        Self { n_states, n_actions, values: vec![c; n_states * n_actions] }
    }

    pub fn zeros(n_states: usize, n_actions: usize) -> Self {
        Self::constant(n_states, n_actions, 0.0)
    }

    /// Builds a table from a flat state-major buffer.
    pub fn from_flat(n_states: usize, n_actions: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), n_states * n_actions, "QTable buffer has wrong length");
        Self { n_states, n_actions, values }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    #[inline]
    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.values[s * self.n_actions + a]
    }

    #[inline]
    pub fn set(&mut self, s: usize, a: usize, v: f64) {
        self.values[s * self.n_actions + a] = v;
    }

    #[inline]
    pub fn row(&self, s: usize) -> &[f64] {
        &self.values[s * self.n_actions..(s + 1) * self.n_actions]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Sup norm over all entries.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Adds `c` to every entry.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            n_states: self.n_states,
            n_actions: self.n_actions,
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }
}
