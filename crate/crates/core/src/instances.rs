//! Generators for the hard-instance families and simple test beds.
//!
//! States and actions are 0-based. Tree families number the tree states
//! breadth-first with the root at state 0; children of node `i` are
//! `A·i + 1 ..= A·i + A`, and the extra "good" state is `S − 1`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mdp::{MdpError, RawMdp, TabularMdp};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("B must exceed {min}, got {value}")]
    BOutOfRange { value: f64, min: f64 },
    #[error("bad tree parameters: {0}")]
    BadTreeParams(String),
    #[error("state {0} is not a leaf of the tree")]
    TargetNotLeaf(usize),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Mdp(#[from] MdpError),
}

/// Which member of a two-model family to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Member {
    /// The member whose good state keeps the learner (gain 1).
    #[default]
    P1,
    /// The member whose good state sends the learner back (gain 1/2).
    P2,
}

/// Declarative description of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSpec {
    TwoStatePair {
        b: f64,
        #[serde(default)]
        member: Member,
    },
    LeafSearchTree {
        s: usize,
        a: usize,
        d: f64,
        /// Target leaf state; defaults to the last leaf.
        #[serde(default)]
        target_leaf: Option<usize>,
        #[serde(default)]
        target_action: usize,
    },
    PriorFreePair {
        s: usize,
        a: usize,
        b: f64,
        #[serde(default)]
        member: Member,
        #[serde(default)]
        target_leaf: Option<usize>,
        #[serde(default)]
        target_action: usize,
    },
    DeterministicCycle {
        rewards: Vec<f64>,
    },
    RandomCommunicating {
        s: usize,
        a: usize,
        gamma_support: usize,
        seed: u64,
    },
    /// A model read from an MDP file.
    File {
        path: String,
    },
}

/// A generated model with the analytic facts known about it.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceBundle {
    pub mdp: TabularMdp,
    pub known_gain: Option<f64>,
    pub known_span_h: Option<f64>,
    pub known_diameter_bound: Option<f64>,
    pub label: String,
}

impl InstanceSpec {
    pub fn build(&self) -> Result<InstanceBundle, InstanceError> {
        match *self {
            InstanceSpec::TwoStatePair { b, member } => {
                let (p1, p2) = two_state_pair(b)?;
                Ok(pick(member, p1, p2))
            }
            InstanceSpec::LeafSearchTree { s, a, d, target_leaf, target_action } => {
                let leaf = match target_leaf {
                    Some(l) => l,
                    None => last_leaf(s, a)?,
                };
                leaf_search_tree(s, a, d, (leaf, target_action))
            }
            InstanceSpec::PriorFreePair { s, a, b, member, target_leaf, target_action } => {
                let leaf = match target_leaf {
                    Some(l) => l,
                    None => last_leaf(s, a)?,
                };
                let (p1, p2) = prior_free_pair(s, a, b, (leaf, target_action))?;
                Ok(pick(member, p1, p2))
            }
            InstanceSpec::DeterministicCycle { ref rewards } => deterministic_cycle(rewards),
            InstanceSpec::RandomCommunicating { s, a, gamma_support, seed } => {
                random_communicating(s, a, gamma_support, seed)
            }
            InstanceSpec::File { ref path } => {
                let mdp = crate::mdp::read_mdp_file(std::path::Path::new(path))?;
                Ok(InstanceBundle {
                    mdp,
                    known_gain: None,
                    known_span_h: None,
                    known_diameter_bound: None,
                    label: format!("file({path})"),
                })
            }
        }
    }
}

fn pick(member: Member, p1: InstanceBundle, p2: InstanceBundle) -> InstanceBundle {
    match member {
        Member::P1 => p1,
        Member::P2 => p2,
    }
}

struct Builder {
    n_states: usize,
    n_actions: usize,
    rewards: Vec<Vec<f64>>,
    transitions: Vec<Vec<f64>>,
}

impl Builder {
    fn new(n_states: usize, n_actions: usize) -> Self {
        Self {
            n_states,
            n_actions,
            rewards: vec![vec![0.0; n_actions]; n_states],
            transitions: vec![vec![0.0; n_states]; n_states * n_actions],
        }
    }

    fn arc(&mut self, s: usize, a: usize, reward: f64, to: usize) {
        self.rewards[s][a] = reward;
        let row = &mut self.transitions[s * self.n_actions + a];
        row.fill(0.0);
        row[to] = 1.0;
    }

    fn split(&mut self, s: usize, a: usize, reward: f64, to: usize, p: f64, rest: usize) {
        self.rewards[s][a] = reward;
        let row = &mut self.transitions[s * self.n_actions + a];
        row.fill(0.0);
        row[to] = p;
        row[rest] = 1.0 - p;
    }

    fn finish(self, initial: usize) -> Result<TabularMdp, MdpError> {
        let mut initial_dist = vec![0.0; self.n_states];
        initial_dist[initial] = 1.0;
        TabularMdp::validate(RawMdp {
            n_states: self.n_states,
            n_actions: self.n_actions,
            rewards: self.rewards,
            transitions: self.transitions,
            initial_dist,
        })
    }
}

/// The pair `(P1, P2)` of two-state models. State 0 is the start; action 0
/// is "stay" and action 1 is "leave".
pub fn two_state_pair(b: f64) -> Result<(InstanceBundle, InstanceBundle), InstanceError> {
    if !(b > 2.0) || !b.is_finite() {
        return Err(InstanceError::BOutOfRange { value: b, min: 2.0 });
    }
    let build = |keep: bool| -> Result<TabularMdp, MdpError> {
        let mut m = Builder::new(2, 2);
        m.arc(0, 0, 0.5, 0);
        m.split(0, 1, 0.0, 1, 1.0 / b, 0);
        m.arc(1, 0, 1.0, if keep { 1 } else { 0 });
        m.arc(1, 1, 0.0, 0);
        m.finish(0)
    };
    let p1 = InstanceBundle {
        mdp: build(true)?,
        known_gain: Some(1.0),
        known_span_h: Some(b),
        known_diameter_bound: None,
        label: format!("two_state_pair(B={b},P1)"),
    };
    let p2 = InstanceBundle {
        mdp: build(false)?,
        known_gain: Some(0.5),
        known_span_h: Some(0.5),
        known_diameter_bound: None,
        label: format!("two_state_pair(B={b},P2)"),
    };
    Ok((p1, p2))
}

/// Smallest `k` with `A^k ≥ S`.
pub fn ceil_log(s: usize, a: usize) -> u32 {
    let mut k = 0;
    let mut p: u128 = 1;
    while p < s as u128 {
        p *= a as u128;
        k += 1;
    }
    k
}

/// Tree over states `0..n` (breadth-first, root 0).
struct Tree {
    n: usize,
    a: usize,
}

impl Tree {
    fn child(&self, i: usize, j: usize) -> Option<usize> {
        let c = self.a * i + 1 + j;
        (c < self.n).then_some(c)
    }

    fn is_leaf(&self, i: usize) -> bool {
        i < self.n && self.child(i, 0).is_none()
    }
}

fn check_tree(s: usize, a: usize) -> Result<Tree, InstanceError> {
    if s < 2 || a < 2 {
        return Err(InstanceError::BadTreeParams(format!("need S ≥ 2 and A ≥ 2, got S={s}, A={a}")));
    }
    Ok(Tree { n: s - 1, a })
}

fn check_target(tree: &Tree, target: (usize, usize)) -> Result<(), InstanceError> {
    if !tree.is_leaf(target.0) {
        return Err(InstanceError::TargetNotLeaf(target.0));
    }
    if target.1 + 1 >= tree.a {
        return Err(InstanceError::BadTreeParams(format!(
            "target action must be below the return action {}, got {}",
            tree.a - 1,
            target.1
        )));
    }
    Ok(())
}

/// Highest-numbered leaf of the tree with `S − 1` nodes.
pub fn last_leaf(s: usize, a: usize) -> Result<usize, InstanceError> {
    let tree = check_tree(s, a)?;
    Ok(tree.n - 1)
}

/// Leaves of the tree used by both tree families.
pub fn tree_leaves(s: usize, a: usize) -> Result<Vec<usize>, InstanceError> {
    let tree = check_tree(s, a)?;
    Ok((0..tree.n).filter(|&i| tree.is_leaf(i)).collect())
}

/// Lays out the tree arcs. Internal nodes move to children (self-loops when
/// a child is missing); leaves self-loop on actions `0..A−1` and return to
/// the root on action `A − 1`.
fn lay_tree(m: &mut Builder, tree: &Tree, internal_reward: f64, leaf_return_reward: f64) {
    for i in 0..tree.n {
        if tree.is_leaf(i) {
            for j in 0..tree.a - 1 {
                m.arc(i, j, 0.0, i);
            }
            m.arc(i, tree.a - 1, leaf_return_reward, 0);
        } else {
            for j in 0..tree.a {
                m.arc(i, j, internal_reward, tree.child(i, j).unwrap_or(i));
            }
        }
    }
}

/// Tree with a single rewarding state reachable from one leaf-action pair.
pub fn leaf_search_tree(s: usize, a: usize, d: f64, target: (usize, usize)) -> Result<InstanceBundle, InstanceError> {
    let tree = check_tree(s, a)?;
    let need = 4.0 * ceil_log(s, a) as f64;
    if !(d >= need) || !d.is_finite() {
        return Err(InstanceError::BadTreeParams(format!("need D ≥ 4⌈log_A S⌉ = {need}, got {d}")));
    }
    check_target(&tree, target)?;
    let good = s - 1;
    let mut m = Builder::new(s, a);
    lay_tree(&mut m, &tree, 0.0, 0.0);
    m.split(target.0, target.1, 0.0, good, 2.0 / d, target.0);
    for j in 0..a - 1 {
        m.arc(good, j, 1.0, good);
    }
    m.arc(good, a - 1, 0.0, 0);
    Ok(InstanceBundle {
        mdp: m.finish(0)?,
        known_gain: Some(1.0),
        known_span_h: None,
        known_diameter_bound: Some(d),
        label: format!("leaf_search_tree(S={s},A={a},D={d},target=({},{}))", target.0, target.1),
    })
}

/// Lower threshold on `B` enforced by [`prior_free_pair`].
pub const PRIOR_FREE_MIN_B: f64 = 50.0;

/// Tree pair whose members differ only in action 0 of the good state.
pub fn prior_free_pair(
    s: usize,
    a: usize,
    b: f64,
    target: (usize, usize),
) -> Result<(InstanceBundle, InstanceBundle), InstanceError> {
    let tree = check_tree(s, a)?;
    let need = PRIOR_FREE_MIN_B.max(2.0 * ceil_log(s, a) as f64);
    if !(b >= need) || !b.is_finite() {
        return Err(InstanceError::BadTreeParams(format!("need B ≥ max(50, 2⌈log_A S⌉) = {need}, got {b}")));
    }
    check_target(&tree, target)?;
    let good = s - 1;
    let build = |keep: bool| -> Result<TabularMdp, MdpError> {
        let mut m = Builder::new(s, a);
        lay_tree(&mut m, &tree, 0.5, 0.5);
        m.split(target.0, target.1, 0.0, good, 2.0 / b, target.0);
        m.arc(good, 0, 1.0, if keep { good } else { 0 });
        for j in 1..a {
            m.arc(good, j, 0.0, 0);
        }
        m.finish(0)
    };
    let tag = format!("S={s},A={a},B={b},target=({},{})", target.0, target.1);
    let p1 = InstanceBundle {
        mdp: build(true)?,
        known_gain: Some(1.0),
        known_span_h: None,
        known_diameter_bound: None,
        label: format!("prior_free_pair({tag},P1)"),
    };
    let p2 = InstanceBundle {
        mdp: build(false)?,
        known_gain: Some(0.5),
        known_span_h: Some(0.5),
        known_diameter_bound: None,
        label: format!("prior_free_pair({tag},P2)"),
    };
    Ok((p1, p2))
}

/// Deterministic cycle `0 → 1 → … → S−1 → 0` on action 0 with the given
/// rewards; action 1 self-loops with reward 0.
pub fn deterministic_cycle(rewards: &[f64]) -> Result<InstanceBundle, InstanceError> {
    let s = rewards.len();
    if s == 0 {
        return Err(InstanceError::BadParams("deterministic_cycle needs at least one reward".into()));
    }
    let mut m = Builder::new(s, 2);
    for (i, &r) in rewards.iter().enumerate() {
        m.arc(i, 0, r, (i + 1) % s);
        m.arc(i, 1, 0.0, i);
    }
    let gain = rewards.iter().sum::<f64>() / s as f64;
    // bias along the cycle: h(i+1) − h(i) = ρ − r(i)
    let mut acc = 0.0;
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    for &r in &rewards[..s - 1] {
        acc += gain - r;
        lo = lo.min(acc);
        hi = hi.max(acc);
    }
    let label = format!("deterministic_cycle(S={s})");
    Ok(InstanceBundle {
        mdp: m.finish(0)?,
        known_gain: Some(gain),
        known_span_h: Some(hi - lo),
        known_diameter_bound: Some(s.saturating_sub(1) as f64),
        label,
    })
}

/// Seeded random communicating model. A random Hamiltonian cycle is placed in
/// the support of every action-0 row; each row has exactly `gamma_support`
/// successors with positive weights.
pub fn random_communicating(
    s: usize,
    a: usize,
    gamma_support: usize,
    seed: u64,
) -> Result<InstanceBundle, InstanceError> {
    if a == 0 || gamma_support < 2 || gamma_support > s {
        return Err(InstanceError::BadParams(format!(
            "need A ≥ 1 and 2 ≤ Γ ≤ S, got S={s}, A={a}, Γ={gamma_support}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..s).collect();
    order.shuffle(&mut rng);
    let mut next = vec![0; s];
    for k in 0..s {
        next[order[k]] = order[(k + 1) % s];
    }
    let states: Vec<usize> = (0..s).collect();
    let mut rewards = vec![vec![0.0; a]; s];
    let mut transitions = vec![vec![0.0; s]; s * a];
    for i in 0..s {
        for j in 0..a {
            rewards[i][j] = rng.gen::<f64>();
            let mut support: Vec<usize> = if j == 0 {
                let others: Vec<usize> = states.iter().copied().filter(|&x| x != next[i]).collect();
                let mut chosen: Vec<usize> = others.choose_multiple(&mut rng, gamma_support - 1).copied().collect();
                chosen.push(next[i]);
                chosen
            } else {
                states.choose_multiple(&mut rng, gamma_support).copied().collect()
            };
            support.sort_unstable();
            let weights: Vec<f64> = support.iter().map(|_| 0.1 + rng.gen::<f64>()).collect();
            let total: f64 = weights.iter().sum();
            let row = &mut transitions[i * a + j];
            let mut acc = 0.0;
            for (k, (&st, w)) in support.iter().zip(&weights).enumerate() {
                if k + 1 == support.len() {
                    row[st] = 1.0 - acc;
                } else {
                    row[st] = w / total;
                    acc += row[st];
                }
            }
        }
    }
    let mut initial_dist = vec![0.0; s];
    initial_dist[0] = 1.0;
    let mdp = TabularMdp::validate(RawMdp { n_states: s, n_actions: a, rewards, transitions, initial_dist })?;
    Ok(InstanceBundle {
        mdp,
        known_gain: None,
        known_span_h: None,
        known_diameter_bound: None,
        label: format!("random_communicating(S={s},A={a},G={gamma_support},seed={seed})"),
    })
}
