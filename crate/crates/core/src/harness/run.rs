use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{HarnessError, Oracles, RunConfig};
use crate::agent::{EpisodeReport, FocusAgent};
use crate::instances::InstanceBundle;
use crate::mdp::{variance_unchecked, QTable};

/// Cumulative quantities at one logged time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub t: u64,
    pub cum_avg_regret: f64,
    pub cum_gamma_regret: f64,
    pub cum_var_star: f64,
}

/// Optimistic table at the start of episode `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct QSnapshot {
    pub k: u64,
    pub t: u64,
    /// Accuracy target of the episode (zero for the initial table).
    pub epsilon: f64,
    pub q: QTable,
}

/// Outcome of one simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub instance_label: String,
    pub variant_label: String,
    pub n_states: usize,
    pub n_actions: usize,
    pub seed: u64,
    pub horizon: u64,
    pub gamma: f64,
    pub h: f64,
    pub delta: f64,
    /// `Σ (ρ* − r_t)`.
    pub avg_regret: f64,
    /// `Σ ((1−γ)V*_γ(s_t) − r_t)`.
    pub gamma_regret: f64,
    /// `Σ Var(P_{s_t,a_t}, V*_γ)` on the true kernel.
    pub var_star: f64,
    /// `Σ (ρ* − (1−γ)V*_γ(s_t))`, accumulated separately.
    pub offset_sum: f64,
    pub episodes: u64,
    pub checkpoints: Vec<Checkpoint>,
    pub episode_log: Vec<EpisodeReport>,
    pub snapshots: Option<Vec<QSnapshot>>,
    pub wall_time_s: f64,
}

impl RunRecord {
    /// Whether `avg_regret − gamma_regret` matches the separately accumulated offsets to `1e-9·T`.
    pub fn identity_holds(&self) -> bool {
        let lhs = self.avg_regret - self.gamma_regret;
        (lhs - self.offset_sum).abs() <= 1e-9 * self.horizon.max(1) as f64
    }

    /// Whether the episode count respects [`RunRecord::episode_bound`].
    pub fn episodes_within_bound(&self) -> bool {
        self.episodes <= Self::episode_bound(self.n_states, self.n_actions, self.horizon)
    }

    /// `S·A·(⌊log₂T⌋ + 1) + 1`.
    pub fn episode_bound(n_states: usize, n_actions: usize, horizon: u64) -> u64 {
        let log2 = 63 - horizon.max(1).leading_zeros() as u64;
        (n_states * n_actions) as u64 * (log2 + 1) + 1
    }
}

/// Powers of two up to `T`, followed by `T`.
pub fn checkpoint_times(horizon: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut t = 1u64;
    while t < horizon {
        out.push(t);
        t *= 2;
    }
    out.push(horizon);
    out
}

fn sample(row: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in row.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Simulates `T` steps of the learner on the bundle's model.
pub fn run(bundle: &InstanceBundle, config: &RunConfig, oracles: &Oracles) -> Result<RunRecord, HarnessError> {
    let started = Instant::now();
    let gamma = config.gamma()?;
    if oracles.discounted.gamma != gamma {
        return Err(HarnessError::OracleMismatch { expected: gamma, found: oracles.discounted.gamma });
    }
    let focus = config.focus_config(bundle, &oracles.gain)?;
    let mdp = &bundle.mdp;
    let mut agent = FocusAgent::for_mdp(focus, mdp)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(config.stream);

    let rho = oracles.gain.rho_star;
    let v_star = &oracles.discounted.v_star;
    let v_centered = oracles.discounted.v_centered();
    let one_minus = 1.0 - gamma;

    let mut snapshots = config.snapshots.then(|| {
        vec![QSnapshot { k: 1, t: 0, epsilon: 0.0, q: agent.q_hat().clone() }]
    });
    let times = checkpoint_times(config.horizon);
    let mut next_checkpoint = 0;
    let mut checkpoints = Vec::with_capacity(times.len());

    let (mut avg, mut disc, mut var, mut offset) = (0.0, 0.0, 0.0, 0.0);
    let mut s = sample(mdp.initial_dist(), rng.gen());
    for t in 1..=config.horizon {
        let a = agent.act(s);
        let r = mdp.reward(s, a);
        let row = mdp.row(s, a);
        let scaled = one_minus * v_star[s];
        avg += rho - r;
        disc += scaled - r;
        offset += rho - scaled;
        var += variance_unchecked(row, v_centered);
        let next = sample(row, rng.gen());
        if agent.observe(s, a, next, t) {
            if let Some(snaps) = snapshots.as_mut() {
                snaps.push(QSnapshot { k: agent.episode(), t, epsilon: agent.epsilon(), q: agent.q_hat().clone() });
            }
        }
        if times[next_checkpoint] == t {
            checkpoints.push(Checkpoint { t, cum_avg_regret: avg, cum_gamma_regret: disc, cum_var_star: var });
            next_checkpoint += 1;
        }
        s = next;
    }

    Ok(RunRecord {
        instance_label: bundle.label.clone(),
        variant_label: config.variant.label.clone(),
        n_states: mdp.n_states(),
        n_actions: mdp.n_actions(),
        seed: config.seed,
        horizon: config.horizon,
        gamma,
        h: focus.h,
        delta: config.delta,
        avg_regret: avg,
        gamma_regret: disc,
        var_star: var,
        offset_sum: offset,
        episodes: agent.episode(),
        checkpoints,
        episode_log: agent.reports().to_vec(),
        snapshots,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}
