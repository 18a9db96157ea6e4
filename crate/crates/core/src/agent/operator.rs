//! Clipped optimistic empirical Bellman operator of one episode.

use nalgebra::{DMatrix, DVector};

use super::{AgentError, BonusConstants, BonusKind, FocusConfig};
use crate::mdp::{argmax, min_max, variance_unchecked, QTable};

/// Exploration bonus for a pair visited `n` times, with empirical row `p_hat`
/// and next-state values `v` (already clipped when clipping is on).
pub fn bonus(n: u64, p_hat: &[f64], v: &[f64], h: f64, u: f64, kind: BonusKind) -> f64 {
    bonus_with(&BonusConstants::default(), n, p_hat, v, h, u, kind)
}

pub(crate) fn bonus_with(
    c: &BonusConstants,
    n: u64,
    p_hat: &[f64],
    v: &[f64],
    h: f64,
    u: f64,
    kind: BonusKind,
) -> f64 {
    let n = n.max(1) as f64;
    match kind {
        BonusKind::Bernstein => {
            let var = variance_unchecked(p_hat, v);
            (c.variance * (var * u / n).sqrt()).max(c.linear * h * u / n)
        }
        BonusKind::Hoeffding => c.variance * h * (u / n).sqrt(),
    }
}

/// `⌈(1/(1−γ))·ln((1 + 32HU)/(ε(1−γ)))⌉`, at least one.
pub fn iteration_budget(gamma: f64, epsilon: f64, h: f64, u: f64) -> Result<u64, AgentError> {
    iteration_budget_with(BonusConstants::default().linear, gamma, epsilon, h, u)
}

pub(crate) fn iteration_budget_with(c_lin: f64, gamma: f64, epsilon: f64, h: f64, u: f64) -> Result<u64, AgentError> {
    for (name, x) in [("gamma", gamma), ("epsilon", epsilon), ("H", h), ("U", u)] {
        if !(x > 0.0) || !x.is_finite() {
            return Err(AgentError::NonpositiveArgument { name, value: x });
        }
    }
    if gamma >= 1.0 {
        return Err(AgentError::NonpositiveArgument { name: "1 - gamma", value: 1.0 - gamma });
    }
    let m = ((1.0 + c_lin * h * u) / (epsilon * (1.0 - gamma))).ln() / (1.0 - gamma);
    Ok((m.ceil().max(1.0)) as u64)
}

/// The operator `Q ↦ r + γ P̂ Clip_H(MQ) + γ b(Clip_H(MQ))` frozen at the
/// counts of one episode.
#[derive(Debug, Clone)]
pub struct EmpiricalOperator {
    n_states: usize,
    n_actions: usize,
    gamma: f64,
    h: f64,
    bonus_h: f64,
    u: f64,
    clip: bool,
    kind: BonusKind,
    constants: BonusConstants,
    reward: Vec<f64>,
    p_hat: Vec<f64>,
    counts: Vec<u64>,
}

impl EmpiricalOperator {
    pub(crate) fn new(
        config: &FocusConfig,
        u: f64,
        reward: Vec<f64>,
        p_hat: Vec<f64>,
        counts: Vec<u64>,
        n_states: usize,
        n_actions: usize,
    ) -> Self {
        Self {
            n_states,
            n_actions,
            gamma: config.gamma,
            h: config.h,
            bonus_h: config.bonus_h(),
            u,
            clip: config.clip,
            kind: config.bonus,
            constants: config.constants,
            reward,
            p_hat,
            counts,
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    #[inline]
    fn p_row(&self, s: usize, a: usize) -> &[f64] {
        let i = (s * self.n_actions + a) * self.n_states;
        &self.p_hat[i..i + self.n_states]
    }

    /// Clipped, centered next-state values for a vector `w` with `min(w) = 0`.
    fn clipped(&self, w: &[f64], out: &mut [f64]) {
        for (o, &x) in out.iter_mut().zip(w) {
            *o = if self.clip { x.min(self.h) } else { x };
        }
    }

    /// Evaluates `q = K(Clip(w))` and `f = M q` for a vector with `min(w) = 0`.
    ///
    /// The general case follows from the constant shift identity
    /// `K(Clip(w + c)) = K(Clip(w)) + γc`.
    pub(crate) fn eval(&self, w: &[f64], v: &mut [f64], q: &mut [f64], f: &mut [f64]) {
        self.clipped(w, v);
        let (s_n, a_n) = (self.n_states, self.n_actions);
        for s in 0..s_n {
            let mut best = f64::NEG_INFINITY;
            for a in 0..a_n {
                let i = s * a_n + a;
                let p = self.p_row(s, a);
                let pv: f64 = p.iter().zip(v.iter()).map(|(x, y)| x * y).sum();
                let b = bonus_with(&self.constants, self.counts[i], p, v, self.bonus_h, self.u, self.kind);
                let val = self.reward[i] + self.gamma * (pv + b);
                q[i] = val;
                if val > best {
                    best = val;
                }
            }
            f[s] = best;
        }
    }

    /// One application of the operator to an arbitrary table.
    pub fn apply(&self, q_in: &QTable) -> QTable {
        assert_eq!(q_in.n_states(), self.n_states);
        assert_eq!(q_in.n_actions(), self.n_actions);
        let mq: Vec<f64> = (0..self.n_states).map(|s| q_in.row(s)[argmax(q_in.row(s))]).collect();
        let lo = min_max(&mq).0;
        let w: Vec<f64> = mq.iter().map(|x| x - lo).collect();
        let mut v = vec![0.0; self.n_states];
        let mut q = vec![0.0; self.n_states * self.n_actions];
        let mut f = vec![0.0; self.n_states];
        self.eval(&w, &mut v, &mut q, &mut f);
        let shift = self.gamma * lo;
        QTable::from_flat(self.n_states, self.n_actions, q.into_iter().map(|x| x + shift).collect())
    }

    /// Jacobian of `w ↦ M K(Clip(w))` at a vector with `min(w) = 0`, using
    /// the greedy action, clipping pattern and bonus branch active at `w`.
    pub(crate) fn jacobian(&self, w: &[f64], v: &[f64], q: &[f64]) -> DMatrix<f64> {
        let (s_n, a_n) = (self.n_states, self.n_actions);
        let argmin = argmin(w);
        let mut jac = DMatrix::<f64>::zeros(s_n, s_n);
        let mut coef = vec![0.0; s_n];
        for s in 0..s_n {
            let a = argmax(&q[s * a_n..(s + 1) * a_n]);
            let i = s * a_n + a;
            let p = self.p_row(s, a);
            coef.copy_from_slice(p);
            if self.kind == BonusKind::Bernstein {
                let n = self.counts[i].max(1) as f64;
                let var = variance_unchecked(p, v);
                let sqrt_branch = self.constants.variance * (var * self.u / n).sqrt();
                let lin_branch = self.constants.linear * self.bonus_h * self.u / n;
                if var > 0.0 && sqrt_branch > lin_branch {
                    let mean: f64 = p.iter().zip(v).map(|(x, y)| x * y).sum();
                    let scale = self.constants.variance * (self.u / n).sqrt() / var.sqrt();
                    for (c, (&pi, &vi)) in coef.iter_mut().zip(p.iter().zip(v)) {
                        *c += scale * pi * (vi - mean);
                    }
                }
            }
            for (j, &c) in coef.iter().enumerate() {
                let col = if self.clip && w[j] > self.h { argmin } else { j };
                jac[(s, col)] += self.gamma * c;
            }
        }
        jac
    }

    /// Solves `(I − J) δ = rhs`.
    pub(crate) fn newton_direction(jac: &DMatrix<f64>, rhs: &[f64]) -> Option<Vec<f64>> {
        let n = rhs.len();
        let lhs = DMatrix::<f64>::identity(n, n) - jac;
        let sol = lhs.lu().solve(&DVector::from_column_slice(rhs))?;
        sol.iter().all(|x| x.is_finite()).then(|| sol.iter().copied().collect())
    }
}

fn argmin(w: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in w.iter().enumerate().skip(1) {
        if x < w[best] {
            best = i;
        }
    }
    best
}
