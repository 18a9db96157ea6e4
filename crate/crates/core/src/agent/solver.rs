//! Fixed-point solve of the episode operator.
//!
//! The solver iterates on `W = M Q` (one value per state), where the operator
//! reads `F(W) = M K(Clip_H(W))` and the table is recovered as `Q = K(Clip_H(W))`.
//! `F` is monotone, a `γ`-contraction and satisfies `F(W + c) = F(W) + γc`,
//! which gives, for any `W` with residual `R = F(W) − W`,
//!
//! * `L = F(W) + γ/(1−γ)·min(R)` satisfies `L ≤ F(L)`, and
//! * the fixed point `W*` lies in `[L, L + γ/(1−γ)·span(R)]`.
//!
//! Starting from zero and moving only to such lower points (or to the entrywise
//! maximum of two of them) keeps every iterate below its successor, so the
//! iterates are nondecreasing and the returned table satisfies `Q̂ ≤ T̂(Q̂)`.
//! Newton steps on `W − F(W) = 0` are used only to propose points; their
//! lower points are validated the same way.

use super::operator::EmpiricalOperator;
use crate::mdp::{min_max, QTable};

/// Bookkeeping of one solve.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolveStats {
    /// Number of operator evaluations, including those spent on Newton proposals.
    pub applications: u64,
    pub newton_steps: u64,
    /// Certified bound on `‖Q̂* − Q̂‖∞` (zero when running the exact budget).
    pub certified_gap: f64,
    /// Largest relative decrease observed between consecutive iterates.
    pub monotone_violation: f64,
    pub exited_early: bool,
}

/// Relative tolerance used when comparing consecutive iterates.
pub const MONOTONE_TOL: f64 = 1e-9;

const MAX_NEWTON: usize = 30;
const NEWTON_EVERY: u64 = 8;

/// A point `off·1 + w` with `min(w) = 0`, together with its evaluation.
#[derive(Clone)]
struct Point {
    off: f64,
    w: Vec<f64>,
    v: Vec<f64>,
    q: Vec<f64>,
    f: Vec<f64>,
    /// `F(W) − W`.
    resid: Vec<f64>,
}

impl Point {
    fn zero(n_states: usize, n_actions: usize) -> Self {
        Self {
            off: 0.0,
            w: vec![0.0; n_states],
            v: vec![0.0; n_states],
            q: vec![0.0; n_states * n_actions],
            f: vec![0.0; n_states],
            resid: vec![0.0; n_states],
        }
    }

    fn evaluate(&mut self, op: &EmpiricalOperator) {
        op.eval(&self.w, &mut self.v, &mut self.q, &mut self.f);
        let shift = (1.0 - op.gamma()) * self.off;
        for ((r, f), w) in self.resid.iter_mut().zip(&self.f).zip(&self.w) {
            *r = f - w - shift;
        }
    }

    fn normalize(&mut self) {
        let m = min_max(&self.w).0;
        for x in self.w.iter_mut() {
            *x -= m;
        }
        self.off += m;
    }

    /// Moves to `F(W) + lever·min(R)`.
    fn lower_jump(&mut self, lever: f64) {
        let (lo, _) = min_max(&self.resid);
        for (w, r) in self.w.iter_mut().zip(&self.resid) {
            *w += r;
        }
        self.off += lever * lo;
        self.normalize();
    }

    /// Entrywise maximum with another point (in absolute terms).
    fn max_with(&mut self, other: &Point) {
        let d = other.off - self.off;
        for (w, o) in self.w.iter_mut().zip(&other.w) {
            *w = w.max(o + d);
        }
        self.normalize();
    }

    fn gap(&self, lever: f64) -> f64 {
        let (lo, hi) = min_max(&self.resid);
        lever * (hi - lo)
    }

    fn table(&self, op: &EmpiricalOperator) -> Vec<f64> {
        let shift = op.gamma() * self.off;
        self.q.iter().map(|x| x + shift).collect()
    }
}

struct MonotoneTracker {
    prev: Vec<f64>,
    worst: f64,
}

impl MonotoneTracker {
    fn observe(&mut self, next: Vec<f64>) {
        for (p, n) in self.prev.iter().zip(&next) {
            let drop = (p - n) / p.abs().max(1.0);
            if drop > self.worst {
                self.worst = drop;
            }
        }
        self.prev = next;
    }
}

/// Runs the operator exactly `m` times from the zero table.
pub(crate) fn solve_exact(op: &EmpiricalOperator, m: u64) -> (QTable, SolveStats) {
    let (s_n, a_n) = (op.n_states(), op.n_actions());
    let gamma = op.gamma();
    let mut pt = Point::zero(s_n, a_n);
    let mut mono = MonotoneTracker { prev: vec![0.0; s_n * a_n], worst: 0.0 };
    for j in 0..m.max(1) {
        pt.evaluate(op);
        mono.observe(pt.table(op));
        if j + 1 < m {
            // W_{j+1} = γ·off + f
            pt.off *= gamma;
            pt.w.copy_from_slice(&pt.f);
            pt.normalize();
        }
    }
    let stats = SolveStats {
        applications: m.max(1),
        newton_steps: 0,
        certified_gap: 0.0,
        monotone_violation: mono.worst.max(0.0),
        exited_early: false,
    };
    (QTable::from_flat(s_n, a_n, mono.prev), stats)
}

/// Solves to accuracy `epsilon`, spending at most `m` plain iterations.
pub(crate) fn solve_accelerated(op: &EmpiricalOperator, epsilon: f64, m: u64) -> (QTable, SolveStats) {
    let (s_n, a_n) = (op.n_states(), op.n_actions());
    let gamma = op.gamma();
    let lever = gamma / (1.0 - gamma);
    let mut stats = SolveStats::default();
    let mut mono = MonotoneTracker { prev: vec![0.0; s_n * a_n], worst: 0.0 };

    let mut pt = Point::zero(s_n, a_n);
    pt.evaluate(op);
    stats.applications += 1;
    mono.observe(pt.table(op));

    let mut since_newton = NEWTON_EVERY;
    let mut newton_failures = 0;
    let mut plain = 1u64;
    loop {
        let gap = pt.gap(lever);
        if gap <= epsilon || plain >= m {
            pt.lower_jump(lever);
            pt.evaluate(op);
            stats.applications += 1;
            mono.observe(pt.table(op));
            stats.certified_gap = gamma * gap;
            stats.exited_early = plain < m;
            break;
        }
        pt.lower_jump(lever);

        if since_newton >= NEWTON_EVERY && newton_failures < 3 {
            since_newton = 0;
            pt.evaluate(op);
            stats.applications += 1;
            mono.observe(pt.table(op));
            let before = pt.gap(lever);
            if let Some(mut cand) = newton(op, &pt, epsilon, lever, &mut stats) {
                if cand.gap(lever) < 0.5 * before {
                    cand.lower_jump(lever);
                    pt.max_with(&cand);
                } else {
                    newton_failures += 1;
                }
            } else {
                newton_failures += 1;
            }
        }
        since_newton += 1;

        pt.evaluate(op);
        stats.applications += 1;
        plain += 1;
        mono.observe(pt.table(op));
    }

    stats.monotone_violation = mono.worst.max(0.0);
    (QTable::from_flat(s_n, a_n, mono.prev), stats)
}

/// Newton iterations on `W − F(W) = 0` from `start`; returns the evaluated
/// point with the smallest residual span.
fn newton(op: &EmpiricalOperator, start: &Point, epsilon: f64, lever: f64, stats: &mut SolveStats) -> Option<Point> {
    let mut cur = start.clone();
    let mut best: Option<Point> = None;
    let mut best_gap = start.gap(lever);
    for _ in 0..MAX_NEWTON {
        let jac = op.jacobian(&cur.w, &cur.v, &cur.q);
        let step = EmpiricalOperator::newton_direction(&jac, &cur.resid)?;
        stats.newton_steps += 1;
        let (lo, _) = min_max(&step);
        for (w, d) in cur.w.iter_mut().zip(&step) {
            *w += d - lo;
        }
        cur.off += lo;
        cur.normalize();
        cur.evaluate(op);
        stats.applications += 1;
        let gap = cur.gap(lever);
        if !gap.is_finite() || gap >= best_gap {
            break;
        }
        best_gap = gap;
        best = Some(cur.clone());
        if gap <= 0.25 * epsilon {
            break;
        }
    }
    best
}
