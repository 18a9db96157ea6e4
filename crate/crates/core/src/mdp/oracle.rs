//! Exact solvers on the true model: discounted values, gain and bias.
//!
//! Both solvers run value iteration in a shifted representation `off·1 + w`
//! where `w` is kept with minimum zero. The Bellman operator commutes with
//! constant shifts (`T(off + w) = γ·off + T(w)`), so residuals can be formed
//! without cancelling numbers of size `1/(1−γ)`.

use serde::{Deserialize, Serialize};

use super::ops::{min_max, variance_unchecked};
use super::{MdpError, QTable, TabularMdp, ValueVector};

/// Optimal discounted values of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolvedDiscounted {
    pub gamma: f64,
    pub v_star: ValueVector,
    pub q_star: QTable,
    pub span_v: f64,
    /// Certified sup-norm distance between `v_star` and the true optimum.
    pub tolerance: f64,
    pub iterations: usize,
    /// `v_star − min(v_star)`, computed without loss of precision.
    v_centered: ValueVector,
}

impl SolvedDiscounted {
    /// Optimal values shifted so the minimum is zero.
    pub fn v_centered(&self) -> &ValueVector {
        &self.v_centered
    }
}

/// Gain and bias obtained through a discounted proxy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainBias {
    pub rho_star: f64,
    /// Bias up to an additive constant, pinned so the minimum is zero.
    pub h_shifted: ValueVector,
    pub span_h: f64,
    pub gamma_proxy: f64,
    /// Bound on `|ρ* − (1−γ)V*_γ(s)|` for every state.
    pub error_bound: f64,
}

/// Structural statistics of a model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MdpMetadata {
    /// Largest transition support size over all (state, action) pairs.
    pub gamma_support: usize,
    pub is_deterministic: bool,
    /// `max_{s,a} Var(P_{s,a}, V*_γ)`.
    pub max_step_variance: f64,
}

fn check_gamma(gamma: f64) -> Result<(), MdpError> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(MdpError::BadGamma(gamma));
    }
    Ok(())
}

/// One Bellman optimality backup of a centered vector: `y(s) = max_a r + γ P w`.
fn backup(mdp: &TabularMdp, gamma: f64, w: &[f64], y: &mut [f64]) {
    let n_actions = mdp.n_actions();
    for (s, ys) in y.iter_mut().enumerate() {
        let mut best = f64::NEG_INFINITY;
        for a in 0..n_actions {
            let pv: f64 = mdp.row(s, a).iter().zip(w).map(|(p, x)| p * x).sum();
            let q = mdp.reward(s, a) + gamma * pv;
            if q > best {
                best = q;
            }
        }
        *ys = best;
    }
}

/// Computes `V*_γ` to sup-norm accuracy `tol`.
///
/// Iterates the Bellman operator with a scalar midpoint correction after
/// each backup (the span of the residual contracts by at least `γ` per step).
/// Terminates once `γ/(1−γ)·‖T(V) − V‖∞ ≤ tol` for the current iterate `V`
/// and returns `T(V)`.
pub fn solve_discounted(mdp: &TabularMdp, gamma: f64, tol: f64) -> Result<SolvedDiscounted, MdpError> {
    check_gamma(gamma)?;
    if !(tol > 0.0) {
        return Err(MdpError::BadTolerance(tol));
    }
    let n = mdp.n_states();
    let one_minus = 1.0 - gamma;
    let lever = gamma / one_minus;

    let mut off = 0.0;
    let mut w = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut delta = vec![0.0; n];
    let mut cap: Option<usize> = None;
    let mut iterations = 0usize;

    loop {
        backup(mdp, gamma, &w, &mut y);
        iterations += 1;
        let shift = one_minus * off;
        for s in 0..n {
            delta[s] = y[s] - w[s] - shift;
        }
        let (lo, hi) = min_max(&delta);
        let resid = lo.abs().max(hi.abs());
        if lever * resid <= tol {
            break;
        }
        let cap = *cap.get_or_insert_with(|| {
            // span(Δ) shrinks by γ per step, and ‖Δ‖ after a correction is at most γ·span/2
            let need = ((hi - lo).max(tol) * lever / tol).ln() / -gamma.ln();
            (need.ceil() as usize).saturating_mul(2).saturating_add(1000).min(500_000_000)
        });
        if iterations > cap {
            return Err(MdpError::NotConverged { iterations, residual: lever * resid });
        }
        let mid = 0.5 * (lo + hi);
        let mut m = f64::INFINITY;
        for s in 0..n {
            w[s] += delta[s];
            m = m.min(w[s]);
        }
        for x in w.iter_mut() {
            *x -= m;
        }
        off += lever * mid + m;
    }

    // returned value is T(off + w) = γ·off + y
    let base = gamma * off;
    let (y_min, y_max) = min_max(&y);
    let centered: Vec<f64> = y.iter().map(|x| x - y_min).collect();
    let v_star: Vec<f64> = y.iter().map(|x| base + x).collect();
    let v_min = base + y_min;
    let n_actions = mdp.n_actions();
    let mut q = QTable::zeros(n, n_actions);
    for s in 0..n {
        for a in 0..n_actions {
            let pv: f64 = mdp.row(s, a).iter().zip(&centered).map(|(p, x)| p * x).sum();
            q.set(s, a, mdp.reward(s, a) + gamma * (v_min + pv));
        }
    }

    Ok(SolvedDiscounted {
        gamma,
        v_star: ValueVector(v_star),
        q_star: q,
        span_v: y_max - y_min,
        tolerance: tol,
        iterations,
        v_centered: ValueVector(centered),
    })
}

/// Largest effective horizon `1/(1−γ)` tried by [`solve_gain_bias`].
const MAX_PROXY_HORIZON: f64 = (1u64 << 40) as f64;

/// Gain and bias span of a weakly communicating model.
///
/// Doubles the effective horizon `1/(1−γ₀)` until `(1−γ₀)·span(V*_{γ₀}) ≤ tol`;
/// the gain then satisfies `|ρ* − (1−γ₀)V*_{γ₀}(s)| ≤ error_bound` for every `s`.
pub fn solve_gain_bias(mdp: &TabularMdp, tol: f64) -> Result<GainBias, MdpError> {
    if !(tol > 0.0) {
        return Err(MdpError::BadTolerance(tol));
    }
    let mut horizon = 2.0;
    loop {
        let gamma = 1.0 - 1.0 / horizon;
        let solved = solve_discounted(mdp, gamma, tol / 4.0)?;
        let one_minus = 1.0 - gamma;
        let error_bound = one_minus * solved.span_v;
        if error_bound <= tol {
            let n = mdp.n_states() as f64;
            let mean = solved.v_star.iter().sum::<f64>() / n;
            return Ok(GainBias {
                rho_star: one_minus * mean,
                h_shifted: solved.v_centered.clone(),
                span_h: solved.span_v,
                gamma_proxy: gamma,
                error_bound,
            });
        }
        horizon *= 2.0;
        if horizon > MAX_PROXY_HORIZON {
            return Err(MdpError::NotConverged { iterations: solved.iterations, residual: error_bound });
        }
    }
}

/// Support size, determinism and worst one-step variance of `V*_γ`.
pub fn metadata(mdp: &TabularMdp, solved: &SolvedDiscounted) -> MdpMetadata {
    let mut gamma_support = 0;
    let mut max_step_variance: f64 = 0.0;
    for s in 0..mdp.n_states() {
        for a in 0..mdp.n_actions() {
            let row = mdp.row(s, a);
            gamma_support = gamma_support.max(row.iter().filter(|&&p| p > 0.0).count());
            max_step_variance = max_step_variance.max(variance_unchecked(row, solved.v_centered()));
        }
    }
    MdpMetadata { gamma_support, is_deterministic: gamma_support == 1, max_step_variance }
}
