//! Property and inequality suites shared by the `verify` subcommand and the
//! acceptance tests.

use std::fmt;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agent::{BonusKind, EmpiricalOperator, FocusConfig, MONOTONE_TOL};
use crate::harness::{
    check_reduction, check_var_bound, optimism_audit, smallest_var_constant, HarnessError, Oracles, RunRecord,
};
use crate::instances::{prior_free_pair, two_state_pair};
use crate::mdp::{argmax, solve_gain_bias, QTable};

/// One named check with its verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckLine {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

/// A group of checks.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: String,
    pub checks: Vec<CheckLine>,
    pub elapsed_s: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite {} ({:.2}s)", self.name, self.elapsed_s)?;
        for c in &self.checks {
            writeln!(f, "  {c}")?;
        }
        Ok(())
    }
}

/// Worst-case deviations found by [`operator_property_suite`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OperatorProperties {
    pub cases: usize,
    /// Largest `|T(Q + c) − T(Q) − γc|`.
    pub shift_error: f64,
    /// Largest `‖TQ − TQ′‖∞ / ‖Q − Q′‖∞ − γ`, after [`rounding_allowance`].
    pub contraction_excess: f64,
    /// Largest `T(Q′) − T(Q)` with `Q′ ≤ Q` entrywise.
    pub monotone_excess: f64,
}

fn random_table(rng: &mut ChaCha8Rng, s: usize, a: usize, scale: f64) -> QTable {
    QTable::from_flat(s, a, (0..s * a).map(|_| scale * rng.gen::<f64>()).collect())
}

fn random_operator(rng: &mut ChaCha8Rng, gamma: f64) -> EmpiricalOperator {
    let s = rng.gen_range(1..=6);
    let a = rng.gen_range(1..=4);
    let horizon = rng.gen_range(10..=100_000);
    let mut config = FocusConfig::new(horizon, gamma, 0.1, rng.gen_range(1.0..=1.0 / (1.0 - gamma)));
    if rng.gen_bool(0.2) {
        config.bonus = BonusKind::Hoeffding;
    }
    let reward: Vec<f64> = (0..s * a).map(|_| rng.gen()).collect();
    let states: Vec<usize> = (0..s).collect();
    let mut counts = vec![0u64; s * a * s];
    for row in counts.chunks_mut(s) {
        if rng.gen_bool(0.2) {
            continue;
        }
        let support = rng.gen_range(1..=s);
        let n = rng.gen_range(1..=64);
        let chosen: Vec<usize> = states.choose_multiple(rng, support).copied().collect();
        for _ in 0..n {
            row[*chosen.choose(rng).expect("support is nonempty")] += 1;
        }
    }
    EmpiricalOperator::from_counts(&config, s, a, &reward, &counts).expect("generated operator is valid")
}

/// Absolute error of a difference of two operator outputs evaluated in
/// floating point: a few ulps of the largest entry. The bonus can make the
/// outputs large, and without this allowance a rounding error divided by a
/// small `‖Q − Q′‖∞` would be reported as a contraction excess.
pub fn rounding_allowance(a: &QTable, b: &QTable) -> f64 {
    let scale = a.as_slice().iter().chain(b.as_slice()).map(|x| x.abs()).fold(0.0, f64::max);
    8.0 * f64::EPSILON * scale
}

/// Measures the shift, contraction and monotonicity properties on random
/// operators and tables.
pub fn operator_properties(cases: usize, seed: u64) -> OperatorProperties {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = OperatorProperties { cases, ..Default::default() };
    out.contraction_excess = f64::NEG_INFINITY;
    out.monotone_excess = f64::NEG_INFINITY;
    for _ in 0..cases {
        let gamma = *[0.5, 0.9, 0.99].choose(&mut rng).expect("nonempty");
        let op = random_operator(&mut rng, gamma);
        let (s, a) = (op.n_states(), op.n_actions());
        let scale = 1.0 / (1.0 - gamma);
        let q = random_table(&mut rng, s, a, scale);
        let q2 = random_table(&mut rng, s, a, scale);
        let c = rng.gen_range(-scale..=scale);

        let tq = op.apply(&q);
        let shifted = op.apply(&q.shifted(c));
        for (x, y) in shifted.as_slice().iter().zip(tq.as_slice()) {
            out.shift_error = out.shift_error.max((x - y - gamma * c).abs());
        }

        let tq2 = op.apply(&q2);
        let num = tq.as_slice().iter().zip(tq2.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let den = q.as_slice().iter().zip(q2.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        if den > 0.0 {
            let slack = rounding_allowance(&tq, &tq2);
            out.contraction_excess = out.contraction_excess.max((num - slack).max(0.0) / den - gamma);
        }

        // Q_low ≤ Q entrywise, hence M Q_low ≤ M Q
        let low = QTable::from_flat(
            s,
            a,
            q.as_slice().iter().map(|x| x - scale * rng.gen::<f64>()).collect(),
        );
        debug_assert!((0..s).all(|st| low.row(st)[argmax(low.row(st))] <= q.row(st)[argmax(q.row(st))]));
        let tlow = op.apply(&low);
        for (x, y) in tlow.as_slice().iter().zip(tq.as_slice()) {
            out.monotone_excess = out.monotone_excess.max(x - y);
        }
    }
    out
}

/// Operator property suite: constant shift to `1e-9`, contraction ratio at
/// most `γ + 1e-12`, monotonicity to `1e-9`.
pub fn operator_property_suite(cases: usize, seed: u64) -> SuiteReport {
    let started = Instant::now();
    let p = operator_properties(cases, seed);
    let checks = vec![
        CheckLine::new("constant shift", p.shift_error <= 1e-9, format!("max error {:.3e} over {cases} cases", p.shift_error)),
        CheckLine::new(
            "contraction",
            p.contraction_excess <= 1e-12,
            format!("max ratio minus gamma {:.3e}", p.contraction_excess),
        ),
        CheckLine::new(
            "monotonicity",
            p.monotone_excess <= 1e-9,
            format!("max T(Q') - T(Q) with Q' <= Q: {:.3e}", p.monotone_excess),
        ),
    ];
    SuiteReport { name: "operator properties".into(), checks, elapsed_s: started.elapsed().as_secs_f64() }
}

/// Gain and bias span of the two-state pair and the prior-free pair against
/// their analytic values.
pub fn oracle_cross_check(tol: f64) -> Result<SuiteReport, HarnessError> {
    let started = Instant::now();
    let gain_tol = 1e-5;
    let (p1, p2) = two_state_pair(10.0)?;
    let mut checks = Vec::new();
    for (bundle, rho, span) in [(&p1, 1.0, 10.0), (&p2, 0.5, 0.5)] {
        let g = solve_gain_bias(&bundle.mdp, gain_tol)?;
        let ok = (g.rho_star - rho).abs() <= tol && (g.span_h - span).abs() <= tol;
        checks.push(CheckLine::new(
            format!("gain/bias of {}", bundle.label),
            ok,
            format!("rho* = {:.6}, span h* = {:.6} (expected {rho}, {span})", g.rho_star, g.span_h),
        ));
    }
    let (_, q2) = prior_free_pair(7, 2, 100.0, (5, 0))?;
    let g = solve_gain_bias(&q2.mdp, gain_tol)?;
    checks.push(CheckLine::new(
        format!("gain of {}", q2.label),
        (g.rho_star - 0.5).abs() <= tol,
        format!("rho* = {:.6} (expected 0.5)", g.rho_star),
    ));
    Ok(SuiteReport { name: "oracle cross-check".into(), checks, elapsed_s: started.elapsed().as_secs_f64() })
}

/// Per-run invariants: solver monotonicity and norm bound, the reduction
/// inequality, the variance bound with constant `c`, and the episode bound.
pub fn run_invariant_checks(runs: &[(&RunRecord, &Oracles)], c: f64) -> Vec<CheckLine> {
    let n = runs.len();
    let mut solves = 0usize;
    let mut bad_solves = 0usize;
    let mut worst_mono: f64 = 0.0;
    let mut reduction_fail = 0usize;
    let mut var_fail = 0usize;
    let mut worst_c: f64 = 0.0;
    let mut episode_fail = 0usize;
    let mut max_episode_ratio: f64 = 0.0;
    for (r, o) in runs {
        for e in &r.episode_log {
            solves += 1;
            worst_mono = worst_mono.max(e.monotone_violation);
            if e.monotone_violation > MONOTONE_TOL || !e.within_norm_bound {
                bad_solves += 1;
            }
        }
        if !check_reduction(r, o).passed() {
            reduction_fail += 1;
        }
        let span = o.discounted.span_v;
        if !check_var_bound(r, span, c).passed() {
            var_fail += 1;
        }
        worst_c = worst_c.max(smallest_var_constant(r, span));
        if !r.episodes_within_bound() {
            episode_fail += 1;
        }
        let bound = RunRecord::episode_bound(r.n_states, r.n_actions, r.horizon) as f64;
        max_episode_ratio = max_episode_ratio.max(r.episodes as f64 / bound);
    }
    vec![
        CheckLine::new(
            "monotone iterates and norm bound",
            bad_solves == 0,
            format!("{bad_solves} of {solves} solves violate; worst relative decrease {worst_mono:.2e}"),
        ),
        CheckLine::new("reduction inequality", reduction_fail == 0, format!("{reduction_fail} of {n} runs fail")),
        CheckLine::new(
            format!("variance bound (c = {c})"),
            var_fail == 0,
            format!("{var_fail} of {n} runs fail; smallest passing c = {worst_c:.4e}"),
        ),
        CheckLine::new(
            "episode count bound",
            episode_fail == 0,
            format!("{episode_fail} of {n} runs exceed; largest episodes/bound = {max_episode_ratio:.3}"),
        ),
    ]
}

/// Number of runs with at least one optimism violation, with the number of audited runs.
pub fn optimism_violating_runs(runs: &[(&RunRecord, &Oracles)]) -> Result<(usize, usize), HarnessError> {
    let mut bad = 0;
    for (r, o) in runs {
        if optimism_audit(r, o)?.violations() > 0 {
            bad += 1;
        }
    }
    Ok((bad, runs.len()))
}
