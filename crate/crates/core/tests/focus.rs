use focus_lab::agent::*;
use focus_lab::harness::RunRecord;
use focus_lab::instances::random_communicating;
use focus_lab::mdp::{span, QTable};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn agent(s: usize, a: usize, gamma: f64, h: f64, horizon: u64) -> FocusAgent {
    let reward: Vec<f64> = (0..s * a).map(|i| (i % 3) as f64 / 2.0).collect();
    FocusAgent::new(FocusConfig::new(horizon, gamma, 0.1, h), s, a, reward).unwrap()
}

#[test]
fn init_examples() {
    let ag = agent(2, 2, 0.5, 1.0, 100);
    assert!(ag.q_hat().as_slice().iter().all(|&q| q == 2.0));
    assert!((ag.u() - 72000f64.ln()).abs() < 1e-12);
    assert!((ag.u() - 11.184).abs() < 1e-3);
    assert!(ag.counts_sa().iter().all(|&n| n == 0));
    assert_eq!(ag.episode(), 1);
}

#[test]
fn act_examples() {
    let ag = agent(2, 2, 0.5, 1.0, 100);
    assert_eq!(ag.act(0), 0);
    let q = QTable::from_flat(1, 2, vec![0.1, 0.8]);
    assert_eq!(focus_lab::mdp::greedy(&q).1, vec![1]);
    assert_eq!(focus_lab::mdp::greedy(&q.shifted(-5.0)).1, vec![1]);
}

#[test]
fn observe_examples() {
    let mut ag = agent(2, 1, 0.9, 2.0, 1000);
    assert!(ag.observe(0, 0, 0, 1));
    assert_eq!(ag.episode(), 2);
    assert!((ag.epsilon() - 10.0).abs() < 1e-12);
    assert!(ag.observe(0, 0, 1, 2));
    assert!(!ag.observe(0, 0, 1, 3));
    assert!(ag.observe(0, 0, 0, 4));
    assert!((ag.epsilon() - 10.0 / 4.0).abs() < 1e-12);
    // unvisited state 1 keeps a uniform row
    assert_eq!(&ag.p_hat()[2..4], &[0.5, 0.5]);
}

#[test]
fn bonus_examples() {
    assert_eq!(bonus(0, &[0.5, 0.5], &[3.0, 3.0], 2.0, 1.5, BonusKind::Bernstein), 32.0 * 2.0 * 1.5);
    // Var = 1 from a two-point row at distance 2
    let b = bonus(8, &[0.5, 0.5], &[0.0, 2.0], 1.0, 2.0, BonusKind::Bernstein);
    assert!((b - 8.0).abs() < 1e-12);
    let b = bonus(4, &[1.0], &[0.0], 2.0, 1.0, BonusKind::Hoeffding);
    assert!((b - 4.0).abs() < 1e-12);
}

#[test]
fn iteration_budget_examples() {
    assert_eq!(iteration_budget(0.5, 1.0, 1.0, 1.0).unwrap(), 9);
    assert!(matches!(iteration_budget(0.5, 0.0, 1.0, 1.0), Err(AgentError::NonpositiveArgument { .. })));
    for gamma in [0.9, 0.99, 0.999] {
        let m = iteration_budget(gamma, 1e-3, 5.0, 7.0).unwrap() as f64;
        let step = (2.0 / (1.0 - gamma)).ceil();
        let shrunk = iteration_budget(gamma, 1e-3 / std::f64::consts::E.powi(2), 5.0, 7.0).unwrap() as f64;
        assert!((shrunk - m - step).abs() <= 1.0, "gamma {gamma}");
        let g2 = 1.0 - (1.0 - gamma) / 2.0;
        let doubled = iteration_budget(g2, 1e-3, 5.0, 7.0).unwrap() as f64;
        let ratio = doubled / m;
        assert!(ratio > 1.8 && ratio < 2.3, "gamma {gamma}: {ratio}");
    }
}

#[test]
fn single_state_fixed_point() {
    let gamma = 0.9;
    let h = 1e3;
    let mut ag = FocusAgent::new(FocusConfig::new(1000, gamma, 0.1, h), 1, 1, vec![1.0]).unwrap();
    for t in 1..=16 {
        ag.observe(0, 0, 0, t);
    }
    let n = ag.counts_sa()[0];
    let b = bonus(n, &[1.0], &[0.0], h, ag.u(), BonusKind::Bernstein);
    let exact = (1.0 + gamma * b) / (1.0 - gamma);
    assert!((ag.q_hat().get(0, 0) - exact).abs() <= ag.epsilon() + 1e-9);
}

#[test]
fn exact_and_accelerated_solves_agree() {
    let bundle = random_communicating(5, 3, 3, 4).unwrap();
    let mut fast = FocusConfig::new(4000, 0.99, 0.1, 5.0);
    let mut slow = fast;
    slow.exact_m = true;
    fast.exact_m = false;
    let mut a = FocusAgent::for_mdp(fast, &bundle.mdp).unwrap();
    let mut b = FocusAgent::for_mdp(slow, &bundle.mdp).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for t in 1..=600 {
        let s = rng.gen_range(0..5);
        let act = rng.gen_range(0..3);
        let next = rng.gen_range(0..5);
        a.observe(s, act, next, t);
        b.observe(s, act, next, t);
        let eps = a.epsilon();
        if eps.is_finite() {
            let gap = a
                .q_hat()
                .as_slice()
                .iter()
                .zip(b.q_hat().as_slice())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            assert!(gap <= 2.0 * eps + 1e-9, "t={t}: {gap} vs {eps}");
        }
    }
}

#[test]
fn one_step_mode_applies_operator_once() {
    let mut cfg = FocusConfig::new(100, 0.9, 0.1, 3.0);
    cfg.solve_mode = SolveMode::OneStep;
    let mut ag = FocusAgent::new(cfg, 2, 1, vec![0.2, 0.7]).unwrap();
    ag.observe(0, 0, 1, 1);
    let prev = ag.q_hat().clone();
    ag.observe(1, 0, 0, 2);
    let expected = ag.operator().unwrap().apply(&prev);
    assert_eq!(ag.q_hat(), &expected);
}

/// Random agent trajectory: (S, A, gamma, H, bonus kind, transitions).
fn trajectory() -> impl Strategy<Value = (usize, usize, f64, f64, bool, Vec<(usize, usize, usize)>)> {
    (1usize..=5, 1usize..=3, prop::sample::select(vec![0.5, 0.9, 0.99]), 1.0f64..20.0, any::<bool>()).prop_flat_map(
        |(s, a, g, h, hoeff)| {
            let steps = prop::collection::vec((0..s, 0..a, 0..s), 1..200);
            (Just(s), Just(a), Just(g), Just(h), Just(hoeff), steps)
        },
    )
}

fn build(s: usize, a: usize, gamma: f64, h: f64, hoeffding: bool, horizon: u64) -> FocusAgent {
    let mut cfg = FocusConfig::new(horizon, gamma, 0.1, h.min(1.0 / (1.0 - gamma)).max(1.0));
    if hoeffding {
        cfg.bonus = BonusKind::Hoeffding;
    }
    let reward: Vec<f64> = (0..s * a).map(|i| ((i * 7) % 5) as f64 / 4.0).collect();
    FocusAgent::new(cfg, s, a, reward).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn state_invariants_hold_after_every_observe((s, a, g, h, hoeff, steps) in trajectory()) {
        let mut ag = build(s, a, g, h, hoeff, steps.len() as u64);
        for (i, &(st, act, next)) in steps.iter().enumerate() {
            let t = i as u64 + 1;
            ag.observe(st, act, next, t);
            prop_assert_eq!(ag.counts_sa().iter().sum::<u64>(), t);
            for (sa, row) in ag.counts_sas().chunks(s).enumerate() {
                prop_assert_eq!(row.iter().sum::<u64>(), ag.counts_sa()[sa]);
            }
            for row in ag.p_hat().chunks(s) {
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            }
            let bound = ag.q_bound();
            prop_assert!(ag.q_hat().as_slice().iter().all(|&q| (0.0..=bound).contains(&q)));
            prop_assert!(span(ag.v_hat()).unwrap() <= ag.config().h + 1e-9);
        }
        let horizon = steps.len() as u64;
        prop_assert!(ag.episode() <= RunRecord::episode_bound(s, a, horizon));
    }

    #[test]
    fn solved_table_is_a_sub_solution((s, a, g, h, hoeff, steps) in trajectory()) {
        let mut ag = build(s, a, g, h, hoeff, steps.len() as u64);
        for (i, &(st, act, next)) in steps.iter().enumerate() {
            if ag.observe(st, act, next, i as u64 + 1) {
                let op = ag.operator().unwrap();
                let tq = op.apply(ag.q_hat());
                let scale = ag.q_bound();
                for (x, y) in ag.q_hat().as_slice().iter().zip(tq.as_slice()) {
                    prop_assert!(*x <= y + MONOTONE_TOL * scale);
                }
                let last = ag.reports().last().unwrap();
                prop_assert!(last.within_norm_bound);
                prop_assert!(last.monotone_violation <= MONOTONE_TOL);
            }
        }
    }

    #[test]
    fn operator_lemma_properties(
        (s, a, g, h, hoeff, steps) in trajectory(),
        seed in any::<u64>(),
    ) {
        let mut ag = build(s, a, g, h, hoeff, steps.len() as u64);
        for (i, &(st, act, next)) in steps.iter().enumerate() {
            ag.observe(st, act, next, i as u64 + 1);
        }
        let op = ag.operator().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (1.0 - g);
        let q = QTable::from_flat(s, a, (0..s * a).map(|_| scale * rng.gen::<f64>()).collect());
        let q2 = QTable::from_flat(s, a, (0..s * a).map(|_| scale * rng.gen::<f64>()).collect());
        let c = rng.gen_range(-scale..scale);
        let tq = op.apply(&q);
        let tq2 = op.apply(&q2);
        for (x, y) in op.apply(&q.shifted(c)).as_slice().iter().zip(tq.as_slice()) {
            prop_assert!((x - y - g * c).abs() <= 1e-9);
        }
        let num = tq.as_slice().iter().zip(tq2.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let den = q.as_slice().iter().zip(q2.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(num - focus_lab::cli::verify::rounding_allowance(&tq, &tq2) <= (g + 1e-12) * den);
        let low = QTable::from_flat(s, a, q.as_slice().iter().map(|x| x - scale * rng.gen::<f64>()).collect());
        for (x, y) in op.apply(&low).as_slice().iter().zip(tq.as_slice()) {
            prop_assert!(*x <= y + 1e-9);
        }
    }
}
