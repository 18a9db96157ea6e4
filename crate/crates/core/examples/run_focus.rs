//! Drives the agent by hand on a random model and prints each episode.

use focus_lab::agent::{FocusAgent, FocusConfig};
use focus_lab::instances::random_communicating;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bundle = random_communicating(4, 2, 2, 7)?;
    let mdp = &bundle.mdp;
    let horizon = 2000;
    let mut agent = FocusAgent::for_mdp(FocusConfig::new(horizon, 0.99, 0.1, 5.0), mdp)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut s = 0;
    let mut reward = 0.0;
    for t in 1..=horizon {
        let a = agent.act(s);
        reward += mdp.reward(s, a);
        let u: f64 = rng.gen();
        let row = mdp.row(s, a);
        let mut acc = 0.0;
        let next = row.iter().position(|p| {
            acc += p;
            u < acc
        });
        let next = next.unwrap_or(row.len() - 1);
        agent.observe(s, a, next, t);
        s = next;
    }
    for e in agent.reports() {
        println!(
            "episode {:>3} at t = {:>4}: eps {:.3e}, budget {:>7}, applications {:>3}, gap {:.2e}",
            e.k, e.t, e.epsilon, e.budget, e.applications, e.certified_gap
        );
    }
    println!("average reward {:.4}", reward / horizon as f64);
    Ok(())
}
