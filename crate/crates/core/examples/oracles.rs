//! Discounted and average-reward oracles on the two-state pair.

use focus_lab::instances::two_state_pair;
use focus_lab::mdp::{metadata, solve_discounted, solve_gain_bias};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (p1, p2) = two_state_pair(10.0)?;
    for bundle in [&p1, &p2] {
        let gain = solve_gain_bias(&bundle.mdp, 1e-6)?;
        let disc = solve_discounted(&bundle.mdp, 0.99, 1e-8)?;
        let md = metadata(&bundle.mdp, &disc);
        println!("{}", bundle.label);
        println!("  gain {:.6}, bias span {:.6} (error bound {:.1e})", gain.rho_star, gain.span_h, gain.error_bound);
        println!("  V*_0.99 = {:?}, span {:.4}", disc.v_star.iter().collect::<Vec<_>>(), disc.span_v);
        println!("  support size {}, deterministic {}", md.gamma_support, md.is_deterministic);
    }
    Ok(())
}
