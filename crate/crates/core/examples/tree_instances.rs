//! The tree families: leaves, the target row and oracle values.

use focus_lab::instances::{leaf_search_tree, prior_free_pair, tree_leaves};
use focus_lab::mdp::solve_gain_bias;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("leaves of the S=14, A=3 tree: {:?}", tree_leaves(14, 3)?);
    let tree = leaf_search_tree(14, 3, 12.0, (12, 0))?;
    println!("{}: target row {:?}", tree.label, tree.mdp.row(12, 0));
    let (p1, p2) = prior_free_pair(7, 2, 100.0, (5, 0))?;
    for b in [&p1, &p2] {
        let g = solve_gain_bias(&b.mdp, 1e-6)?;
        println!("{}: gain {:.4}, bias span {:.2}", b.label, g.rho_star, g.span_h);
    }
    Ok(())
}
