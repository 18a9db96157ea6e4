//! Writes an instance to an MDP file and reads it back.

use focus_lab::instances::leaf_search_tree;
use focus_lab::mdp::{read_mdp_file, write_mdp_file};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bundle = leaf_search_tree(14, 3, 12.0, (12, 0))?;
    let dir = std::env::temp_dir().join("focus-lab-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("tree.toml");
    write_mdp_file(&bundle.mdp, &path)?;
    let back = read_mdp_file(&path)?;
    println!("wrote {} to {}", bundle.label, path.display());
    println!("round trip identical: {}", back == bundle.mdp);
    Ok(())
}
