use std::fs;
use std::path::Path;

use super::{MdpError, RawMdp, TabularMdp};

/// Schema of the MDP file format (TOML).
///
/// ```toml
/// n_states = 2
/// n_actions = 2
/// # n_states rows of n_actions rewards, each in [0, 1]
/// rewards = [[0.5, 0.0], [1.0, 0.0]]
/// # n_states * n_actions rows of n_states probabilities; row s * n_actions + a
/// transitions = [[1.0, 0.0], [0.9, 0.1], [0.0, 1.0], [1.0, 0.0]]
/// initial_dist = [1.0, 0.0]
/// ```
///
/// Unknown keys are rejected. Rows must sum to one within `1e-12`.
pub const MDP_FILE_SCHEMA: &str = "n_states, n_actions, rewards[S][A], transitions[S*A][S], initial_dist[S]";

pub fn read_mdp_file(path: &Path) -> Result<TabularMdp, MdpError> {
    let text = fs::read_to_string(path).map_err(|e| MdpError::File(format!("{}: {e}", path.display())))?;
    parse_mdp(&text)
}

pub(crate) fn parse_mdp(text: &str) -> Result<TabularMdp, MdpError> {
    let raw: RawMdp = toml::from_str(text).map_err(|e| MdpError::File(e.to_string()))?;
    TabularMdp::validate(raw)
}

pub fn write_mdp_file(mdp: &TabularMdp, path: &Path) -> Result<(), MdpError> {
    let text = render_mdp(mdp)?;
    fs::write(path, text).map_err(|e| MdpError::File(format!("{}: {e}", path.display())))
}

pub(crate) fn render_mdp(mdp: &TabularMdp) -> Result<String, MdpError> {
    toml::to_string(&mdp.to_raw()).map_err(|e| MdpError::File(e.to_string()))
}
