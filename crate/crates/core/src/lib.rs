//! Tabular optimistic learner for infinite-horizon MDPs with exact oracles,
//! hard instance generators and a multi-seed regret harness.

pub mod agent;
pub mod mdp;
pub mod instances;
pub mod harness;
pub mod cli;
