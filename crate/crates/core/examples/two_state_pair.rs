//! The learner on both members of the two-state pair.

use focus_lab::harness::{run, AgentVariant, GammaPolicy, HPolicy, OracleTolerances, Oracles, RunConfig};
use focus_lab::instances::{InstanceSpec, Member};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let horizon = 20_000;
    let variant = AgentVariant::new("focus", HPolicy::Prior, GammaPolicy::AvgMode);
    for member in [Member::P1, Member::P2] {
        let spec = InstanceSpec::TwoStatePair { b: 10.0, member };
        let bundle = spec.build()?;
        let config = RunConfig::new(spec, variant.clone(), horizon, 0, 0.1);
        let oracles = Oracles::compute(&bundle.mdp, config.gamma()?, OracleTolerances::default())?;
        let r = run(&bundle, &config, &oracles)?;
        println!(
            "{}: H = {:.2}, regret {:.1}, discounted regret {:.1}, {} episodes",
            r.instance_label, r.h, r.avg_regret, r.gamma_regret, r.episodes
        );
    }
    Ok(())
}
