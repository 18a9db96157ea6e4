//! Per-episode tables checked against Q* − ε_k.

use focus_lab::harness::{optimism_audit, run, AgentVariant, GammaPolicy, HPolicy, OracleTolerances, Oracles, RunConfig};
use focus_lab::instances::{InstanceSpec, Member};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = InstanceSpec::TwoStatePair { b: 5.0, member: Member::P1 };
    let bundle = spec.build()?;
    for h in [10.0, 1.0] {
        let variant = AgentVariant::new("focus", HPolicy::Explicit { value: h }, GammaPolicy::Explicit { value: 0.99 });
        let mut config = RunConfig::new(spec.clone(), variant, 5000, 0, 0.1);
        config.snapshots = true;
        let oracles = Oracles::compute(&bundle.mdp, 0.99, OracleTolerances::default())?;
        let audit = optimism_audit(&run(&bundle, &config, &oracles)?, &oracles)?;
        println!(
            "H = {h}: {} episodes, {} violations, worst margin {:.4}",
            audit.episodes_checked,
            audit.violations(),
            audit.worst_margin
        );
    }
    Ok(())
}
