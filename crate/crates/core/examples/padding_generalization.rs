//! One policy, several instance sizes: every instance is padded into the
//! same 8x6 shell so observation and action sizes match.

use std::sync::Arc;

use petri_fms::bench::{evaluate, run, train_on, SolverSpec};
use petri_fms::env::{Env, EnvConfig};
use petri_fms::instance::{SeedSet, Streams};
use petri_fms::solvers::ppo::PpoConfig;
use petri_fms::solvers::{AgvRule, JobRule};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut streams = Streams::new(&SeedSet::BENCHMARK)?;
    let sizes = [(3, 3), (5, 4), (6, 6), (8, 5)];
    let instances = sizes
        .iter()
        .map(|&(j, m)| streams.generate(format!("g{j}x{m}"), j, m, 2))
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = EnvConfig {
        n_agvs: Some(2),
        shell: Some((8, 6)),
        ..EnvConfig::default()
    };
    for inst in &instances {
        let env = Env::new(inst, cfg.clone())?;
        println!("{:<6} actions {} observation {}", inst.name, env.n_actions(), env.observation().len());
    }
    let ppo = PpoConfig {
        total_steps: 20_000,
        hidden: 64,
        ..PpoConfig::default()
    };
    let (model, _) = train_on(&instances, &cfg, &ppo)?;
    let rl = evaluate(&Arc::new(model), &instances, &cfg)?;
    for (inst, m) in instances.iter().zip(rl) {
        let fifo = run(inst, &SolverSpec::heuristic(JobRule::Fifo, AgvRule::FirstAvailable), &cfg)?;
        println!("{:<6} policy {m:>5} FIFO {:>5}", inst.name, fifo.report.makespan);
    }
    Ok(())
}
