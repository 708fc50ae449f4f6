//! Jobs arrive in batches: an instance split into partitions is solved by
//! SOS with a per-partition time budget and by a pre-trained policy.
//!
//! Arguments: partitions (default 5) and SOS seconds per partition (default 2).

use std::sync::Arc;

use petri_fms::bench::{dynamic_scenario, train_on, SolverSpec};
use petri_fms::env::EnvConfig;
use petri_fms::instance::{generate_instance, partition_instance, SeedSet};
use petri_fms::solvers::ppo::PpoConfig;
use petri_fms::solvers::SosConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let parts: usize = args.next().map_or(Ok(5), |s| s.parse())?;
    let secs: f64 = args.next().map_or(Ok(2.0), |s| s.parse())?;
    let mut inst = generate_instance(20, 6, 2, &SeedSet::BENCHMARK)?;
    inst.n_agvs = 3;
    let batches = partition_instance(&inst, parts)?;

    let plain = EnvConfig::default();
    let shell = EnvConfig {
        shell: Some((batches.iter().map(|b| b.n_jobs()).max().unwrap_or(1), inst.n_machines)),
        ..plain.clone()
    };
    let ppo = PpoConfig {
        total_steps: 20_000,
        hidden: 64,
        ..PpoConfig::default()
    };
    let (model, _) = train_on(&batches, &shell, &ppo)?;
    let rl = SolverSpec::Ppo {
        model: Arc::new(model),
        deterministic: true,
        seed: 0,
    };
    let sos = SolverSpec::Sos(SosConfig {
        time_budget_s: Some(secs),
        max_evaluations: None,
        ..SosConfig::default()
    });
    let report = dynamic_scenario(&batches, &[(sos, plain), (rl, shell)])?;
    for s in &report.series {
        println!("{}", s.solver);
        for c in &s.checkpoints {
            println!(
                "  {:<10} makespan {:>5} compute {:>8.3}s cumulative {:>8.3}s",
                c.partition, c.makespan, c.compute_secs, c.cumulative_compute_secs
            );
        }
    }
    match report.crossover(1, 0) {
        Some(i) => println!("policy stays cheaper from partition {}", i + 1),
        None => println!("no crossover"),
    }
    Ok(())
}
