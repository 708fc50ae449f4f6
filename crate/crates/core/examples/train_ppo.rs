//! Train a masked PPO policy on a 5x4 instance, save the checkpoint and
//! compare the greedy policy with FIFO.
//!
//! `cargo run --release --example train_ppo -- 100000` sets the step count.

use std::sync::Arc;

use petri_fms::bench::{run, train_on, SolverSpec};
use petri_fms::env::EnvConfig;
use petri_fms::instance::{generate_instance, SeedSet};
use petri_fms::solvers::ppo::{decile_means, Checkpoint, PpoConfig};
use petri_fms::solvers::{AgvRule, JobRule};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let steps = std::env::args().nth(1).map_or(Ok(30_000), |s| s.parse())?;
    let mut inst = generate_instance(5, 4, 2, &SeedSet::BENCHMARK)?;
    inst.n_agvs = 2;
    let cfg = EnvConfig::default();
    let ppo = PpoConfig {
        total_steps: steps,
        hidden: 64,
        ..PpoConfig::default()
    };
    let (model, log) = train_on(std::slice::from_ref(&inst), &cfg, &ppo)?;
    if let Some((first, last)) = decile_means(&log.episode_rewards) {
        println!("{} episodes, mean reward {first:.3} -> {last:.3}", log.episode_rewards.len());
    }
    let path = std::env::temp_dir().join("ppo_5x4.json");
    Checkpoint::new(model.clone(), ppo, cfg.clone()).save(&path)?;
    println!("checkpoint {}", path.display());

    let policy = SolverSpec::Ppo {
        model: Arc::new(model),
        deterministic: true,
        seed: 0,
    };
    let rl = run(&inst, &policy, &cfg)?;
    let fifo = run(&inst, &SolverSpec::heuristic(JobRule::Fifo, AgvRule::FirstAvailable), &cfg)?;
    println!("greedy policy {} vs FIFO {}", rl.report.makespan, fifo.report.makespan);
    Ok(())
}
