//! Symbiotic organisms search with a fixed evaluation budget, compared
//! with the FIFO baseline.

use petri_fms::bench::{gap, run, SolverSpec};
use petri_fms::env::EnvConfig;
use petri_fms::instance::{generate_instance, SeedSet};
use petri_fms::solvers::{AgvRule, JobRule, SosConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut inst = generate_instance(8, 5, 3, &SeedSet::BENCHMARK)?;
    inst.n_agvs = 2;
    let cfg = EnvConfig::default();
    let fifo = run(&inst, &SolverSpec::heuristic(JobRule::Fifo, AgvRule::FirstAvailable), &cfg)?;
    let sos = SosConfig {
        pop_size: 20,
        time_budget_s: None,
        max_evaluations: Some(5_000),
        rng_seed: 1,
    };
    let best = run(&inst, &SolverSpec::Sos(sos), &cfg)?;
    println!("FIFO makespan {}", fifo.report.makespan);
    println!(
        "SOS  makespan {} in {:.2}s ({:.1}% below FIFO)",
        best.report.makespan,
        best.report.wall_secs,
        100.0 * gap(fifo.report.makespan, best.report.makespan)
    );
    Ok(())
}
