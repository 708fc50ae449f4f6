//! Relocation with and without lookahead on ten small instances.

use petri_fms::bench::{lookahead_ablation, SolverSpec};
use petri_fms::env::EnvConfig;
use petri_fms::instance::{SeedSet, Streams};
use petri_fms::solvers::{AgvRule, JobRule};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut streams = Streams::new(&SeedSet::BENCHMARK)?;
    let instances = (0..10)
        .map(|i| streams.generate(format!("small{i}"), 5 + i % 4, 4, 2))
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = EnvConfig {
        n_agvs: Some(2),
        ..EnvConfig::default()
    };
    let spec = SolverSpec::heuristic(JobRule::Fifo, AgvRule::FirstAvailable);
    let table = lookahead_ablation(&instances, &spec, &cfg)?;
    for row in &table.rows {
        println!("{:<8} {:>6} {:>6}", row.instance, row.with, row.without);
    }
    println!(
        "mean     {:>6.1} {:>6.1}  (lookahead, max fallback)",
        table.mean_with(),
        table.mean_without()
    );
    Ok(())
}
