//! Every job rule crossed with both AGV rules on one 15x15 benchmark
//! instance with tool transport.

use petri_fms::bench::{run, SolverSpec};
use petri_fms::env::EnvConfig;
use petri_fms::instance::benchmark_group;
use petri_fms::solvers::{AgvRule, JobRule};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = &benchmark_group(0)?[0];
    let cfg = EnvConfig {
        tools: true,
        ..EnvConfig::default()
    };
    println!("{:<8} {:>10} {:>10}", "rule", "first", "least-work");
    for job in JobRule::ALL {
        let mut row = Vec::new();
        for agv in AgvRule::ALL {
            let out = run(inst, &SolverSpec::heuristic(job, agv), &cfg)?;
            assert!(out.violations.is_empty());
            row.push(out.report.makespan);
        }
        println!("{:<8} {:>10} {:>10}", job.as_str(), row[0], row[1]);
    }
    Ok(())
}
