//! Solve a benchmark instance with tool transport and print its Gantt CSV.

use petri_fms::bench::{export_gantt, run, SolverSpec};
use petri_fms::env::EnvConfig;
use petri_fms::instance::benchmark_group;
use petri_fms::solvers::{AgvRule, JobRule};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = &benchmark_group(0)?[0];
    let cfg = EnvConfig {
        tools: true,
        lookahead: true,
        ..EnvConfig::default()
    };
    let out = run(inst, &SolverSpec::heuristic(JobRule::Mtwr, AgvRule::LeastWork), &cfg)?;
    print!("{}", export_gantt(&out.trace));
    eprintln!("{} makespan {}", inst.name, out.report.makespan);
    Ok(())
}
