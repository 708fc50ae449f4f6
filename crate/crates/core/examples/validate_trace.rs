//! Validate a schedule, then break it in three ways and show what the
//! validator reports.

use petri_fms::bench::{run, validate, SolverSpec};
use petri_fms::env::EnvConfig;
use petri_fms::fms::{Leg, ScheduleTrace};
use petri_fms::instance::{generate_instance, SeedSet};

fn report(label: &str, trace: &ScheduleTrace, inst: &petri_fms::instance::Instance) {
    match validate(trace, inst, true) {
        Ok(m) => println!("{label}: ok, makespan {m}"),
        Err(v) => {
            println!("{label}: {} violations", v.len());
            for x in v.iter().take(3) {
                println!("  {x}");
            }
        }
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = generate_instance(6, 4, 3, &SeedSet::BENCHMARK)?;
    let cfg = EnvConfig {
        tools: true,
        n_agvs: Some(2),
        n_tool_transporters: Some(1),
        ..EnvConfig::default()
    };
    let trace = run(&inst, &SolverSpec::Random { seed: 4 }, &cfg)?.trace;
    report("original", &trace, &inst);

    let mut recs = trace.records().to_vec();
    let a = recs.iter().position(|r| r.leg == Leg::Process).unwrap_or(0);
    if let Some(b) = recs
        .iter()
        .position(|r| r.leg == Leg::Process && r.id == recs[a].id && r.start > recs[a].start)
    {
        let d = recs[b].duration();
        recs[b].start = recs[a].start;
        recs[b].end = recs[b].start + d;
    }
    report("overlap", &ScheduleTrace::from_records(recs), &inst);

    let mut recs = trace.records().to_vec();
    if let Some(r) = recs.iter_mut().find(|r| r.leg == Leg::Loaded && r.duration() > 0) {
        r.end += 2;
    }
    report("slow leg", &ScheduleTrace::from_records(recs), &inst);

    let recs: Vec<_> = trace.records().iter().filter(|r| r.leg != Leg::ToolMove).copied().collect();
    report("no tools", &ScheduleTrace::from_records(recs), &inst);
    Ok(())
}
