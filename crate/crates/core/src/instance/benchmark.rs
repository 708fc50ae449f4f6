use super::generator::{SeedSet, Streams};
use super::{Instance, InstanceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchmarkGroup {
    pub index: usize,
    pub n_jobs: usize,
    pub n_machines: usize,
    pub n_tools: usize,
}

pub const BENCHMARK_GROUPS: [BenchmarkGroup; 8] = [
    BenchmarkGroup { index: 0, n_jobs: 15, n_machines: 15, n_tools: 15 },
    BenchmarkGroup { index: 1, n_jobs: 20, n_machines: 15, n_tools: 15 },
    BenchmarkGroup { index: 2, n_jobs: 20, n_machines: 20, n_tools: 20 },
    BenchmarkGroup { index: 3, n_jobs: 30, n_machines: 15, n_tools: 15 },
    BenchmarkGroup { index: 4, n_jobs: 30, n_machines: 20, n_tools: 20 },
    BenchmarkGroup { index: 5, n_jobs: 50, n_machines: 15, n_tools: 15 },
    BenchmarkGroup { index: 6, n_jobs: 50, n_machines: 20, n_tools: 20 },
    BenchmarkGroup { index: 7, n_jobs: 100, n_machines: 20, n_tools: 20 },
];

pub const INSTANCES_PER_GROUP: usize = 10;
pub const BENCHMARK_AGVS: usize = 10;
pub const BENCHMARK_TOOL_TRANSPORTERS: usize = 5;

/// The ten instances `sl{g}0 ..= sl{g}9`. Streams start from the benchmark
/// seeds for each group and run on across its ten instances.
pub fn benchmark_group(group: usize) -> Result<Vec<Instance>, InstanceError> {
    let g = BENCHMARK_GROUPS
        .get(group)
        .ok_or_else(|| InstanceError::Argument(format!("no benchmark group sl{group}")))?;
    let mut streams = Streams::new(&SeedSet::BENCHMARK)?;
    (0..INSTANCES_PER_GROUP)
        .map(|k| {
            let mut inst = streams.generate(format!("sl{group}{k}"), g.n_jobs, g.n_machines, g.n_tools)?;
            inst.n_agvs = BENCHMARK_AGVS;
            inst.n_tool_transporters = BENCHMARK_TOOL_TRANSPORTERS;
            Ok(inst)
        })
        .collect()
}

pub fn benchmark_instances() -> Result<Vec<Instance>, InstanceError> {
    let mut all = Vec::with_capacity(BENCHMARK_GROUPS.len() * INSTANCES_PER_GROUP);
    for g in 0..BENCHMARK_GROUPS.len() {
        all.extend(benchmark_group(g)?);
    }
    Ok(all)
}

/// Parse a group label such as `sl4` or `4`.
pub fn parse_group(label: &str) -> Result<usize, InstanceError> {
    let digits = label.strip_prefix("sl").unwrap_or(label);
    digits
        .parse::<usize>()
        .ok()
        .filter(|g| *g < BENCHMARK_GROUPS.len())
        .ok_or_else(|| InstanceError::Argument(format!("unknown benchmark group {label:?} (expected sl0..sl7)")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_and_sizes() {
        let g = benchmark_group(3).unwrap();
        assert_eq!(g.len(), 10);
        assert_eq!(g[0].name, "sl30");
        assert_eq!(g[9].name, "sl39");
        assert_eq!(g[4].n_jobs(), 30);
        assert_ne!(g[0].jobs, g[1].jobs);
    }

    #[test]
    fn group_labels() {
        assert_eq!(parse_group("sl4").unwrap(), 4);
        assert_eq!(parse_group("7").unwrap(), 7);
        assert!(parse_group("sl8").is_err());
        assert!(parse_group("x").is_err());
    }
}
