use super::lcg::Lcg;
use super::{Instance, InstanceError, Operation, TravelMatrix};

/// Seeds of the five generator streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSet {
    pub machine_alloc: u32,
    pub tool_alloc: u32,
    pub proc_times: u32,
    pub tt_times: u32,
    pub agv_times: u32,
}

impl SeedSet {
    /// Seeds of the published large-instance benchmark.
    pub const BENCHMARK: SeedSet = SeedSet {
        machine_alloc: 398_197_754,
        tool_alloc: 170_719_940,
        proc_times: 840_612_802,
        tt_times: 280_219_920,
        agv_times: 180_119_550,
    };
}

pub const MIN_DURATION: i64 = 1;
pub const MAX_DURATION: i64 = 99;
pub const MIN_TRAVEL: i64 = 2;
pub const MAX_TRAVEL: i64 = 20;

/// The five generator streams. Generating several instances from one
/// `Streams` continues each stream instead of reseeding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Streams {
    pub machine: Lcg,
    pub tool: Lcg,
    pub proc: Lcg,
    pub tt: Lcg,
    pub agv: Lcg,
}

impl Streams {
    pub fn new(seeds: &SeedSet) -> Result<Self, InstanceError> {
        Ok(Self {
            machine: Lcg::new(seeds.machine_alloc)?,
            tool: Lcg::new(seeds.tool_alloc)?,
            proc: Lcg::new(seeds.proc_times)?,
            tt: Lcg::new(seeds.tt_times)?,
            agv: Lcg::new(seeds.agv_times)?,
        })
    }

    /// Draw the next instance. Every job gets `n_machines` operations.
    pub fn generate(
        &mut self,
        name: impl Into<String>,
        n_jobs: usize,
        n_machines: usize,
        n_tools: usize,
    ) -> Result<Instance, InstanceError> {
        if n_jobs == 0 || n_machines == 0 || n_tools == 0 {
            return Err(InstanceError::Argument(format!(
                "counts must be >= 1, got {n_jobs} jobs, {n_machines} machines, {n_tools} tools"
            )));
        }

        let durations: Vec<Vec<u64>> = (0..n_jobs)
            .map(|_| {
                (0..n_machines)
                    .map(|_| self.proc.uniform(MIN_DURATION, MAX_DURATION) as u64)
                    .collect()
            })
            .collect();

        // 1-based swap shuffle: swap M[i][j] with M[i][U[j, m]].
        let m = n_machines as i64;
        let machines: Vec<Vec<usize>> = (0..n_jobs)
            .map(|_| {
                let mut seq: Vec<usize> = (0..n_machines).collect();
                for j in 1..=m {
                    let k = self.machine.uniform(j, m);
                    seq.swap((j - 1) as usize, (k - 1) as usize);
                }
                seq
            })
            .collect();

        let tools: Vec<Vec<usize>> = (0..n_jobs)
            .map(|_| {
                (0..n_machines)
                    .map(|_| (self.tool.uniform(1, n_tools as i64) - 1) as usize)
                    .collect()
            })
            .collect();

        let jobs = (0..n_jobs)
            .map(|i| {
                (0..n_machines)
                    .map(|j| Operation {
                        machine: machines[i][j],
                        tool: Some(tools[i][j]),
                        duration: durations[i][j],
                    })
                    .collect()
            })
            .collect();

        let d_agv = symmetric_matrix(&mut self.agv, n_machines + 1);
        let d_tt = symmetric_matrix(&mut self.tt, n_machines + 1);

        Ok(Instance {
            name: name.into(),
            n_machines,
            n_tools,
            n_agvs: 2,
            n_tool_transporters: 1,
            jobs,
            d_agv,
            d_tt: Some(d_tt),
        })
    }
}

/// Upper triangle drawn row-major from `stream`, mirrored, zero diagonal.
fn symmetric_matrix(stream: &mut Lcg, size: usize) -> TravelMatrix {
    let mut m = TravelMatrix::zeros(size);
    for u in 0..size {
        for v in (u + 1)..size {
            let d = stream.uniform(MIN_TRAVEL, MAX_TRAVEL) as u64;
            m.set(u, v, d);
            m.set(v, u, d);
        }
    }
    m
}

/// Generate one instance from fresh streams.
pub fn generate_instance(
    n_jobs: usize,
    n_machines: usize,
    n_tools: usize,
    seeds: &SeedSet,
) -> Result<Instance, InstanceError> {
    Streams::new(seeds)?.generate(format!("gen_{n_jobs}x{n_machines}x{n_tools}"), n_jobs, n_machines, n_tools)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let a = generate_instance(6, 4, 3, &SeedSet::BENCHMARK).unwrap();
        let b = generate_instance(6, 4, 3, &SeedSet::BENCHMARK).unwrap();
        assert_eq!(a, b);
        a.validate().unwrap();
    }

    #[test]
    fn each_job_is_a_machine_permutation() {
        let inst = generate_instance(20, 15, 15, &SeedSet::BENCHMARK).unwrap();
        for job in &inst.jobs {
            let mut ms: Vec<usize> = job.iter().map(|o| o.machine).collect();
            ms.sort_unstable();
            assert_eq!(ms, (0..15).collect::<Vec<_>>());
        }
    }

    #[test]
    fn matrices_symmetric_zero_diagonal() {
        let inst = generate_instance(3, 5, 2, &SeedSet::BENCHMARK).unwrap();
        for m in [&inst.d_agv, inst.d_tt.as_ref().unwrap()] {
            for u in 0..6 {
                assert_eq!(m.get(u, u), 0);
                for v in 0..6 {
                    assert_eq!(m.get(u, v), m.get(v, u));
                    if u != v {
                        assert!((2..=20).contains(&m.get(u, v)));
                    }
                }
            }
        }
    }

    #[test]
    fn zero_counts_rejected() {
        assert!(generate_instance(0, 3, 3, &SeedSet::BENCHMARK).is_err());
        assert!(generate_instance(3, 3, 0, &SeedSet::BENCHMARK).is_err());
    }

    #[test]
    fn self_swap_stream_keeps_identity() {
        // A stream answering j at every position only performs self-swaps.
        let m = 6usize;
        let mut seq: Vec<usize> = (0..m).collect();
        for j in 1..=m {
            let k = j;
            seq.swap(j - 1, k - 1);
        }
        assert_eq!(seq, (0..m).collect::<Vec<_>>());
    }
}
