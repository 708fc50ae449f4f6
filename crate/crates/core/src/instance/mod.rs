//! Problem instances: jobs of machine/tool/duration operations plus AGV
//! and tool-transporter travel matrices.

mod benchmark;
mod format;
mod generator;
pub mod lcg;
mod pad;

use thiserror::Error;

pub use benchmark::{
    benchmark_group, benchmark_instances, parse_group, BenchmarkGroup, BENCHMARK_AGVS, BENCHMARK_GROUPS,
    BENCHMARK_TOOL_TRANSPORTERS, INSTANCES_PER_GROUP,
};
pub use format::{parse_instance, write_instance};
pub use generator::{generate_instance, SeedSet, Streams};
pub use lcg::{lcg_next, lcg_uniform_int, Lcg};
pub use pad::{pad_instance, partition_instance};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid instance: {0}")]
    Invalid(String),
}

/// Matrix location of the Load/Unload station (AGV) or Tool Magazine (TT).
pub const STATION: usize = 0;

/// Matrix location of machine `m`.
#[inline]
pub fn machine_location(machine: usize) -> usize {
    machine + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Operation {
    pub machine: usize,
    pub tool: Option<usize>,
    pub duration: u64,
}

/// Square travel-time matrix indexed by location (0 = station, m+1 = machine m).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TravelMatrix {
    size: usize,
    data: Vec<u64>,
}

impl TravelMatrix {
    pub fn zeros(size: usize) -> Self {
        Self {
            size,
            data: vec![0; size * size],
        }
    }

    pub fn from_rows(rows: Vec<Vec<u64>>) -> Result<Self, InstanceError> {
        let size = rows.len();
        let mut data = Vec::with_capacity(size * size);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != size {
                return Err(InstanceError::Invalid(format!(
                    "matrix row {i} has {} entries, expected {size}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(Self { size, data })
    }

    /// Symmetric matrix where every distinct pair is `d` apart.
    pub fn uniform(size: usize, d: u64) -> Self {
        let mut m = Self::zeros(size);
        for u in 0..size {
            for v in 0..size {
                if u != v {
                    m.set(u, v, d);
                }
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> u64 {
        self.data[from * self.size + to]
    }

    pub fn set(&mut self, from: usize, to: usize, value: u64) {
        self.data[from * self.size + to] = value;
    }

    pub fn max(&self) -> u64 {
        self.data.iter().copied().max().unwrap_or(0)
    }

    pub fn row(&self, from: usize) -> &[u64] {
        &self.data[from * self.size..(from + 1) * self.size]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    pub name: String,
    pub n_machines: usize,
    pub n_tools: usize,
    /// Default fleet sizes recorded with the instance; runs may override them.
    pub n_agvs: usize,
    pub n_tool_transporters: usize,
    pub jobs: Vec<Vec<Operation>>,
    pub d_agv: TravelMatrix,
    /// Absent for AGV-only instances.
    pub d_tt: Option<TravelMatrix>,
}

impl Instance {
    /// AGV-only instance from `(machine, duration)` lists and a travel matrix.
    pub fn agv_only(
        name: impl Into<String>,
        n_machines: usize,
        jobs: &[&[(usize, u64)]],
        d_agv: TravelMatrix,
    ) -> Result<Self, InstanceError> {
        let inst = Self {
            name: name.into(),
            n_machines,
            n_tools: 0,
            n_agvs: 1,
            n_tool_transporters: 0,
            jobs: jobs
                .iter()
                .map(|ops| {
                    ops.iter()
                        .map(|&(machine, duration)| Operation {
                            machine,
                            tool: None,
                            duration,
                        })
                        .collect()
                })
                .collect(),
            d_agv,
            d_tt: None,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn n_jobs(&self) -> usize {
        self.jobs.len()
    }

    pub fn n_operations(&self) -> usize {
        self.jobs.iter().map(Vec::len).sum()
    }

    pub fn total_duration(&self) -> u64 {
        self.jobs.iter().flatten().map(|o| o.duration).sum()
    }

    pub fn has_tools(&self) -> bool {
        self.n_tools > 0 && self.d_tt.is_some()
    }

    pub fn operation(&self, job: usize, op: usize) -> &Operation {
        &self.jobs[job][op]
    }

    /// Where the piece for `(job, op)` is collected: the previous
    /// operation's machine, or the Load/Unload station for the first one.
    pub fn pickup_location(&self, job: usize, op: usize) -> usize {
        if op == 0 {
            STATION
        } else {
            machine_location(self.jobs[job][op - 1].machine)
        }
    }

    /// Machines visited by at least one operation.
    pub fn active_machines(&self) -> Vec<bool> {
        let mut used = vec![false; self.n_machines];
        for op in self.jobs.iter().flatten() {
            used[op.machine] = true;
        }
        used
    }

    /// Check index ranges, durations and matrix shapes.
    pub fn validate(&self) -> Result<(), InstanceError> {
        let size = self.n_machines + 1;
        let check_matrix = |name: &str, m: &TravelMatrix| -> Result<(), InstanceError> {
            if m.size() != size {
                return Err(InstanceError::Invalid(format!(
                    "{name} is {0}x{0}, expected {size}x{size}",
                    m.size()
                )));
            }
            for u in 0..size {
                if m.get(u, u) != 0 {
                    return Err(InstanceError::Invalid(format!("{name} has nonzero diagonal at {u}")));
                }
            }
            Ok(())
        };
        check_matrix("D_AGV", &self.d_agv)?;
        match (&self.d_tt, self.n_tools) {
            (Some(m), n) if n > 0 => check_matrix("D_TT", m)?,
            (None, 0) => {}
            (Some(_), _) => return Err(InstanceError::Invalid("D_TT given without tools".into())),
            (None, _) => return Err(InstanceError::Invalid("tools declared but D_TT missing".into())),
        }
        for (j, ops) in self.jobs.iter().enumerate() {
            for (o, op) in ops.iter().enumerate() {
                if op.machine >= self.n_machines {
                    return Err(InstanceError::Invalid(format!(
                        "job {j} op {o}: machine {} out of range",
                        op.machine
                    )));
                }
                if op.duration == 0 {
                    return Err(InstanceError::Invalid(format!("job {j} op {o}: duration must be >= 1")));
                }
                match op.tool {
                    Some(t) if t >= self.n_tools => {
                        return Err(InstanceError::Invalid(format!("job {j} op {o}: tool {t} out of range")))
                    }
                    None if self.n_tools > 0 => {
                        return Err(InstanceError::Invalid(format!("job {j} op {o}: missing tool")))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}
