//! Sequential batch injection: partitions arrive one after another and
//! each solver schedules them in turn.

use serde::{Deserialize, Serialize};

use super::run::{run, RunError, SolverSpec};
use crate::env::{EnvConfig, EnvError};
use crate::instance::Instance;

/// State after one partition has been processed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub partition: String,
    pub makespan: u64,
    pub compute_secs: f64,
    pub cumulative_makespan: u64,
    pub cumulative_compute_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSeries {
    pub solver: String,
    pub checkpoints: Vec<Checkpoint>,
}

impl SolverSeries {
    pub fn total_compute_secs(&self) -> f64 {
        self.checkpoints.last().map_or(0.0, |c| c.cumulative_compute_secs)
    }

    pub fn total_makespan(&self) -> u64 {
        self.checkpoints.last().map_or(0, |c| c.cumulative_makespan)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicReport {
    pub series: Vec<SolverSeries>,
}

impl DynamicReport {
    /// First partition index (0-based) from which `a`'s cumulative compute
    /// time stays strictly below `b`'s.
    pub fn crossover(&self, a: usize, b: usize) -> Option<usize> {
        let (sa, sb) = (&self.series[a].checkpoints, &self.series[b].checkpoints);
        let below: Vec<bool> = sa
            .iter()
            .zip(sb)
            .map(|(x, y)| x.cumulative_compute_secs < y.cumulative_compute_secs)
            .collect();
        let last_not = below.iter().rposition(|b| !b);
        match last_not {
            None if !below.is_empty() => Some(0),
            Some(i) if i + 1 < below.len() => Some(i + 1),
            _ => None,
        }
    }
}

/// Feed `partitions` in order to every solver. Each partition is a fresh
/// run: search-based solvers restart, a trained policy is reused as is.
/// Compute time is the wall time of each run, rollout included.
pub fn dynamic_scenario(
    partitions: &[Instance],
    solvers: &[(SolverSpec, EnvConfig)],
) -> Result<DynamicReport, RunError> {
    if partitions.is_empty() {
        return Err(EnvError::Config("dynamic scenario needs at least one partition".into()).into());
    }
    let mut series = Vec::with_capacity(solvers.len());
    for (spec, cfg) in solvers {
        let mut checkpoints = Vec::with_capacity(partitions.len());
        let (mut cum_ms, mut cum_t) = (0u64, 0.0f64);
        for p in partitions {
            let out = run(p, spec, cfg)?;
            cum_ms += out.report.makespan;
            cum_t += out.report.wall_secs;
            checkpoints.push(Checkpoint {
                partition: p.name.clone(),
                makespan: out.report.makespan,
                compute_secs: out.report.wall_secs,
                cumulative_makespan: cum_ms,
                cumulative_compute_secs: cum_t,
            });
        }
        series.push(SolverSeries {
            solver: spec.name(),
            checkpoints,
        });
    }
    Ok(DynamicReport { series })
}
