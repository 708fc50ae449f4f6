use std::fmt;
use std::str::FromStr;

use super::{first_enabled, Policy};
use crate::env::{DecisionRule, Env};
use crate::fms::Control;

/// Job selection rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JobRule {
    /// Job that entered the system earliest (first dispatch time; jobs not
    /// yet started count as entering now).
    Fifo,
    /// Fewest operations in total.
    Sps,
    /// Most operations in total.
    Lps,
    /// Shortest next operation.
    Sptn,
    /// Longest next operation.
    Lptn,
    /// Most processing time left.
    Mtwr,
    /// Least processing time left.
    Ltwr,
    /// Longest time since the job's previous operation finished.
    Lwt,
    /// Shortest total processing time.
    Spt,
    /// Longest total processing time.
    Lpt,
    /// Fewest operations left.
    Spsr,
    /// Most operations left.
    Lpsr,
}

impl JobRule {
    pub const ALL: [JobRule; 12] = [
        JobRule::Fifo,
        JobRule::Sps,
        JobRule::Lps,
        JobRule::Sptn,
        JobRule::Lptn,
        JobRule::Mtwr,
        JobRule::Ltwr,
        JobRule::Lwt,
        JobRule::Spt,
        JobRule::Lpt,
        JobRule::Spsr,
        JobRule::Lpsr,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            JobRule::Fifo => "FIFO",
            JobRule::Sps => "SPS",
            JobRule::Lps => "LPS",
            JobRule::Sptn => "SPTN",
            JobRule::Lptn => "LPTN",
            JobRule::Mtwr => "MTWR",
            JobRule::Ltwr => "LTWR",
            JobRule::Lwt => "LWT",
            JobRule::Spt => "SPT",
            JobRule::Lpt => "LPT",
            JobRule::Spsr => "SPSR",
            JobRule::Lpsr => "LPSR",
        }
    }

    /// Score of an enabled job; the rule picks the smallest.
    fn score(self, env: &Env, job: usize) -> i128 {
        let fms = env.fms();
        let ops = &env.instance().jobs[job];
        let next = fms.dispatched_ops(job);
        let rest = &ops[next.min(ops.len())..];
        let total: u64 = ops.iter().map(|o| o.duration).sum();
        let remaining: u64 = rest.iter().map(|o| o.duration).sum();
        let next_d = rest.first().map_or(0, |o| o.duration);
        let v = |x: u64| x as i128;
        match self {
            JobRule::Fifo => v(fms.entered_at(job).unwrap_or(env.clock())),
            JobRule::Sps => v(ops.len() as u64),
            JobRule::Lps => -v(ops.len() as u64),
            JobRule::Sptn => v(next_d),
            JobRule::Lptn => -v(next_d),
            JobRule::Mtwr => -v(remaining),
            JobRule::Ltwr => v(remaining),
            JobRule::Lwt => -v(env.clock() - fms.ready_since(job)),
            JobRule::Spt => v(total),
            JobRule::Lpt => -v(total),
            JobRule::Spsr => v(rest.len() as u64),
            JobRule::Lpsr => -v(rest.len() as u64),
        }
    }
}

impl fmt::Display for JobRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for JobRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        JobRule::ALL
            .into_iter()
            .find(|r| r.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown job rule {s:?}"))
    }
}

/// AGV selection rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgvRule {
    /// Lowest-index AGV that is idle with nothing queued; otherwise the one
    /// with the fewest queued or running transports.
    FirstAvailable,
    /// AGV with the least loaded plus empty travel so far.
    LeastWork,
}

impl AgvRule {
    pub const ALL: [AgvRule; 2] = [AgvRule::FirstAvailable, AgvRule::LeastWork];

    pub fn as_str(self) -> &'static str {
        match self {
            AgvRule::FirstAvailable => "first",
            AgvRule::LeastWork => "least_work",
        }
    }
}

impl fmt::Display for AgvRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgvRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "first" | "first_available" => Ok(AgvRule::FirstAvailable),
            "least_work" | "least" => Ok(AgvRule::LeastWork),
            _ => Err(format!("unknown AGV rule {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HeuristicPolicy {
    pub job: JobRule,
    pub agv: AgvRule,
}

impl HeuristicPolicy {
    pub fn new(job: JobRule, agv: AgvRule) -> Self {
        Self { job, agv }
    }

    pub fn choose(&self, env: &Env) -> usize {
        let mask = env.action_mask();
        let controls = env.controls();
        let enabled = |pred: &dyn Fn(&Control) -> bool| -> Vec<usize> {
            (0..mask.len()).filter(|&i| mask[i] && pred(&controls[i])).collect()
        };
        let agvs = enabled(&|c| matches!(c, Control::Agv(_)));
        if !agvs.is_empty() {
            return self.pick_agv(env, &agvs);
        }
        let jobs = enabled(&|c| matches!(c, Control::Job(_)));
        if !jobs.is_empty() {
            return *jobs
                .iter()
                .min_by_key(|&&i| {
                    let Control::Job(j) = controls[i] else { unreachable!() };
                    self.job.score(env, j)
                })
                .expect("non-empty");
        }
        first_enabled(&mask).expect("decision point has an enabled action")
    }

    fn pick_agv(&self, env: &Env, actions: &[usize]) -> usize {
        let fms = env.fms();
        let agv_of = |i: usize| match env.controls()[i] {
            Control::Agv(k) => k,
            _ => unreachable!(),
        };
        match self.agv {
            AgvRule::FirstAvailable => actions
                .iter()
                .copied()
                .find(|&i| {
                    let k = agv_of(i);
                    fms.agv_is_idle(k) && fms.agv_buffer_len(k) == 0
                })
                .unwrap_or_else(|| {
                    *actions
                        .iter()
                        .min_by_key(|&&i| {
                            let k = agv_of(i);
                            fms.agv_buffer_len(k) + usize::from(!fms.agv_is_idle(k))
                        })
                        .expect("non-empty")
                }),
            AgvRule::LeastWork => *actions
                .iter()
                .min_by_key(|&&i| fms.agv_work(agv_of(i)))
                .expect("non-empty"),
        }
    }
}

impl fmt::Display for HeuristicPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}", self.job, self.agv)
    }
}

impl DecisionRule for HeuristicPolicy {
    fn decide(&self, env: &Env) -> usize {
        self.choose(env)
    }

    fn name(&self) -> String {
        self.to_string()
    }
}

impl Policy for HeuristicPolicy {
    fn act(&mut self, env: &Env) -> usize {
        self.choose(env)
    }

    fn name(&self) -> String {
        self.to_string()
    }

    fn deterministic(&self) -> bool {
        true
    }
}
