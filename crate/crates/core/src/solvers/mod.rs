//! Decision policies: dispatching rules, random search, symbiotic organisms
//! search, exhaustive search for tiny instances and masked PPO.

mod brute;
mod heuristics;
pub mod nn;
pub mod ppo;
mod random;
mod sos;

use crate::env::{Env, EnvError};

pub use brute::{brute_force_optimal, BruteForceError, BruteForceLimits, BruteForceResult};
pub use heuristics::{AgvRule, HeuristicPolicy, JobRule};
pub use random::RandomPolicy;
pub use sos::{decode_keys, sos_optimize, Organism, SosConfig, SosResult};

/// A decision function over the environment. Implementations must return
/// an action the environment's mask enables.
pub trait Policy {
    fn act(&mut self, env: &Env) -> usize;
    fn name(&self) -> String;
    fn deterministic(&self) -> bool;
}

/// Drive `env` to the end under `policy`; returns the makespan.
pub fn rollout(env: &mut Env, policy: &mut dyn Policy) -> Result<u64, EnvError> {
    while !env.is_terminal() {
        let a = policy.act(env);
        env.step_fast(a)?;
    }
    Ok(env.makespan())
}

/// Lowest enabled index, if any.
pub(crate) fn first_enabled(mask: &[bool]) -> Option<usize> {
    mask.iter().position(|&b| b)
}
