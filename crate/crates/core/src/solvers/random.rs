use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Policy;
use crate::env::Env;

/// Uniform choice among enabled actions.
#[derive(Debug, Clone)]
pub struct RandomPolicy {
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Policy for RandomPolicy {
    fn act(&mut self, env: &Env) -> usize {
        let enabled: Vec<usize> = env
            .action_mask()
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
            .collect();
        *enabled.choose(&mut self.rng).expect("decision point has an enabled action")
    }

    fn name(&self) -> String {
        "random".into()
    }

    fn deterministic(&self) -> bool {
        false
    }
}
