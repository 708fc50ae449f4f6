use thiserror::Error;

use crate::env::{Env, EnvError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BruteForceLimits {
    /// Maximum number of search nodes expanded.
    pub max_nodes: u64,
}

impl Default for BruteForceLimits {
    fn default() -> Self {
        Self { max_nodes: 10_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BruteForceError {
    #[error("search space exceeds {0} nodes")]
    TooLarge(u64),
    #[error(transparent)]
    Env(#[from] EnvError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteForceResult {
    pub makespan: u64,
    /// Action sequence reaching the optimum.
    pub actions: Vec<usize>,
    pub nodes: u64,
}

/// Exhaustive depth-first search over enabled action sequences, pruning
/// branches whose clock already reaches the best makespan found.
pub fn brute_force_optimal(env: &Env, limits: BruteForceLimits) -> Result<BruteForceResult, BruteForceError> {
    let mut search = Search {
        best: u64::MAX,
        best_actions: Vec::new(),
        path: Vec::new(),
        nodes: 0,
        limit: limits.max_nodes,
    };
    search.dfs(env)?;
    Ok(BruteForceResult {
        makespan: search.best,
        actions: search.best_actions,
        nodes: search.nodes,
    })
}

struct Search {
    best: u64,
    best_actions: Vec<usize>,
    path: Vec<usize>,
    nodes: u64,
    limit: u64,
}

impl Search {
    fn dfs(&mut self, env: &Env) -> Result<(), BruteForceError> {
        self.nodes += 1;
        if self.nodes > self.limit {
            return Err(BruteForceError::TooLarge(self.limit));
        }
        if env.is_terminal() {
            if env.makespan() < self.best {
                self.best = env.makespan();
                self.best_actions = self.path.clone();
            }
            return Ok(());
        }
        if env.clock() >= self.best {
            return Ok(());
        }
        for (a, enabled) in env.action_mask().into_iter().enumerate() {
            if !enabled {
                continue;
            }
            let mut child = env.clone();
            child.step_fast(a)?;
            self.path.push(a);
            self.dfs(&child)?;
            self.path.pop();
        }
        Ok(())
    }
}
