//! Component ablations: lookahead, reward shaping and action masking.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::run::{run, RunError, SolverSpec};
use crate::env::{Env, EnvConfig, RewardMode};
use crate::instance::Instance;
use crate::solvers::ppo::{decile_means, ppo_train, ActorCritic, PpoConfig, PpoError, TrainLog};

#[derive(Debug, Error)]
pub enum AblationError {
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Ppo(#[from] PpoError),
    #[error("{0}")]
    Argument(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub instance: String,
    pub with: u64,
    pub without: u64,
}

/// Makespans with and without one component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub component: String,
    pub rows: Vec<AblationRow>,
}

impl AblationTable {
    pub fn mean_with(&self) -> f64 {
        mean(self.rows.iter().map(|r| r.with as f64))
    }

    pub fn mean_without(&self) -> f64 {
        mean(self.rows.iter().map(|r| r.without as f64))
    }

    /// Mean makespan saved by the component; positive is better.
    pub fn improvement(&self) -> f64 {
        self.mean_without() - self.mean_with()
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Run `solver` on each instance with lookahead on and with the
/// maximum-travel fallback.
pub fn lookahead_ablation(
    instances: &[Instance],
    solver: &SolverSpec,
    env_config: &EnvConfig,
) -> Result<AblationTable, AblationError> {
    if solver.lookahead_rule().is_none() {
        return Err(AblationError::Argument(format!(
            "{} has no deterministic rule to look ahead with",
            solver.name()
        )));
    }
    let on = EnvConfig {
        lookahead: true,
        ..env_config.clone()
    };
    let off = EnvConfig {
        lookahead: false,
        ..env_config.clone()
    };
    let rows = instances
        .iter()
        .map(|inst| {
            Ok(AblationRow {
                instance: inst.name.clone(),
                with: run(inst, solver, &on)?.report.makespan,
                without: run(inst, solver, &off)?.report.makespan,
            })
        })
        .collect::<Result<_, RunError>>()?;
    Ok(AblationTable {
        component: "lookahead".into(),
        rows,
    })
}

/// Train on episodes drawn uniformly from `instances`.
pub fn train_on(
    instances: &[Instance],
    env_config: &EnvConfig,
    ppo: &PpoConfig,
) -> Result<(ActorCritic, TrainLog), AblationError> {
    if instances.is_empty() {
        return Err(AblationError::Argument("no training instances".into()));
    }
    let mut make = |rng: &mut rand_chacha::ChaCha8Rng| {
        let i = rng.gen_range(0..instances.len());
        Env::new(&instances[i], env_config.clone())
    };
    Ok(ppo_train(&mut make, ppo, None)?)
}

/// Deterministic makespan of `model` on each instance.
pub fn evaluate(model: &Arc<ActorCritic>, instances: &[Instance], env_config: &EnvConfig) -> Result<Vec<u64>, RunError> {
    let spec = SolverSpec::Ppo {
        model: model.clone(),
        deterministic: true,
        seed: 0,
    };
    instances
        .iter()
        .map(|i| run(i, &spec, env_config).map(|o| o.report.makespan))
        .collect()
}

#[derive(Debug, Clone)]
pub struct RewardShaping {
    pub table: AblationTable,
    pub idle_log: TrainLog,
    pub sparse_log: TrainLog,
}

/// Train once with the idle-machine penalty and once with the sparse
/// makespan reward, then compare both policies on `eval`.
pub fn reward_shaping_ablation(
    train: &[Instance],
    eval: &[Instance],
    env_config: &EnvConfig,
    ppo: &PpoConfig,
) -> Result<RewardShaping, AblationError> {
    let mut trained = Vec::with_capacity(2);
    for mode in [RewardMode::IdlePenalty, RewardMode::SparseMakespan] {
        let cfg = EnvConfig {
            reward_mode: mode,
            ..env_config.clone()
        };
        let (model, log) = train_on(train, &cfg, ppo)?;
        let makespans = evaluate(&Arc::new(model), eval, &cfg)?;
        trained.push((makespans, log));
    }
    let (sparse_ms, sparse_log) = trained.pop().expect("two runs");
    let (idle_ms, idle_log) = trained.pop().expect("two runs");
    let rows = eval
        .iter()
        .zip(idle_ms.iter().zip(&sparse_ms))
        .map(|(inst, (&with, &without))| AblationRow {
            instance: inst.name.clone(),
            with,
            without,
        })
        .collect();
    Ok(RewardShaping {
        table: AblationTable {
            component: "reward shaping".into(),
            rows,
        },
        idle_log,
        sparse_log,
    })
}

/// Summary of one training curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveStats {
    pub first_decile: f64,
    pub last_decile: f64,
    /// Standard deviation of episode rewards over the last half.
    pub late_std: f64,
    pub episodes: usize,
}

impl CurveStats {
    pub fn of(rewards: &[f64]) -> Option<Self> {
        let (first_decile, last_decile) = decile_means(rewards)?;
        let late = &rewards[rewards.len() / 2..];
        let m = mean(late.iter().copied());
        let late_std = mean(late.iter().map(|r| (r - m) * (r - m))).sqrt();
        Some(Self {
            first_decile,
            last_decile,
            late_std,
            episodes: rewards.len(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct MaskingAblation {
    pub masked: TrainLog,
    pub unmasked: TrainLog,
}

impl MaskingAblation {
    pub fn masked_stats(&self) -> Option<CurveStats> {
        CurveStats::of(&self.masked.episode_rewards)
    }

    pub fn unmasked_stats(&self) -> Option<CurveStats> {
        CurveStats::of(&self.unmasked.episode_rewards)
    }
}

/// Train on `instance` with the guard mask fed to the policy, and again
/// with the mask withheld so that disabled actions are penalised instead.
pub fn masking_ablation(
    instance: &Instance,
    env_config: &EnvConfig,
    ppo: &PpoConfig,
) -> Result<MaskingAblation, AblationError> {
    let masked_env = EnvConfig {
        masking: true,
        ..env_config.clone()
    };
    let unmasked_env = EnvConfig {
        masking: false,
        ..env_config.clone()
    };
    let (_, masked) = train_on(
        std::slice::from_ref(instance),
        &masked_env,
        &PpoConfig {
            use_mask: true,
            ..ppo.clone()
        },
    )?;
    let (_, unmasked) = train_on(
        std::slice::from_ref(instance),
        &unmasked_env,
        &PpoConfig {
            use_mask: false,
            ..ppo.clone()
        },
    )?;
    Ok(MaskingAblation { masked, unmasked })
}
