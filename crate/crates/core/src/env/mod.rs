//! Reset/step/mask facade over [`FmsNet`] shared by every solver.

mod observation;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fms::{BuildOptions, Control, FmsError, FmsHalt, FmsNet, Mode, RelocationTarget, ScheduleTrace};
use crate::instance::{pad_instance, Instance, InstanceError};
use crate::petri::TransitionId;

pub use observation::{observation_len, Observation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error(transparent)]
    Fms(#[from] FmsError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("episode already finished")]
    EpisodeDone,
    #[error("action {0} is masked")]
    MaskedAction(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    /// Minus the share of idle machines at each decision point.
    #[default]
    IdlePenalty,
    /// Zero until the end, then minus the makespan over the total work.
    SparseMakespan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub reward_mode: RewardMode,
    /// Predict empty-buffer relocations with a twin rollout.
    pub lookahead: bool,
    /// Refuse masked actions instead of penalising them.
    pub masking: bool,
    /// Fixed `(jobs, machines)` layout the instance is padded into.
    pub shell: Option<(usize, usize)>,
    /// Fleet sizes; `None` takes the instance defaults.
    pub n_agvs: Option<usize>,
    pub n_tool_transporters: Option<usize>,
    pub tools: bool,
    pub controlled_tool_dispatch: bool,
    pub invalid_action_reward: f64,
    pub sparse_scale: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            reward_mode: RewardMode::IdlePenalty,
            lookahead: false,
            masking: true,
            shell: None,
            n_agvs: None,
            n_tool_transporters: None,
            tools: false,
            controlled_tool_dispatch: false,
            invalid_action_reward: -1.0,
            sparse_scale: 1.0,
        }
    }
}

impl EnvConfig {
    pub fn build_options(&self, instance: &Instance) -> BuildOptions {
        BuildOptions {
            n_agvs: self.n_agvs.unwrap_or(instance.n_agvs),
            n_tool_transporters: self.n_tool_transporters.unwrap_or(instance.n_tool_transporters),
            mode: if self.tools { Mode::AgvAndTools } else { Mode::AgvOnly },
            controlled_tool_dispatch: self.controlled_tool_dispatch,
        }
    }
}

/// A deterministic decision rule usable inside lookahead rollouts.
pub trait DecisionRule: Send + Sync {
    /// An enabled action index for the current decision point.
    fn decide(&self, env: &Env) -> usize;
    fn name(&self) -> String;
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    /// Clock after the step; the makespan once terminal.
    pub makespan: u64,
    pub elapsed: u64,
    pub fired: Vec<TransitionId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub terminal: bool,
    pub info: StepInfo,
}

#[derive(Clone)]
pub struct Env {
    config: EnvConfig,
    original: Instance,
    instance: Instance,
    options: BuildOptions,
    fms: FmsNet,
    lookahead_rule: Option<Arc<dyn DecisionRule>>,
    active: Vec<bool>,
    n_active: usize,
    terminal: bool,
    total_duration: u64,
    lookahead_calls: u64,
    lookahead_hits: u64,
}

impl fmt::Debug for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Env")
            .field("instance", &self.original.name)
            .field("config", &self.config)
            .field("clock", &self.fms.clock())
            .field("terminal", &self.terminal)
            .finish()
    }
}

impl Env {
    pub fn new(instance: &Instance, config: EnvConfig) -> Result<Self, EnvError> {
        if config.sparse_scale <= 0.0 || !config.sparse_scale.is_finite() {
            return Err(EnvError::Config("sparse_scale must be positive".into()));
        }
        let padded = match config.shell {
            Some((jobs, machines)) => pad_instance(instance, jobs, machines)?,
            None => instance.clone(),
        };
        let options = config.build_options(instance);
        let fms = FmsNet::build(&padded, &options)?;
        let mut active = instance.active_machines();
        active.resize(padded.n_machines, false);
        let n_active = active.iter().filter(|a| **a).count();
        let mut env = Self {
            config,
            original: instance.clone(),
            total_duration: instance.total_duration(),
            instance: padded,
            options,
            fms,
            lookahead_rule: None,
            active,
            n_active,
            terminal: false,
            lookahead_calls: 0,
            lookahead_hits: 0,
        };
        env.settle()?;
        Ok(env)
    }

    /// Rebuild from scratch, keeping configuration and lookahead rule.
    pub fn reset(&mut self) -> Result<Observation, EnvError> {
        self.fms = FmsNet::build(&self.instance, &self.options)?;
        self.terminal = false;
        self.lookahead_calls = 0;
        self.lookahead_hits = 0;
        self.settle()?;
        Ok(self.observation())
    }

    /// Rule used to predict relocations when lookahead is on. Without one,
    /// lookahead falls back to the maximum travel time.
    pub fn set_lookahead_rule(&mut self, rule: Option<Arc<dyn DecisionRule>>) {
        self.lookahead_rule = rule;
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    /// The instance as given, before padding.
    pub fn original(&self) -> &Instance {
        &self.original
    }

    /// The instance the net was built from (padded to the shell).
    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn fms(&self) -> &FmsNet {
        &self.fms
    }

    pub fn controls(&self) -> &[Control] {
        self.fms.controls()
    }

    pub fn n_actions(&self) -> usize {
        self.fms.controls().len()
    }

    pub fn action_mask(&self) -> Vec<bool> {
        if self.terminal {
            return vec![false; self.n_actions()];
        }
        self.fms.action_mask()
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal
    }

    pub fn clock(&self) -> u64 {
        self.fms.clock()
    }

    pub fn makespan(&self) -> u64 {
        self.fms.clock()
    }

    pub fn trace(&self) -> &ScheduleTrace {
        self.fms.trace()
    }

    /// Machines that at least one operation visits.
    pub fn active_machines(&self) -> &[bool] {
        &self.active
    }

    /// `(relocations predicted by lookahead, predictions that were used)`.
    pub fn lookahead_stats(&self) -> (u64, u64) {
        (self.lookahead_calls, self.lookahead_hits)
    }

    /// Idle share of the machines that have work in this instance.
    pub fn idle_fraction(&self) -> f64 {
        if self.n_active == 0 {
            return 0.0;
        }
        let idle = (0..self.active.len())
            .filter(|&m| self.active[m] && self.fms.machine_is_idle(m))
            .count();
        idle as f64 / self.n_active as f64
    }

    fn reward(&self) -> f64 {
        match (self.config.reward_mode, self.terminal) {
            (RewardMode::IdlePenalty, false) => -self.idle_fraction(),
            (RewardMode::IdlePenalty, true) => 0.0,
            (RewardMode::SparseMakespan, false) => 0.0,
            (RewardMode::SparseMakespan, true) => {
                -(self.makespan() as f64) / self.total_duration.max(1) as f64 * self.config.sparse_scale
            }
        }
    }

    pub fn step(&mut self, action: usize) -> Result<StepResult, EnvError> {
        if self.terminal {
            return Err(EnvError::EpisodeDone);
        }
        let mask = self.fms.action_mask();
        if !mask.get(action).copied().unwrap_or(false) {
            if self.config.masking {
                return Err(EnvError::MaskedAction(action));
            }
            return Ok(StepResult {
                observation: self.observation(),
                reward: self.config.invalid_action_reward,
                terminal: false,
                info: StepInfo {
                    makespan: self.clock(),
                    elapsed: 0,
                    fired: Vec::new(),
                },
            });
        }
        let before = self.clock();
        self.fms.trigger(action)?;
        self.settle()?;
        Ok(StepResult {
            observation: self.observation(),
            reward: self.reward(),
            terminal: self.terminal,
            info: StepInfo {
                makespan: self.clock(),
                elapsed: self.clock() - before,
                fired: self.fms.last_fired().to_vec(),
            },
        })
    }

    /// Same as [`Env::step`] without building the observation.
    pub fn step_fast(&mut self, action: usize) -> Result<(f64, bool), EnvError> {
        if self.terminal {
            return Err(EnvError::EpisodeDone);
        }
        if !self.fms.action_mask().get(action).copied().unwrap_or(false) {
            if self.config.masking {
                return Err(EnvError::MaskedAction(action));
            }
            return Ok((self.config.invalid_action_reward, false));
        }
        self.fms.trigger(action)?;
        self.settle()?;
        Ok((self.reward(), self.terminal))
    }

    fn settle(&mut self) -> Result<(), EnvError> {
        loop {
            match self.fms.advance()? {
                FmsHalt::Decision => return Ok(()),
                FmsHalt::Terminal => {
                    self.terminal = true;
                    return Ok(());
                }
                FmsHalt::Relocation { agv } => {
                    let target = self.relocation_choice(agv);
                    self.fms.assign_relocation(target)?;
                }
            }
        }
    }

    fn relocation_choice(&mut self, agv: usize) -> RelocationTarget {
        if !self.config.lookahead {
            return RelocationTarget::Fallback;
        }
        let Some(rule) = self.lookahead_rule.clone() else {
            return RelocationTarget::Fallback;
        };
        self.lookahead_calls += 1;
        match self.lookahead_predict(agv, rule.as_ref()) {
            Some((job, op)) => {
                self.lookahead_hits += 1;
                RelocationTarget::Predicted { job, op }
            }
            None => RelocationTarget::Fallback,
        }
    }

    /// Roll a copy of the environment forward under `rule` until it hands
    /// an operation to `agv`; return that operation. `None` when the copy
    /// ends or the step budget (ten times the unassigned operations) runs
    /// out first.
    pub fn lookahead_predict(&self, agv: usize, rule: &dyn DecisionRule) -> Option<(usize, usize)> {
        let mut twin = self.clone();
        twin.lookahead_rule = None;
        if twin.fms.awaiting_relocation().is_some() {
            twin.fms.assign_relocation(RelocationTarget::Fallback).ok()?;
            twin.settle().ok()?;
        }
        let budget = 10 * twin.fms.unassigned_ops().max(1);
        for _ in 0..budget {
            if twin.terminal {
                return None;
            }
            let action = rule.decide(&twin);
            if twin.controls().get(action) == Some(&Control::Agv(agv)) {
                return twin.fms.pending_request();
            }
            twin.step_fast(action).ok()?;
        }
        None
    }

    pub fn observation(&self) -> Observation {
        Observation::encode(self)
    }

    /// Hash of the full simulation state.
    pub fn fingerprint(&self) -> u64 {
        self.fms.fingerprint() ^ u64::from(self.terminal)
    }
}
