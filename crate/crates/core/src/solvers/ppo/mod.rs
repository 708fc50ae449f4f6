//! Maskable proximal policy optimization with separate actor and critic.
//!
//! Disabled actions get a logit of minus infinity before the softmax, so
//! their probability is exactly zero. The minimized loss is
//! `-L_clip + c1 * (V - R)^2 - beta * H`, averaged over a minibatch.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::nn::{Cache, Mlp, Optimizer, OptimizerKind};
use super::Policy;
use crate::env::{DecisionRule, Env, EnvConfig, EnvError};

#[derive(Debug, Error)]
pub enum PpoError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("no action is enabled")]
    EmptyMask,
    #[error("training diverged at update {update}: non-finite {what}")]
    Diverged { update: usize, what: &'static str },
    #[error("environment does not match the model: {0}")]
    Shape(String),
    #[error("invalid PPO configuration: {0}")]
    Config(String),
    #[error("checkpoint I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("checkpoint format: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoConfig {
    pub total_steps: u64,
    pub learning_rate: f64,
    pub clip: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    /// Environment steps collected per update.
    pub rollout_len: usize,
    pub minibatch: usize,
    pub epochs: usize,
    pub hidden: usize,
    pub seed: u64,
    pub optimizer: OptimizerKind,
    /// Global gradient-norm clip per network; `None` disables it.
    pub max_grad_norm: Option<f64>,
    pub normalize_advantages: bool,
    /// Feed the action mask to the policy. Off for the masking ablation.
    pub use_mask: bool,
    /// Episodes longer than this are cut (and bootstrapped).
    pub max_episode_steps: usize,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            total_steps: 300_000,
            learning_rate: 0.01,
            clip: 0.2,
            value_coef: 0.5,
            entropy_coef: 0.0,
            gamma: 0.99,
            gae_lambda: 0.95,
            rollout_len: 2048,
            minibatch: 64,
            epochs: 10,
            hidden: 256,
            seed: 0,
            optimizer: OptimizerKind::Sgd,
            max_grad_norm: Some(0.5),
            normalize_advantages: true,
            use_mask: true,
            max_episode_steps: 10_000,
        }
    }
}

impl PpoConfig {
    fn check(&self) -> Result<(), PpoError> {
        let bad = |m: &str| Err(PpoError::Config(m.into()));
        if self.rollout_len == 0 || self.minibatch == 0 || self.epochs == 0 || self.hidden == 0 {
            return bad("rollout_len, minibatch, epochs and hidden must be positive");
        }
        if !(self.learning_rate > 0.0) || !(self.clip > 0.0) {
            return bad("learning_rate and clip must be positive");
        }
        if !(0.0..=1.0).contains(&self.gamma) || !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad("gamma and gae_lambda must lie in [0, 1]");
        }
        Ok(())
    }
}

/// Probabilities with disabled entries forced to exactly zero.
pub fn masked_softmax(logits: &[f64], mask: Option<&[bool]>) -> Vec<f64> {
    let on = |i: usize| mask.map_or(true, |m| m[i]);
    let max = (0..logits.len())
        .filter(|&i| on(i))
        .map(|i| logits[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = (0..logits.len())
        .map(|i| if on(i) { (logits[i] - max).exp() } else { 0.0 })
        .collect();
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= z);
    p
}

/// Policy and value networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorCritic {
    pub actor: Mlp,
    pub critic: Mlp,
}

impl ActorCritic {
    pub fn new(obs_len: usize, n_actions: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            actor: Mlp::new(&[obs_len, hidden, hidden, n_actions], 0.01, &mut rng),
            critic: Mlp::new(&[obs_len, hidden, hidden, 1], 1.0, &mut rng),
        }
    }

    pub fn obs_len(&self) -> usize {
        self.actor.input_len()
    }

    pub fn n_actions(&self) -> usize {
        self.actor.output_len()
    }

    pub fn logits(&self, obs: &[f64]) -> Vec<f64> {
        self.actor.forward(obs)
    }

    pub fn value(&self, obs: &[f64]) -> f64 {
        self.critic.forward(obs)[0]
    }

    /// Greedy (`deterministic`) or sampled action over the enabled set.
    pub fn act<R: Rng>(
        &self,
        obs: &[f64],
        mask: Option<&[bool]>,
        deterministic: bool,
        rng: &mut R,
    ) -> Result<usize, PpoError> {
        if mask.map_or(false, |m| !m.iter().any(|&b| b)) {
            return Err(PpoError::EmptyMask);
        }
        let logits = self.logits(obs);
        Ok(if deterministic {
            argmax_enabled(&logits, mask)
        } else {
            sample(&masked_softmax(&logits, mask), rng)
        })
    }

    fn check_env(&self, env: &Env) -> Result<(), PpoError> {
        let obs = env.observation().len();
        if obs != self.obs_len() || env.n_actions() != self.n_actions() {
            return Err(PpoError::Shape(format!(
                "model expects {} features / {} actions, environment gives {obs} / {}",
                self.obs_len(),
                self.n_actions(),
                env.n_actions()
            )));
        }
        Ok(())
    }
}

fn argmax_enabled(logits: &[f64], mask: Option<&[bool]>) -> usize {
    let mut best: Option<usize> = None;
    for i in 0..logits.len() {
        if mask.map_or(true, |m| m[i]) && best.map_or(true, |b| logits[i] > logits[b]) {
            best = Some(i);
        }
    }
    best.expect("an enabled action")
}

fn sample<R: Rng>(p: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &pi) in p.iter().enumerate() {
        if pi > 0.0 {
            acc += pi;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

impl DecisionRule for ActorCritic {
    fn decide(&self, env: &Env) -> usize {
        let mask = env.action_mask();
        argmax_enabled(&self.logits(&env.observation().features), Some(&mask))
    }

    fn name(&self) -> String {
        "ppo".into()
    }
}

/// Trained model as a [`Policy`].
#[derive(Debug, Clone)]
pub struct PpoPolicy {
    model: Arc<ActorCritic>,
    deterministic: bool,
    rng: ChaCha8Rng,
}

impl PpoPolicy {
    pub fn new(model: Arc<ActorCritic>, deterministic: bool, seed: u64) -> Self {
        Self {
            model,
            deterministic,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn model(&self) -> &Arc<ActorCritic> {
        &self.model
    }
}

impl Policy for PpoPolicy {
    fn act(&mut self, env: &Env) -> usize {
        let mask = env.action_mask();
        self.model
            .act(&env.observation().features, Some(&mask), self.deterministic, &mut self.rng)
            .expect("decision point has an enabled action")
    }

    fn name(&self) -> String {
        "ppo".into()
    }

    fn deterministic(&self) -> bool {
        self.deterministic
    }
}

/// One stored transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub obs: Vec<f64>,
    pub mask: Option<Vec<bool>>,
    pub action: usize,
    pub old_log_prob: f64,
    pub advantage: f64,
    pub ret: f64,
}

/// Loss terms of one minibatch.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossParts {
    pub total: f64,
    pub policy: f64,
    pub value: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
}

/// Loss of a minibatch and, when `grads` is given, its gradient
/// accumulated into `(actor, critic)`.
pub fn ppo_loss(
    model: &ActorCritic,
    batch: &[Sample],
    config: &PpoConfig,
    mut grads: Option<(&mut Mlp, &mut Mlp)>,
) -> LossParts {
    let b = batch.len() as f64;
    let eps = config.clip;
    let mut parts = LossParts::default();
    let mut actor_cache = Cache::default();
    let mut critic_cache = Cache::default();
    for s in batch {
        model.actor.forward_cached(&s.obs, &mut actor_cache);
        let p = masked_softmax(actor_cache.output(), s.mask.as_deref());
        let logp = p[s.action].ln();
        let ratio = (logp - s.old_log_prob).exp();
        let a = s.advantage;
        let surr1 = ratio * a;
        let clipped = ratio.clamp(1.0 - eps, 1.0 + eps);
        let surr2 = clipped * a;
        let entropy: f64 = -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>();

        model.critic.forward_cached(&s.obs, &mut critic_cache);
        let v = critic_cache.output()[0];
        let verr = v - s.ret;

        parts.policy -= surr1.min(surr2) / b;
        parts.value += verr * verr / b;
        parts.entropy += entropy / b;
        parts.approx_kl += (s.old_log_prob - logp) / b;
        if (ratio - 1.0).abs() > eps {
            parts.clip_fraction += 1.0 / b;
        }

        if let Some((ga, gc)) = grads.as_mut() {
            let unclipped = surr1 <= surr2 || (ratio >= 1.0 - eps && ratio <= 1.0 + eps);
            let g_logp = if unclipped { -ratio * a / b } else { 0.0 };
            let beta = config.entropy_coef / b;
            let grad_logits: Vec<f64> = (0..p.len())
                .map(|i| {
                    if p[i] == 0.0 {
                        return 0.0;
                    }
                    let onehot = if i == s.action { 1.0 } else { 0.0 };
                    g_logp * (onehot - p[i]) + beta * p[i] * (p[i].ln() + entropy)
                })
                .collect();
            model.actor.backward(&actor_cache, &grad_logits, ga);
            model
                .critic
                .backward(&critic_cache, &[2.0 * config.value_coef * verr / b], gc);
        }
    }
    parts.total = parts.policy + config.value_coef * parts.value - config.entropy_coef * parts.entropy;
    parts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateMetrics {
    pub update: usize,
    pub steps: u64,
    pub loss: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    /// Mean return of the episodes finished during this rollout (NaN if none).
    pub mean_reward: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub updates: Vec<UpdateMetrics>,
    /// Undiscounted return of each finished episode, in order.
    pub episode_rewards: Vec<f64>,
    /// Makespan of each episode that reached the end.
    pub episode_makespans: Vec<u64>,
    pub steps: u64,
}

/// Mean of the first and last tenth of a series.
pub fn decile_means(series: &[f64]) -> Option<(f64, f64)> {
    if series.len() < 10 {
        return None;
    }
    let k = series.len() / 10;
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    Some((mean(&series[..k]), mean(&series[series.len() - k..])))
}

fn clip_norm(g: &mut Mlp, max: Option<f64>) {
    if let Some(max) = max {
        let norm = g.sum_squares().sqrt();
        if norm > max {
            g.scale(max / norm);
        }
    }
}

/// Train on environments drawn from `make_env`, which is called once per
/// episode.
pub fn ppo_train(
    make_env: &mut dyn FnMut(&mut ChaCha8Rng) -> Result<Env, EnvError>,
    config: &PpoConfig,
    mut on_update: Option<&mut dyn FnMut(&UpdateMetrics)>,
) -> Result<(ActorCritic, TrainLog), PpoError> {
    config.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut env = make_env(&mut rng)?;
    let obs_len = env.observation().len();
    let mut model = ActorCritic::new(obs_len, env.n_actions(), config.hidden, config.seed ^ 0x5eed);
    let mut opt_actor = Optimizer::new(config.optimizer, config.learning_rate, model.actor.n_params());
    let mut opt_critic = Optimizer::new(config.optimizer, config.learning_rate, model.critic.n_params());
    let mut log = TrainLog::default();

    let mut obs = env.observation().features;
    let mut ep_return = 0.0;
    let mut ep_len = 0usize;
    let mut update = 0usize;

    while log.steps < config.total_steps {
        let n = config.rollout_len.min((config.total_steps - log.steps) as usize);
        let mut samples = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        let mut rewards = Vec::with_capacity(n);
        let mut ends = Vec::with_capacity(n);
        let mut boot = Vec::with_capacity(n);
        let mut finished = Vec::new();

        for _ in 0..n {
            let mask = if config.use_mask { Some(env.action_mask()) } else { None };
            let logits = model.logits(&obs);
            let p = masked_softmax(&logits, mask.as_deref());
            let action = sample(&p, &mut rng);
            let value = model.value(&obs);
            let (reward, terminal) = env.step_fast(action)?;
            ep_return += reward;
            ep_len += 1;
            log.steps += 1;
            let next_obs = env.observation().features;
            let truncated = !terminal && ep_len >= config.max_episode_steps;
            samples.push(Sample {
                obs: std::mem::replace(&mut obs, next_obs),
                mask,
                action,
                old_log_prob: p[action].ln(),
                advantage: 0.0,
                ret: 0.0,
            });
            values.push(value);
            rewards.push(reward);
            ends.push(terminal || truncated);
            boot.push(if truncated { model.value(&obs) } else { 0.0 });
            if terminal || truncated {
                finished.push(ep_return);
                log.episode_rewards.push(ep_return);
                if terminal {
                    log.episode_makespans.push(env.makespan());
                }
                ep_return = 0.0;
                ep_len = 0;
                env = make_env(&mut rng)?;
                model.check_env(&env)?;
                obs = env.observation().features;
            }
        }

        // Generalized advantage estimation.
        let last_value = model.value(&obs);
        let mut gae = 0.0;
        for t in (0..samples.len()).rev() {
            let next_v = if ends[t] {
                boot[t]
            } else if t + 1 < samples.len() {
                values[t + 1]
            } else {
                last_value
            };
            let delta = rewards[t] + config.gamma * next_v - values[t];
            let carry = if ends[t] { 0.0 } else { gae };
            gae = delta + config.gamma * config.gae_lambda * carry;
            samples[t].advantage = gae;
            samples[t].ret = gae + values[t];
        }

        let mut acc = LossParts::default();
        let mut batches = 0usize;
        let mut order: Vec<usize> = (0..samples.len()).collect();
        for _ in 0..config.epochs {
            shuffle(&mut order, &mut rng);
            for chunk in order.chunks(config.minibatch) {
                let mut batch: Vec<Sample> = chunk.iter().map(|&i| samples[i].clone()).collect();
                if config.normalize_advantages && batch.len() > 1 {
                    let mean = batch.iter().map(|s| s.advantage).sum::<f64>() / batch.len() as f64;
                    let var = batch.iter().map(|s| (s.advantage - mean).powi(2)).sum::<f64>() / batch.len() as f64;
                    let sd = var.sqrt() + 1e-8;
                    batch.iter_mut().for_each(|s| s.advantage = (s.advantage - mean) / sd);
                }
                let mut ga = model.actor.zeros_like();
                let mut gc = model.critic.zeros_like();
                let parts = ppo_loss(&model, &batch, config, Some((&mut ga, &mut gc)));
                if !parts.total.is_finite() {
                    return Err(PpoError::Diverged { update, what: "loss" });
                }
                clip_norm(&mut ga, config.max_grad_norm);
                clip_norm(&mut gc, config.max_grad_norm);
                opt_actor.step(&mut model.actor, &ga);
                opt_critic.step(&mut model.critic, &gc);
                if !model.actor.is_finite() || !model.critic.is_finite() {
                    return Err(PpoError::Diverged { update, what: "parameters" });
                }
                acc.total += parts.total;
                acc.policy += parts.policy;
                acc.value += parts.value;
                acc.entropy += parts.entropy;
                acc.approx_kl += parts.approx_kl;
                batches += 1;
            }
        }
        let k = batches.max(1) as f64;
        let metrics = UpdateMetrics {
            update,
            steps: log.steps,
            loss: acc.total / k,
            policy_loss: acc.policy / k,
            value_loss: acc.value / k,
            entropy: acc.entropy / k,
            approx_kl: acc.approx_kl / k,
            mean_reward: if finished.is_empty() {
                f64::NAN
            } else {
                finished.iter().sum::<f64>() / finished.len() as f64
            },
        };
        if let Some(cb) = on_update.as_mut() {
            cb(&metrics);
        }
        log.updates.push(metrics);
        update += 1;
    }
    Ok((model, log))
}

fn shuffle(v: &mut [usize], rng: &mut ChaCha8Rng) {
    use rand::seq::SliceRandom;
    v.shuffle(rng);
}

/// Versioned JSON checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub obs_len: usize,
    pub n_actions: usize,
    pub ppo: PpoConfig,
    pub env: EnvConfig,
    pub model: ActorCritic,
}

impl Checkpoint {
    pub const FORMAT: &'static str = "petri-fms-actor-critic";
    pub const VERSION: u32 = 1;

    pub fn new(model: ActorCritic, ppo: PpoConfig, env: EnvConfig) -> Self {
        Self {
            format: Self::FORMAT.into(),
            version: Self::VERSION,
            obs_len: model.obs_len(),
            n_actions: model.n_actions(),
            ppo,
            env,
            model,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, PpoError> {
        let c: Checkpoint = serde_json::from_str(text).map_err(|e| PpoError::Format(e.to_string()))?;
        if c.format != Self::FORMAT {
            return Err(PpoError::Format(format!("unexpected format tag {:?}", c.format)));
        }
        if c.version != Self::VERSION {
            return Err(PpoError::Format(format!("unsupported version {}", c.version)));
        }
        if c.model.obs_len() != c.obs_len || c.model.n_actions() != c.n_actions {
            return Err(PpoError::Format("recorded shapes disagree with the parameters".into()));
        }
        Ok(c)
    }

    pub fn save(&self, path: &Path) -> Result<(), PpoError> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, PpoError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests;
