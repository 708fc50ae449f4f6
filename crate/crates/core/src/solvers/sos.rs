//! Symbiotic organisms search over random-key schedules.
//!
//! An organism holds one job key and one AGV key per operation. At a job
//! decision the enabled job whose next operation has the smallest job key
//! is chosen; at an AGV decision the operation waiting for transport picks
//! AGV `floor(key * q)`.

use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::first_enabled;
use crate::env::{Env, EnvError};
use crate::fms::{Control, ScheduleTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SosConfig {
    pub pop_size: usize,
    /// Wall-clock budget in seconds; `None` for no time limit.
    pub time_budget_s: Option<f64>,
    /// Maximum fitness evaluations; `None` for no limit.
    pub max_evaluations: Option<u64>,
    pub rng_seed: u64,
}

impl Default for SosConfig {
    fn default() -> Self {
        Self {
            pop_size: 30,
            time_budget_s: Some(600.0),
            max_evaluations: None,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Organism {
    pub keys: Vec<f64>,
    pub fitness: u64,
}

#[derive(Debug, Clone)]
pub struct SosResult {
    pub best: Organism,
    pub makespan: u64,
    pub trace: ScheduleTrace,
    pub evaluations: u64,
    /// `(evaluations, best makespan)` after each improvement.
    pub history: Vec<(u64, u64)>,
    pub elapsed: Duration,
}

struct Decoder {
    base: Env,
    /// Offset of each job's first operation in the key vector.
    offsets: Vec<usize>,
    n_ops: usize,
}

impl Decoder {
    fn new(env: &Env) -> Self {
        let mut offsets = Vec::with_capacity(env.instance().n_jobs());
        let mut acc = 0;
        for job in &env.instance().jobs {
            offsets.push(acc);
            acc += job.len();
        }
        Self {
            base: env.clone(),
            offsets,
            n_ops: acc,
        }
    }

    fn dims(&self) -> usize {
        2 * self.n_ops
    }

    fn run(&self, keys: &[f64]) -> Result<Env, EnvError> {
        let mut env = self.base.clone();
        let q = env.fms().n_agvs();
        while !env.is_terminal() {
            let mask = env.action_mask();
            let controls = env.controls();
            let mut job_choice: Option<(f64, usize)> = None;
            let mut agv_pending = false;
            for (i, &on) in mask.iter().enumerate() {
                if !on {
                    continue;
                }
                match controls[i] {
                    Control::Job(j) => {
                        let key = keys[self.offsets[j] + env.fms().dispatched_ops(j)];
                        if job_choice.map_or(true, |(k, _)| key < k) {
                            job_choice = Some((key, i));
                        }
                    }
                    Control::Agv(_) => agv_pending = true,
                    Control::ToolDispatch { .. } => {}
                }
            }
            let action = if agv_pending {
                let (j, o) = env.fms().pending_request().expect("request waiting");
                let key = keys[self.n_ops + self.offsets[j] + o];
                let k = ((key * q as f64) as usize).min(q - 1);
                controls
                    .iter()
                    .position(|c| *c == Control::Agv(k))
                    .expect("AGV action")
            } else if let Some((_, i)) = job_choice {
                i
            } else {
                first_enabled(&mask).expect("decision point has an enabled action")
            };
            env.step_fast(action)?;
        }
        Ok(env)
    }

    fn fitness(&self, keys: &[f64]) -> Result<u64, EnvError> {
        Ok(self.run(keys)?.makespan())
    }
}

struct Budget {
    start: Instant,
    time: Option<Duration>,
    evals: Option<u64>,
    used: u64,
}

impl Budget {
    fn exhausted(&self) -> bool {
        self.evals.map_or(false, |e| self.used >= e) || self.time.map_or(false, |t| self.start.elapsed() >= t)
    }
}

/// Search for a short schedule. With only an evaluation budget the result
/// is fully determined by `rng_seed`.
pub fn sos_optimize(env: &Env, config: &SosConfig) -> Result<SosResult, EnvError> {
    if config.pop_size < 3 {
        return Err(EnvError::Config("SOS needs a population of at least 3".into()));
    }
    if config.time_budget_s.is_none() && config.max_evaluations.is_none() {
        return Err(EnvError::Config("SOS needs a time or evaluation budget".into()));
    }
    let decoder = Decoder::new(env);
    let dims = decoder.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut budget = Budget {
        start: Instant::now(),
        time: config.time_budget_s.map(Duration::from_secs_f64),
        evals: config.max_evaluations,
        used: 0,
    };
    let mut history = Vec::new();

    let eval = |keys: &[f64], budget: &mut Budget| -> Result<u64, EnvError> {
        budget.used += 1;
        decoder.fitness(keys)
    };

    let mut pop: Vec<Organism> = Vec::with_capacity(config.pop_size);
    for _ in 0..config.pop_size {
        let keys: Vec<f64> = (0..dims).map(|_| rng.gen::<f64>()).collect();
        let fitness = eval(&keys, &mut budget)?;
        pop.push(Organism { keys, fitness });
        if budget.exhausted() && !pop.is_empty() {
            break;
        }
    }
    let best_of = |pop: &[Organism]| -> usize {
        (0..pop.len()).min_by_key(|&i| (pop[i].fitness, i)).expect("non-empty")
    };
    let mut best = pop[best_of(&pop)].clone();
    history.push((budget.used, best.fitness));

    let n = pop.len();
    let other = |rng: &mut ChaCha8Rng, i: usize| -> usize {
        if n < 2 {
            return i;
        }
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        j
    };
    let clamp = |v: f64| v.clamp(0.0, 1.0);

    'outer: while !budget.exhausted() && n >= 2 {
        for i in 0..n {
            // Mutualism
            let j = other(&mut rng, i);
            let bf1 = f64::from(rng.gen_range(1..=2u8));
            let bf2 = f64::from(rng.gen_range(1..=2u8));
            let mut xi = pop[i].keys.clone();
            let mut xj = pop[j].keys.clone();
            for d in 0..dims {
                let mutual = 0.5 * (pop[i].keys[d] + pop[j].keys[d]);
                xi[d] = clamp(xi[d] + rng.gen::<f64>() * (best.keys[d] - mutual * bf1));
                xj[d] = clamp(xj[d] + rng.gen::<f64>() * (best.keys[d] - mutual * bf2));
            }
            for (idx, cand) in [(i, xi), (j, xj)] {
                if budget.exhausted() {
                    break 'outer;
                }
                let f = eval(&cand, &mut budget)?;
                if f < pop[idx].fitness {
                    pop[idx] = Organism { keys: cand, fitness: f };
                }
            }
            track(&pop, &mut best, &mut history, budget.used);

            // Commensalism
            let j = other(&mut rng, i);
            let cand: Vec<f64> = (0..dims)
                .map(|d| clamp(pop[i].keys[d] + rng.gen_range(-1.0..=1.0) * (best.keys[d] - pop[j].keys[d])))
                .collect();
            if budget.exhausted() {
                break 'outer;
            }
            let f = eval(&cand, &mut budget)?;
            if f < pop[i].fitness {
                pop[i] = Organism { keys: cand, fitness: f };
            }
            track(&pop, &mut best, &mut history, budget.used);

            // Parasitism
            let j = other(&mut rng, i);
            let mut parasite = pop[i].keys.clone();
            let changes = rng.gen_range(1..=dims.max(1));
            for _ in 0..changes {
                let d = rng.gen_range(0..dims.max(1));
                if d < dims {
                    parasite[d] = rng.gen::<f64>();
                }
            }
            if budget.exhausted() {
                break 'outer;
            }
            let f = eval(&parasite, &mut budget)?;
            if f < pop[j].fitness {
                pop[j] = Organism {
                    keys: parasite,
                    fitness: f,
                };
            }
            track(&pop, &mut best, &mut history, budget.used);
        }
    }
    track(&pop, &mut best, &mut history, budget.used);

    let final_env = decoder.run(&best.keys)?;
    Ok(SosResult {
        makespan: best.fitness,
        trace: final_env.trace().clone(),
        best,
        evaluations: budget.used,
        history,
        elapsed: budget.start.elapsed(),
    })
}

fn track(pop: &[Organism], best: &mut Organism, history: &mut Vec<(u64, u64)>, evals: u64) {
    if let Some(o) = pop.iter().min_by_key(|o| o.fitness) {
        if o.fitness < best.fitness {
            *best = o.clone();
            history.push((evals, best.fitness));
        }
    }
}

/// Makespan an organism's keys decode to on `env`.
pub fn decode_keys(env: &Env, keys: &[f64]) -> Result<u64, EnvError> {
    Decoder::new(env).fitness(keys)
}
