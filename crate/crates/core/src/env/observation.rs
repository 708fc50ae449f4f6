use super::Env;
use crate::fms::Mode;

const MAX_DURATION: f64 = 99.0;

/// Fixed-length encoding of the environment state.
///
/// Layout: one entry per place (token count over shell machines, capped at
/// 1), then five features per job slot, three per machine, four per AGV,
/// two per tool (tool mode only) and two global entries. Empty job slots
/// of a padded shell encode as zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub marking: Vec<usize>,
    pub features: Vec<f64>,
    pub clock: u64,
}

/// Length of [`Observation::features`] for a shell.
pub fn observation_len(places: usize, jobs: usize, machines: usize, agvs: usize, tools: usize) -> usize {
    places + 5 * jobs + 3 * machines + 4 * agvs + 2 * tools + 2
}

impl Observation {
    pub fn encode(env: &Env) -> Self {
        let fms = env.fms();
        let net = fms.net();
        let inst = env.instance();
        let n = inst.n_jobs();
        let m = inst.n_machines;
        let mf = m as f64;
        let nf = n.max(1) as f64;
        let marking = net.marking();
        let tools = if fms.options().mode == Mode::AgvAndTools {
            inst.n_tools
        } else {
            0
        };
        let mut x = Vec::with_capacity(observation_len(marking.len(), n, m, fms.n_agvs(), tools));
        x.extend(marking.iter().map(|&c| (c as f64 / mf).min(1.0)));

        let mask = env.action_mask();
        for (j, ops) in inst.jobs.iter().enumerate() {
            let next = fms.dispatched_ops(j);
            let rest = &ops[next.min(ops.len())..];
            let work: u64 = rest.iter().map(|o| o.duration).sum();
            x.push(rest.len() as f64 / mf);
            x.push(work as f64 / (MAX_DURATION * mf));
            match rest.first() {
                Some(op) => {
                    x.push(op.duration as f64 / MAX_DURATION);
                    x.push((op.machine + 1) as f64 / mf);
                }
                None => x.extend([0.0, 0.0]),
            }
            x.push(if mask[j] { 1.0 } else { 0.0 });
        }
        let layout = fms.layout();
        for mm in 0..m {
            x.push(if fms.machine_is_idle(mm) { 1.0 } else { 0.0 });
            x.push(fms.machine_remaining(mm) as f64 / MAX_DURATION);
            x.push((net.place(layout.machine_buffer[mm]).len() as f64 / nf).min(1.0));
        }
        let clock = fms.clock();
        for k in 0..fms.n_agvs() {
            x.push(if fms.agv_is_idle(k) { 1.0 } else { 0.0 });
            x.push((fms.agv_buffer_len(k) as f64 / nf).min(1.0));
            x.push(fms.agv_position(k).map_or(1.0, |p| p as f64 / (mf + 1.0)));
            x.push(fms.agv_work(k) as f64 / clock.max(1) as f64);
        }
        for l in 0..tools {
            x.push(fms.tool_location(l) as f64 / (mf + 1.0));
            x.push(if net.place(layout.tool_store[l]).is_empty() { 0.0 } else { 1.0 });
        }
        x.push(clock as f64 / inst.total_duration().max(1) as f64);
        x.push(if fms.pending_request().is_some() { 1.0 } else { 0.0 });

        Self {
            marking,
            features: x,
            clock,
        }
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}
