//! Direct event simulation of the single-AGV transport cycle, written
//! independently of the Petri net. Exhaustive over dispatch orders, so it
//! gives the optimum for tiny instances.
//!
//! Cycle per operation: the job is dispatched to the AGV queue; the idle
//! AGV pops the queue head, travels empty to the pickup location, then
//! loaded to the machine. On unloading it moves to the next queued pickup,
//! stays put when nothing is left to assign, or otherwise makes the
//! worst-case relocation and forgets its position. A job's next operation
//! can be dispatched only once the previous one has finished.

use std::collections::VecDeque;

use petri_fms::instance::{machine_location, Instance};

#[derive(Clone, Copy, Debug)]
enum Agv {
    Idle,
    Empty { until: u64, op: (usize, usize) },
    Loaded { until: u64, op: (usize, usize) },
    Relocating { until: u64 },
}

#[derive(Clone, Debug)]
struct State {
    t: u64,
    next_op: Vec<usize>,
    ready: Vec<bool>,
    queue: VecDeque<(usize, usize)>,
    agv: Agv,
    pos: Option<usize>,
    machine_q: Vec<VecDeque<(usize, usize)>>,
    busy: Vec<Option<(u64, usize, usize)>>,
    unassigned: usize,
    last_event: u64,
}

struct Sim<'a> {
    inst: &'a Instance,
    max_d: u64,
}

impl Sim<'_> {
    fn pickup(&self, j: usize, o: usize) -> usize {
        if o == 0 {
            0
        } else {
            machine_location(self.inst.jobs[j][o - 1].machine)
        }
    }

    fn d(&self, a: usize, b: usize) -> u64 {
        self.inst.d_agv.get(a, b)
    }

    /// Fire everything due at `s.t` until nothing changes.
    fn settle(&self, s: &mut State) {
        loop {
            let mut changed = false;
            let t = s.t;
            match s.agv {
                Agv::Idle => {
                    if let Some((j, o)) = s.queue.pop_front() {
                        let p = self.pickup(j, o);
                        let d = s.pos.map_or(0, |x| self.d(x, p));
                        s.pos = Some(p);
                        s.agv = Agv::Empty { until: t + d, op: (j, o) };
                        changed = true;
                    }
                }
                Agv::Empty { until, op } if until == t => {
                    let target = machine_location(self.inst.jobs[op.0][op.1].machine);
                    let d = self.d(self.pickup(op.0, op.1), target);
                    s.pos = Some(target);
                    s.agv = Agv::Loaded { until: t + d, op };
                    changed = true;
                }
                Agv::Loaded { until, op } if until == t => {
                    let m = self.inst.jobs[op.0][op.1].machine;
                    s.machine_q[m].push_back(op);
                    let here = machine_location(m);
                    let d = if let Some(&(j, o)) = s.queue.front() {
                        let p = self.pickup(j, o);
                        s.pos = Some(p);
                        self.d(here, p)
                    } else if s.unassigned == 0 {
                        0
                    } else {
                        s.pos = None;
                        self.max_d
                    };
                    s.agv = Agv::Relocating { until: t + d };
                    changed = true;
                }
                Agv::Relocating { until } if until == t => {
                    s.agv = Agv::Idle;
                    changed = true;
                }
                _ => {}
            }
            for m in 0..s.busy.len() {
                if let Some((until, j, o)) = s.busy[m] {
                    if until == t {
                        s.busy[m] = None;
                        if o + 1 < self.inst.jobs[j].len() {
                            s.ready[j] = true;
                        }
                        changed = true;
                    }
                }
                if s.busy[m].is_none() {
                    if let Some((j, o)) = s.machine_q[m].pop_front() {
                        s.busy[m] = Some((t + self.inst.jobs[j][o].duration, j, o));
                        changed = true;
                    }
                }
            }
            if changed {
                s.last_event = t;
            } else {
                return;
            }
        }
    }

    fn next_time(&self, s: &State) -> Option<u64> {
        let agv = match s.agv {
            Agv::Idle => None,
            Agv::Empty { until, .. } | Agv::Loaded { until, .. } | Agv::Relocating { until } => Some(until),
        };
        agv.into_iter().chain(s.busy.iter().flatten().map(|b| b.0)).min()
    }

    fn search(&self, mut s: State, best: &mut u64) {
        self.settle(&mut s);
        let choices: Vec<usize> = (0..s.ready.len())
            .filter(|&j| s.ready[j] && s.next_op[j] < self.inst.jobs[j].len())
            .collect();
        if choices.is_empty() {
            match self.next_time(&s) {
                Some(t) => {
                    s.t = t;
                    self.search(s, best);
                }
                None => *best = (*best).min(s.last_event),
            }
            return;
        }
        for j in choices {
            let mut c = s.clone();
            c.ready[j] = false;
            c.queue.push_back((j, c.next_op[j]));
            c.next_op[j] += 1;
            c.unassigned -= 1;
            self.search(c, best);
        }
    }
}

/// Minimum makespan with one AGV starting at the station.
pub fn reference_optimum(inst: &Instance) -> u64 {
    let n = inst.n_jobs();
    let sim = Sim {
        inst,
        max_d: inst.d_agv.max(),
    };
    let start = State {
        t: 0,
        next_op: vec![0; n],
        ready: inst.jobs.iter().map(|j| !j.is_empty()).collect(),
        queue: VecDeque::new(),
        agv: Agv::Idle,
        pos: Some(0),
        machine_q: vec![VecDeque::new(); inst.n_machines],
        busy: vec![None; inst.n_machines],
        unassigned: inst.n_operations(),
        last_event: 0,
    };
    let mut best = u64::MAX;
    sim.search(start, &mut best);
    best
}
