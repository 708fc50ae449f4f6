//! Shared builders and checkers for the integration tests.
#![allow(dead_code)]

pub mod reference;

use petri_fms::env::{Env, EnvConfig};
use petri_fms::instance::{Instance, TravelMatrix};
use petri_fms::petri::{
    CTPNet, Color, ColorKey, DelaySource, Halt, NetError, PlaceId, PlaceRole, Relation, Token, TransitionId,
    TransitionKind, TransitionSpec,
};
use rand::seq::SliceRandom;
use rand::Rng;

/// Random net whose non-controlled transitions only move tokens towards
/// higher place ids, so zero-delay firing always terminates.
pub fn random_net<R: Rng>(rng: &mut R) -> CTPNet {
    let mut net = CTPNet::new();
    let n_places = rng.gen_range(3..=8);
    let places: Vec<PlaceId> = (0..n_places)
        .map(|i| {
            let cap = if rng.gen_bool(0.2) { Some(1) } else { None };
            net.add_place_with_capacity(format!("p{i}"), PlaceRole::Generic, cap)
        })
        .collect();
    for _ in 0..rng.gen_range(1..=8) {
        let p = places[rng.gen_range(0..n_places)];
        let color = Color::new(rng.gen_bool(0.7).then(|| rng.gen_range(0..3)), None, None);
        let tok = Token::new(color, rng.gen_range(0..6), rng.gen_range(0..6), 0);
        // Full single-occupancy places simply refuse the token.
        let _ = net.add_token(p, tok);
    }
    let wanted = rng.gen_range(2..=8);
    let mut added = 0;
    while added < wanted {
        let kind = *[
            TransitionKind::Controlled,
            TransitionKind::Automatic,
            TransitionKind::Timed,
            TransitionKind::Colored,
        ]
        .choose(rng)
        .unwrap();
        let n_in = rng.gen_range(1..=2);
        let forward = kind != TransitionKind::Controlled;
        let mut ins: Vec<usize> = (0..n_places).collect();
        ins.shuffle(rng);
        ins.truncate(n_in);
        let low = *ins.iter().max().unwrap();
        let targets: Vec<usize> = if forward {
            (low + 1..n_places).collect()
        } else {
            (0..n_places).collect()
        };
        if targets.is_empty() {
            continue;
        }
        let mut spec = TransitionSpec::new(format!("t{added}"), kind);
        for (a, &p) in ins.iter().enumerate() {
            if kind == TransitionKind::Colored && a == 0 {
                spec = spec.input_filtered(places[p], Color::job(rng.gen_range(0..3)));
            } else {
                spec = spec.input(places[p]);
            }
        }
        for _ in 0..rng.gen_range(1..=2) {
            let q = places[*targets.choose(rng).unwrap()];
            spec = if rng.gen_bool(0.8) {
                spec.output(q, rng.gen_range(0..n_in))
            } else {
                spec.output_fresh(q, Color::BLANK)
            };
        }
        if n_in == 2 && rng.gen_bool(0.3) {
            let rel = if rng.gen_bool(0.5) { Relation::Equal } else { Relation::NotEqual };
            spec = spec.join(0, 1, ColorKey::Job, rel);
        }
        if kind == TransitionKind::Timed {
            let delay = match rng.gen_range(0..3) {
                0 => DelaySource::ProcessTime,
                1 => DelaySource::TransportTime,
                _ => DelaySource::Fixed(rng.gen_range(0..5)),
            };
            spec = spec.timed(rng.gen_range(0..n_in), delay);
        }
        if net.add_transition(spec).is_ok() {
            added += 1;
        }
    }
    net
}

/// Incidence `post - pre` of one transition.
pub fn incidence(net: &CTPNet, id: TransitionId) -> Vec<i64> {
    let mut d = vec![0i64; net.places().len()];
    let t = net.transition(id).unwrap();
    for p in t.upstream() {
        d[p] -= 1;
    }
    for p in t.downstream() {
        d[p] += 1;
    }
    d
}

/// Violation counters over a driven run.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct NetCheck {
    pub firings: u64,
    pub conservation: u64,
    pub sojourn: u64,
    pub mask: u64,
    pub clock: u64,
}

impl NetCheck {
    pub fn violations(&self) -> u64 {
        self.conservation + self.sojourn + self.mask + self.clock
    }

    pub fn add(&mut self, o: NetCheck) {
        self.firings += o.firings;
        self.conservation += o.conservation;
        self.sojourn += o.sojourn;
        self.mask += o.mask;
        self.clock += o.clock;
    }
}

fn expect_marking(before: &[usize], net: &CTPNet, fired: &[TransitionId]) -> bool {
    let mut m: Vec<i64> = before.iter().map(|&x| x as i64).collect();
    for &t in fired {
        for (a, d) in m.iter_mut().zip(incidence(net, t)) {
            *a += d;
        }
    }
    m.iter().zip(net.marking()).all(|(a, b)| *a == b as i64)
}

fn check_mask(net: &CTPNet, c: &mut NetCheck) {
    let mask = net.action_mask();
    for (i, &id) in net.controllable_ids().iter().enumerate() {
        if net.guard(id).unwrap() != mask[i] {
            c.mask += 1;
        }
        let fired = net.clone().trigger(id).is_ok();
        if fired != mask[i] {
            c.mask += 1;
        }
    }
}

/// Drive `net` with random triggers for at most `max_steps` decisions,
/// checking token conservation, the timed sojourn bound, mask soundness
/// and completeness, and clock monotonicity.
pub fn drive_random_net<R: Rng>(net: &mut CTPNet, rng: &mut R, max_steps: usize) -> NetCheck {
    let mut c = NetCheck::default();
    let mut last_clock = net.clock();
    for _ in 0..max_steps {
        let before = net.marking();
        let adv = match net.advance() {
            Ok(a) => a,
            Err(NetError::Livelock { .. }) => break,
            Err(e) => panic!("unexpected net error {e}"),
        };
        let ids: Vec<TransitionId> = adv.fired.iter().map(|f| f.transition).collect();
        c.firings += ids.len() as u64;
        if !expect_marking(&before, net, &ids) {
            c.conservation += 1;
        }
        for f in &adv.fired {
            if f.at < last_clock {
                c.clock += 1;
            }
            last_clock = f.at;
            let t = net.transition(f.transition).unwrap();
            if let Some(timing) = t.timing {
                let tok = &f.consumed[timing.arc];
                let d = match timing.delay {
                    DelaySource::ProcessTime => tok.process_time(),
                    DelaySource::TransportTime => tok.transport_time(),
                    DelaySource::Fixed(d) => d,
                    DelaySource::Assigned => tok.assigned_delay().unwrap_or(0),
                };
                if tok.entered_at() + d > f.at {
                    c.sojourn += 1;
                }
            }
        }
        if net.clock() < last_clock {
            c.clock += 1;
        }
        last_clock = net.clock();
        match adv.halt {
            Halt::Terminal => {
                if net.action_mask().iter().any(|&m| m) {
                    c.mask += 1;
                }
                break;
            }
            Halt::NeedsDelay(_) => unreachable!("random nets have no assigned delays"),
            Halt::Decision => {
                check_mask(net, &mut c);
                let enabled: Vec<TransitionId> = net
                    .controllable_ids()
                    .iter()
                    .zip(net.action_mask())
                    .filter(|(_, m)| *m)
                    .map(|(id, _)| *id)
                    .collect();
                let id = *enabled.choose(rng).unwrap();
                let before = net.marking();
                net.trigger(id).unwrap();
                c.firings += 1;
                if !expect_marking(&before, net, &[id]) {
                    c.conservation += 1;
                }
            }
        }
    }
    c
}

/// Random rollout on an FMS environment with the same checks at the net
/// level. Mask checks clone the environment for every action.
pub fn drive_fms<R: Rng>(env: &mut Env, rng: &mut R) -> NetCheck {
    let mut c = NetCheck::default();
    let mut last_clock = env.clock();
    while !env.is_terminal() {
        let mask = env.action_mask();
        for (a, &m) in mask.iter().enumerate() {
            let ok = env.clone().step_fast(a).is_ok();
            if ok != m {
                c.mask += 1;
            }
        }
        let enabled: Vec<usize> = (0..mask.len()).filter(|&a| mask[a]).collect();
        let a = *enabled.choose(rng).expect("non-terminal env has an enabled action");
        let before = env.fms().net().marking();
        let info = env.step(a).unwrap().info;
        c.firings += info.fired.len() as u64;
        if !expect_marking(&before, env.fms().net(), &info.fired) {
            c.conservation += 1;
        }
        if env.clock() < last_clock {
            c.clock += 1;
        }
        last_clock = env.clock();
    }
    c
}

/// Random AGV-only instance small enough for exhaustive search.
pub fn micro_instance<R: Rng>(rng: &mut R, name: &str) -> Instance {
    let n_jobs = rng.gen_range(1..=2);
    let n_machines = rng.gen_range(1..=2);
    let jobs: Vec<Vec<(usize, u64)>> = (0..n_jobs)
        .map(|_| {
            (0..rng.gen_range(1..=2))
                .map(|_| (rng.gen_range(0..n_machines), rng.gen_range(1..=9)))
                .collect()
        })
        .collect();
    let size = n_machines + 1;
    let mut d = TravelMatrix::zeros(size);
    for u in 0..size {
        for v in u + 1..size {
            let x = rng.gen_range(1..=5);
            d.set(u, v, x);
            d.set(v, u, x);
        }
    }
    let refs: Vec<&[(usize, u64)]> = jobs.iter().map(|j| j.as_slice()).collect();
    Instance::agv_only(name, n_machines, &refs, d).unwrap()
}

pub fn agv_env(inst: &Instance, q: usize) -> Env {
    Env::new(
        inst,
        EnvConfig {
            n_agvs: Some(q),
            ..EnvConfig::default()
        },
    )
    .unwrap()
}
