mod common;

use common::{drive_fms, drive_random_net, random_net};
use petri_fms::bench::{run, validate, SolverSpec};
use petri_fms::env::{Env, EnvConfig, RewardMode};
use petri_fms::instance::{parse_instance, write_instance, Instance, SeedSet, Streams};
use petri_fms::solvers::{rollout, AgvRule, JobRule, RandomPolicy};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn seeds() -> impl Strategy<Value = SeedSet> {
    let s = 1u32..2_147_483_646;
    (s.clone(), s.clone(), s.clone(), s.clone(), s).prop_map(|(a, b, c, d, e)| SeedSet {
        machine_alloc: a,
        tool_alloc: b,
        proc_times: c,
        tt_times: d,
        agv_times: e,
    })
}

fn small_instance() -> impl Strategy<Value = Instance> {
    (seeds(), 1usize..6, 1usize..5, 1usize..4).prop_map(|(s, n, m, t)| {
        Streams::new(&s)
            .unwrap()
            .generate(format!("p{n}x{m}x{t}"), n, m, t)
            .unwrap()
    })
}

fn config(q: usize, s: usize, tools: bool, lookahead: bool) -> EnvConfig {
    EnvConfig {
        n_agvs: Some(q),
        n_tool_transporters: Some(s),
        tools,
        lookahead,
        ..EnvConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_nets_conserve_tokens_and_respect_delays(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = random_net(&mut rng);
        let c = drive_random_net(&mut net, &mut rng, 200);
        prop_assert_eq!(c.violations(), 0, "{:?}", c);
    }

    #[test]
    fn fms_nets_conserve_tokens_and_masks_are_exact(
        inst in small_instance(),
        q in 1usize..4,
        s in 1usize..3,
        tools in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let mut env = Env::new(&inst, config(q, s, tools, false)).unwrap();
        let c = drive_fms(&mut env, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(c.violations(), 0, "{:?}", c);
        prop_assert!(env.fms().is_complete());
    }

    #[test]
    fn random_rollouts_give_valid_traces(
        inst in small_instance(),
        q in 1usize..4,
        s in 1usize..3,
        tools in any::<bool>(),
        lookahead in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let cfg = config(q, s, tools, lookahead);
        let out = run(&inst, &SolverSpec::Random { seed }, &cfg).unwrap();
        prop_assert!(out.violations.is_empty(), "{:?}", out.violations);
        prop_assert_eq!(validate(&out.trace, &inst, tools), Ok(out.report.makespan));
        // no schedule beats the longest job's own processing time
        let longest = inst.jobs.iter().map(|j| j.iter().map(|o| o.duration).sum::<u64>()).max().unwrap_or(0);
        prop_assert!(out.report.makespan >= longest);
    }

    #[test]
    fn rollouts_are_deterministic(inst in small_instance(), seed in any::<u64>(), tools in any::<bool>()) {
        let cfg = config(2, 1, tools, true);
        let go = || {
            let mut env = Env::new(&inst, cfg.clone()).unwrap();
            let mut p = RandomPolicy::new(seed);
            let mut prints = Vec::new();
            while !env.is_terminal() {
                let a = petri_fms::solvers::Policy::act(&mut p, &env);
                env.step(a).unwrap();
                prints.push(env.fingerprint());
            }
            (prints, env.trace().clone())
        };
        let (a, ta) = go();
        let (b, tb) = go();
        prop_assert_eq!(a, b);
        prop_assert_eq!(ta, tb);
    }

    #[test]
    fn clock_never_runs_backwards(inst in small_instance(), seed in any::<u64>()) {
        let mut env = Env::new(&inst, config(2, 1, true, false)).unwrap();
        let mut p = RandomPolicy::new(seed);
        let mut last = env.clock();
        while !env.is_terminal() {
            let a = petri_fms::solvers::Policy::act(&mut p, &env);
            let r = env.step(a).unwrap();
            prop_assert_eq!(r.info.elapsed, env.clock() - last);
            prop_assert!(env.clock() >= last);
            last = env.clock();
        }
    }

    #[test]
    fn idle_reward_stays_in_unit_interval(inst in small_instance(), seed in any::<u64>(), shell in any::<bool>()) {
        let mut cfg = config(2, 1, false, false);
        if shell {
            cfg.shell = Some((inst.n_jobs() + 3, inst.n_machines + 2));
        }
        let mut env = Env::new(&inst, cfg).unwrap();
        let mut p = RandomPolicy::new(seed);
        while !env.is_terminal() {
            let a = petri_fms::solvers::Policy::act(&mut p, &env);
            let r = env.step(a).unwrap();
            prop_assert!((-1.0..=0.0).contains(&r.reward), "reward {}", r.reward);
        }
    }

    #[test]
    fn sparse_reward_is_zero_until_the_end(inst in small_instance(), seed in any::<u64>()) {
        let cfg = EnvConfig { reward_mode: RewardMode::SparseMakespan, ..config(2, 1, false, false) };
        let mut env = Env::new(&inst, cfg).unwrap();
        let mut p = RandomPolicy::new(seed);
        let mut rewards = Vec::new();
        while !env.is_terminal() {
            let a = petri_fms::solvers::Policy::act(&mut p, &env);
            rewards.push(env.step(a).unwrap().reward);
        }
        let (last, rest) = rewards.split_last().unwrap();
        prop_assert!(rest.iter().all(|r| *r == 0.0));
        let want = -(env.makespan() as f64) / inst.total_duration() as f64;
        prop_assert!((last - want).abs() < 1e-12);
    }

    #[test]
    fn parser_round_trip(inst in small_instance()) {
        let text = write_instance(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(write_instance(&back), text);
    }

    #[test]
    fn padding_preserves_heuristic_schedules(inst in small_instance(), extra_j in 0usize..5, extra_m in 0usize..4) {
        let spec = SolverSpec::heuristic(JobRule::Fifo, AgvRule::FirstAvailable);
        let plain = config(2, 1, false, true);
        let padded = EnvConfig { shell: Some((inst.n_jobs() + extra_j, inst.n_machines + extra_m)), ..plain.clone() };
        let a = run(&inst, &spec, &plain).unwrap();
        let b = run(&inst, &spec, &padded).unwrap();
        prop_assert_eq!(a.report.makespan, b.report.makespan);
        prop_assert_eq!(a.trace, b.trace);
    }
}

#[test]
fn shells_fix_the_interface_size() {
    let mut streams = Streams::new(&SeedSet::BENCHMARK).unwrap();
    let a = streams.generate("a", 3, 2, 2).unwrap();
    let b = streams.generate("b", 7, 5, 2).unwrap();
    let cfg = EnvConfig {
        shell: Some((10, 6)),
        ..config(2, 1, false, false)
    };
    let ea = Env::new(&a, cfg.clone()).unwrap();
    let eb = Env::new(&b, cfg).unwrap();
    assert_eq!(ea.n_actions(), eb.n_actions());
    assert_eq!(ea.observation().len(), eb.observation().len());
}

#[test]
fn every_golden_instance_terminates_under_random_play() {
    for (g, cfg) in [(0, config(10, 5, true, false)), (7, config(10, 5, false, false))] {
        let inst = &petri_fms::instance::benchmark_group(g).unwrap()[0];
        let mut env = Env::new(inst, cfg.clone()).unwrap();
        let m = rollout(&mut env, &mut RandomPolicy::new(1)).unwrap();
        assert_eq!(validate(env.trace(), inst, cfg.tools), Ok(m));
    }
}
