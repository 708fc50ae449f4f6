use super::*;
use crate::bench::validate;
use crate::instance::{generate_instance, Operation, SeedSet, TravelMatrix};

fn run_first_enabled(fms: &mut FmsNet) -> u64 {
    loop {
        match fms.advance().unwrap() {
            FmsHalt::Terminal => return fms.clock(),
            FmsHalt::Relocation { .. } => fms.assign_relocation(RelocationTarget::Fallback).unwrap(),
            FmsHalt::Decision => {
                let a = fms.action_mask().iter().position(|&b| b).unwrap();
                fms.trigger(a).unwrap();
            }
        }
    }
}

fn matrix(rows: &[&[u64]]) -> TravelMatrix {
    TravelMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
}

#[test]
fn five_jobs_four_machines_two_agvs() {
    let inst = generate_instance(5, 4, 3, &SeedSet::BENCHMARK).unwrap();
    let fms = FmsNet::build(&inst, &BuildOptions::agv_only(2)).unwrap();
    assert_eq!(fms.controls().len(), 7);
    assert_eq!(fms.action_mask().len(), 7);
    let tools = FmsNet::build(&inst, &BuildOptions::with_tools(2, 1)).unwrap();
    assert_eq!(tools.controls().len(), 7);
}

#[test]
fn empty_instance_is_terminal() {
    let inst = Instance::agv_only("empty", 2, &[], TravelMatrix::zeros(3)).unwrap();
    let mut fms = FmsNet::build(&inst, &BuildOptions::agv_only(1)).unwrap();
    assert_eq!(fms.advance().unwrap(), FmsHalt::Terminal);
    assert_eq!(fms.clock(), 0);
}

#[test]
fn single_operation_hand_trace() {
    // station -> machine 1 takes 4, processing takes 6
    let d = matrix(&[&[0, 3, 4], &[3, 0, 5], &[4, 5, 0]]);
    let inst = Instance::agv_only("one", 2, &[&[(1, 6)]], d).unwrap();
    let mut fms = FmsNet::build(&inst, &BuildOptions::agv_only(1)).unwrap();
    assert_eq!(fms.advance().unwrap(), FmsHalt::Decision);
    assert_eq!(fms.action_mask(), vec![true, false]);
    fms.trigger(0).unwrap();
    assert_eq!(fms.advance().unwrap(), FmsHalt::Decision);
    assert_eq!(fms.action_mask(), vec![false, true]);
    fms.trigger(1).unwrap();
    assert_eq!(fms.advance().unwrap(), FmsHalt::Terminal);
    assert_eq!(fms.clock(), 10);
    assert_eq!(fms.decisions(), 2);
    assert_eq!(validate(fms.trace(), &inst, false), Ok(10));
}

#[test]
fn single_operation_with_tool() {
    let d = matrix(&[&[0, 3, 4], &[3, 0, 5], &[4, 5, 0]]);
    let tt = matrix(&[&[0, 2, 9], &[2, 0, 1], &[9, 1, 0]]);
    let inst = Instance {
        name: "tool".into(),
        n_machines: 2,
        n_tools: 1,
        n_agvs: 1,
        n_tool_transporters: 1,
        jobs: vec![vec![Operation {
            machine: 1,
            tool: Some(0),
            duration: 6,
        }]],
        d_agv: d,
        d_tt: Some(tt),
    };
    let mut fms = FmsNet::build(&inst, &BuildOptions::with_tools(1, 1)).unwrap();
    // tool needs 9 from the magazine, the piece 4
    assert_eq!(run_first_enabled(&mut fms), 15);
    assert_eq!(validate(fms.trace(), &inst, true), Ok(15));
    assert_eq!(fms.tool_location(0), 2);
}

#[test]
fn tools_mode_requires_tools() {
    let inst = Instance::agv_only("x", 1, &[&[(0, 1)]], TravelMatrix::zeros(2)).unwrap();
    assert!(matches!(
        FmsNet::build(&inst, &BuildOptions::with_tools(1, 1)),
        Err(FmsError::Build(_))
    ));
    assert!(FmsNet::build(&inst, &BuildOptions::agv_only(0)).is_err());
}

#[test]
fn relocation_targets() {
    // job 0: machine 4 then machine 1; job 1 first op on machine 0
    let d = TravelMatrix::uniform(6, 3);
    let inst = Instance::agv_only("r", 5, &[&[(4, 2), (1, 2)], &[(0, 2)]], d).unwrap();
    assert_eq!(inst.pickup_location(0, 1), 5);
    assert_eq!(inst.pickup_location(1, 0), 0);
    let mut fms = FmsNet::build(&inst, &BuildOptions::agv_only(1)).unwrap();
    assert_eq!(fms.relocation_target(0), None);
    fms.advance().unwrap();
    fms.trigger(1).unwrap(); // job 1
    fms.advance().unwrap();
    assert_eq!(fms.pending_request(), Some((1, 0)));
}

#[test]
fn no_pipelining_within_a_job() {
    let d = TravelMatrix::uniform(3, 2);
    let inst = Instance::agv_only("p", 2, &[&[(0, 5), (1, 5)]], d).unwrap();
    let mut fms = FmsNet::build(&inst, &BuildOptions::agv_only(1)).unwrap();
    fms.advance().unwrap();
    fms.trigger(0).unwrap();
    fms.advance().unwrap();
    fms.trigger(1).unwrap();
    // the unload at t=2 leaves the AGV without work while op 1 waits
    assert_eq!(fms.advance().unwrap(), FmsHalt::Relocation { agv: 0 });
    assert_eq!(fms.clock(), 2);
    fms.assign_relocation(RelocationTarget::Fallback).unwrap();
    // next decision only after the first operation completed
    assert_eq!(fms.advance().unwrap(), FmsHalt::Decision);
    assert_eq!(fms.clock(), 7);
    assert_eq!(fms.finished_ops(0), 1);
}

#[test]
fn random_rollouts_validate_in_both_modes() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    for seed in 0..6u32 {
        let seeds = SeedSet {
            proc_times: 1000 + seed,
            ..SeedSet::BENCHMARK
        };
        let inst = generate_instance(4, 3, 2, &seeds).unwrap();
        for opts in [BuildOptions::agv_only(2), BuildOptions::with_tools(2, 1)] {
            let mut fms = FmsNet::build(&inst, &opts).unwrap();
            loop {
                match fms.advance().unwrap() {
                    FmsHalt::Terminal => break,
                    FmsHalt::Relocation { .. } => {
                        let t = if rng.gen_bool(0.5) {
                            RelocationTarget::Fallback
                        } else {
                            RelocationTarget::Predicted {
                                job: rng.gen_range(0..4),
                                op: rng.gen_range(0..3),
                            }
                        };
                        fms.assign_relocation(t).unwrap();
                    }
                    FmsHalt::Decision => {
                        let on: Vec<usize> = (0..fms.controls().len()).filter(|&i| fms.action_mask()[i]).collect();
                        fms.trigger(on[rng.gen_range(0..on.len())]).unwrap();
                    }
                }
            }
            let tools = opts.mode == Mode::AgvAndTools;
            assert_eq!(validate(fms.trace(), &inst, tools), Ok(fms.clock()));
        }
    }
}

#[test]
fn masked_trigger_is_refused() {
    let inst = generate_instance(3, 3, 2, &SeedSet::BENCHMARK).unwrap();
    let mut fms = FmsNet::build(&inst, &BuildOptions::agv_only(2)).unwrap();
    fms.advance().unwrap();
    assert!(matches!(fms.trigger(3), Err(FmsError::MaskedAction { .. })));
    assert!(matches!(fms.trigger(9), Err(FmsError::ActionOutOfRange { .. })));
}

#[test]
fn busy_time_is_loaded_plus_deadhead() {
    let inst = generate_instance(4, 3, 2, &SeedSet::BENCHMARK).unwrap();
    let mut fms = FmsNet::build(&inst, &BuildOptions::agv_only(2)).unwrap();
    run_first_enabled(&mut fms);
    for k in 0..2 {
        assert_eq!(fms.trace().busy_time(ResourceKind::Agv, k), fms.agv_work(k));
    }
}
