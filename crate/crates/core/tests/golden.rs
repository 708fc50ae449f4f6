use petri_fms::bench::sha256_hex;
use petri_fms::instance::{
    benchmark_group, benchmark_instances, lcg_next, parse_instance, write_instance, SeedSet, BENCHMARK_GROUPS,
};

const MANIFEST: &str = include_str!("data/benchmark.sha256");
const SL00: &str = include_str!("data/sl00.txt");

fn manifest() -> Vec<(&'static str, &'static str)> {
    MANIFEST
        .lines()
        .map(|l| l.split_once(' ').expect("name and digest"))
        .collect()
}

#[test]
fn all_benchmark_instances_match_frozen_checksums() {
    let all = benchmark_instances().unwrap();
    let m = manifest();
    assert_eq!(all.len(), 80);
    assert_eq!(m.len(), 80);
    for (inst, (name, digest)) in all.iter().zip(&m) {
        assert_eq!(&inst.name, name);
        assert_eq!(sha256_hex(write_instance(inst).as_bytes()), *digest, "{name}");
    }
}

#[test]
fn sl00_is_byte_identical() {
    let sl00 = &benchmark_group(0).unwrap()[0];
    assert_eq!(write_instance(sl00), SL00);
    assert_eq!(&parse_instance(SL00).unwrap(), sl00);
}

#[test]
fn first_duration_is_frozen() {
    let sl00 = &benchmark_group(0).unwrap()[0];
    assert_eq!(sl00.jobs[0][0].duration, 94);
}

#[test]
fn sl00_first_job_matches_taillard_ta01() {
    // Published first row of Taillard's 15x15 instance ta01 (machines 1-based).
    let durations = [94, 66, 10, 53, 26, 15, 65, 82, 10, 27, 93, 92, 96, 70, 83];
    let machines = [7, 13, 5, 8, 4, 3, 11, 12, 9, 15, 10, 14, 6, 1, 2];
    let job = &benchmark_group(0).unwrap()[0].jobs[0];
    assert_eq!(job.iter().map(|o| o.duration).collect::<Vec<_>>(), durations);
    assert_eq!(job.iter().map(|o| o.machine + 1).collect::<Vec<_>>(), machines);
}

#[test]
fn group_shapes() {
    let all = benchmark_instances().unwrap();
    for (g, group) in all.chunks(10).enumerate() {
        let spec = &BENCHMARK_GROUPS[g];
        for (k, inst) in group.iter().enumerate() {
            assert_eq!(inst.name, format!("sl{g}{k}"));
            assert_eq!((inst.n_jobs(), inst.n_machines, inst.n_tools), (spec.n_jobs, spec.n_machines, spec.n_tools));
            assert!(inst.jobs.iter().all(|j| j.len() == inst.n_machines));
            inst.validate().unwrap();
        }
    }
}

#[test]
fn round_trip_every_instance() {
    for inst in benchmark_instances().unwrap() {
        let text = write_instance(&inst);
        let back = parse_instance(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(write_instance(&back), text);
    }
}

#[test]
fn lcg_matches_wide_multiplication() {
    let s = SeedSet::BENCHMARK;
    for seed in [s.machine_alloc, s.tool_alloc, s.proc_times, s.tt_times, s.agv_times] {
        let mut x = seed;
        for _ in 0..10_000 {
            let want = ((x as u64 * 16_807) % 2_147_483_647) as u32;
            x = lcg_next(x).unwrap();
            assert_eq!(x, want);
        }
    }
}
