use super::{Instance, InstanceError, TravelMatrix};

/// Embed `inst` in a larger shell. Extra jobs are empty; matrix entries
/// touching unused machines are set to the largest original entry (they
/// are never travelled).
pub fn pad_instance(inst: &Instance, target_jobs: usize, target_machines: usize) -> Result<Instance, InstanceError> {
    if target_jobs < inst.n_jobs() || target_machines < inst.n_machines {
        return Err(InstanceError::Argument(format!(
            "cannot shrink {}x{} into {}x{}",
            inst.n_jobs(),
            inst.n_machines,
            target_jobs,
            target_machines
        )));
    }
    let embed = |m: &TravelMatrix| {
        let size = target_machines + 1;
        let fill = m.max();
        let mut out = TravelMatrix::zeros(size);
        for u in 0..size {
            for v in 0..size {
                let d = if u == v {
                    0
                } else if u < m.size() && v < m.size() {
                    m.get(u, v)
                } else {
                    fill
                };
                out.set(u, v, d);
            }
        }
        out
    };
    let mut jobs = inst.jobs.clone();
    jobs.resize(target_jobs, Vec::new());
    Ok(Instance {
        name: inst.name.clone(),
        n_machines: target_machines,
        n_tools: inst.n_tools,
        n_agvs: inst.n_agvs,
        n_tool_transporters: inst.n_tool_transporters,
        jobs,
        d_agv: embed(&inst.d_agv),
        d_tt: inst.d_tt.as_ref().map(embed),
    })
}

/// Split the jobs of `inst` into `parts` consecutive batches of near-equal
/// size, each a standalone instance sharing the layout.
pub fn partition_instance(inst: &Instance, parts: usize) -> Result<Vec<Instance>, InstanceError> {
    if parts == 0 || parts > inst.n_jobs() {
        return Err(InstanceError::Argument(format!(
            "cannot split {} jobs into {parts} partitions",
            inst.n_jobs()
        )));
    }
    let n = inst.n_jobs();
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    for p in 0..parts {
        let len = n / parts + usize::from(p < n % parts);
        let mut part = inst.clone();
        part.name = format!("{}_p{}", inst.name, p + 1);
        part.jobs = inst.jobs[start..start + len].to_vec();
        out.push(part);
        start += len;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{generate_instance, SeedSet};
    use super::*;

    #[test]
    fn identity_pad() {
        let inst = generate_instance(4, 3, 2, &SeedSet::BENCHMARK).unwrap();
        assert_eq!(pad_instance(&inst, 4, 3).unwrap(), inst);
    }

    #[test]
    fn shell_pad() {
        let inst = generate_instance(15, 15, 15, &SeedSet::BENCHMARK).unwrap();
        let p = pad_instance(&inst, 100, 20).unwrap();
        assert_eq!(p.n_jobs(), 100);
        assert_eq!(p.jobs.iter().filter(|j| j.is_empty()).count(), 85);
        assert_eq!(p.d_agv.size(), 21);
        assert_eq!(p.d_agv.get(3, 7), inst.d_agv.get(3, 7));
        assert_eq!(p.d_agv.get(20, 1), inst.d_agv.max());
        assert_eq!(p.d_agv.get(20, 20), 0);
        p.validate().unwrap();
    }

    #[test]
    fn shrink_rejected() {
        let inst = generate_instance(4, 3, 2, &SeedSet::BENCHMARK).unwrap();
        assert!(pad_instance(&inst, 3, 3).is_err());
        assert!(pad_instance(&inst, 4, 2).is_err());
    }

    #[test]
    fn partitions_cover_jobs() {
        let inst = generate_instance(23, 3, 2, &SeedSet::BENCHMARK).unwrap();
        let parts = partition_instance(&inst, 10).unwrap();
        assert_eq!(parts.len(), 10);
        let joined: Vec<_> = parts.iter().flat_map(|p| p.jobs.clone()).collect();
        assert_eq!(joined, inst.jobs);
        assert!(partition_instance(&inst, 0).is_err());
    }
}
