//! Line-oriented text format.
//!
//! ```text
//! # name: sl00
//! n_jobs n_machines n_tools n_agvs n_tts
//! machine tool duration  machine tool duration ...   (one line per job)
//! D_AGV rows ((m+1) lines of m+1 integers)
//! D_TT rows  (omitted when n_tools = 0)
//! ```
//!
//! Indices are 0-based. `tool` is `-1` for AGV-only operations and a job
//! without operations is written as a single `-`. Lines starting with `#`
//! and blank lines are ignored, apart from the optional `# name:` directive.

use std::fmt::Write as _;

use super::{Instance, InstanceError, Operation, TravelMatrix};

fn parse_err(line: usize, message: impl Into<String>) -> InstanceError {
    InstanceError::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let mut name = String::from("unnamed");
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let trimmed = raw.trim();
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(n) = comment.trim().strip_prefix("name:") {
                name = n.trim().to_string();
            }
            continue;
        }
        if !trimmed.is_empty() {
            lines.push((i + 1, trimmed));
        }
    }
    let mut it = lines.into_iter();

    let (hline, header) = it.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let counts = parse_ints(hline, header)?;
    if counts.len() != 5 {
        return Err(parse_err(
            hline,
            format!("header needs 5 counts (jobs machines tools agvs tts), got {}", counts.len()),
        ));
    }
    if let Some(neg) = counts.iter().find(|&&c| c < 0) {
        return Err(parse_err(hline, format!("negative count {neg} in header")));
    }
    let [n_jobs, n_machines, n_tools, n_agvs, n_tts] = [0, 1, 2, 3, 4].map(|i| counts[i] as usize);
    if n_machines == 0 {
        return Err(parse_err(hline, "at least one machine is required"));
    }

    let mut jobs = Vec::with_capacity(n_jobs);
    for j in 0..n_jobs {
        let (ln, line) = it
            .next()
            .ok_or_else(|| parse_err(hline, format!("expected {n_jobs} job lines, found {j}")))?;
        if line == "-" {
            jobs.push(Vec::new());
            continue;
        }
        let vals = parse_ints(ln, line)?;
        if vals.len() % 3 != 0 {
            return Err(parse_err(ln, format!("job {j}: expected machine/tool/duration triples")));
        }
        let mut ops = Vec::with_capacity(vals.len() / 3);
        for (o, t) in vals.chunks(3).enumerate() {
            let (machine, tool, duration) = (t[0], t[1], t[2]);
            if machine < 0 || machine as usize >= n_machines {
                return Err(parse_err(ln, format!("job {j} op {o}: machine {machine} out of range")));
            }
            let tool = match tool {
                -1 if n_tools == 0 => None,
                -1 => return Err(parse_err(ln, format!("job {j} op {o}: tool required"))),
                t if t < 0 || t as usize >= n_tools => {
                    return Err(parse_err(ln, format!("job {j} op {o}: tool {t} out of range")))
                }
                t => Some(t as usize),
            };
            if duration < 1 {
                return Err(parse_err(ln, format!("job {j} op {o}: duration {duration} must be >= 1")));
            }
            ops.push(Operation {
                machine: machine as usize,
                tool,
                duration: duration as u64,
            });
        }
        jobs.push(ops);
    }

    let size = n_machines + 1;
    let mut read_matrix = |label: &str| -> Result<TravelMatrix, InstanceError> {
        let mut m = TravelMatrix::zeros(size);
        for u in 0..size {
            let (ln, line) = it
                .next()
                .ok_or_else(|| parse_err(hline, format!("{label}: expected {size} rows, found {u}")))?;
            let row = parse_ints(ln, line)?;
            if row.len() != size {
                return Err(parse_err(
                    ln,
                    format!("{label} row {u} has {} entries, expected {size}", row.len()),
                ));
            }
            for (v, &d) in row.iter().enumerate() {
                if d < 0 {
                    return Err(parse_err(ln, format!("{label}[{u}][{v}] is negative")));
                }
                if u == v && d != 0 {
                    return Err(parse_err(ln, format!("{label}[{u}][{u}] must be 0")));
                }
                m.set(u, v, d as u64);
            }
        }
        Ok(m)
    };
    let d_agv = read_matrix("D_AGV")?;
    let d_tt = if n_tools > 0 { Some(read_matrix("D_TT")?) } else { None };

    if let Some((ln, _)) = it.next() {
        return Err(parse_err(ln, "unexpected trailing data"));
    }

    Ok(Instance {
        name,
        n_machines,
        n_tools,
        n_agvs,
        n_tool_transporters: n_tts,
        jobs,
        d_agv,
        d_tt,
    })
}

fn parse_ints(line_no: usize, line: &str) -> Result<Vec<i64>, InstanceError> {
    line.split_whitespace()
        .map(|w| {
            w.parse::<i64>()
                .map_err(|_| parse_err(line_no, format!("not an integer: {w:?}")))
        })
        .collect()
}

pub fn write_instance(inst: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# name: {}", inst.name);
    let _ = writeln!(
        out,
        "{} {} {} {} {}",
        inst.n_jobs(),
        inst.n_machines,
        inst.n_tools,
        inst.n_agvs,
        inst.n_tool_transporters
    );
    for job in &inst.jobs {
        if job.is_empty() {
            out.push_str("-\n");
            continue;
        }
        let parts: Vec<String> = job
            .iter()
            .map(|op| {
                let tool = op.tool.map_or(-1, |t| t as i64);
                format!("{} {} {}", op.machine, tool, op.duration)
            })
            .collect();
        out.push_str(&parts.join("  "));
        out.push('\n');
    }
    let mut matrix = |m: &TravelMatrix| {
        for u in 0..m.size() {
            let row: Vec<String> = m.row(u).iter().map(u64::to_string).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    };
    matrix(&inst.d_agv);
    if inst.n_tools > 0 {
        if let Some(tt) = &inst.d_tt {
            matrix(tt);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "\
# name: tiny
# two jobs, AGV only
2 2 0 1 0
0 -1 3  1 -1 4
1 -1 2
0 5 6
5 0 7
6 7 0
";

    #[test]
    fn parses_agv_only() {
        let inst = parse_instance(SMALL).unwrap();
        assert_eq!(inst.name, "tiny");
        assert_eq!(inst.n_jobs(), 2);
        assert_eq!(inst.jobs[0][1], Operation { machine: 1, tool: None, duration: 4 });
        assert_eq!(inst.d_agv.get(2, 1), 7);
        assert!(inst.d_tt.is_none());
        assert_eq!(parse_instance(&write_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn short_matrix_row_names_row() {
        let bad = SMALL.replace("5 0 7", "5 0");
        match parse_instance(&bad) {
            Err(InstanceError::Parse { line, message }) => {
                assert_eq!(line, 7);
                assert!(message.contains("row 1"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_duration_rejected() {
        let bad = SMALL.replace("1 -1 2", "1 -1 -2");
        assert!(matches!(parse_instance(&bad), Err(InstanceError::Parse { line: 5, .. })));
    }

    #[test]
    fn machine_out_of_range() {
        let bad = SMALL.replace("1 -1 2", "2 -1 2");
        assert!(parse_instance(&bad).is_err());
    }

    #[test]
    fn bad_header() {
        assert!(parse_instance("2 2 0\n").is_err());
        assert!(parse_instance("").is_err());
    }

    #[test]
    fn empty_job_round_trip() {
        let text = SMALL.replace("1 -1 2", "-");
        let inst = parse_instance(&text).unwrap();
        assert!(inst.jobs[1].is_empty());
        assert_eq!(parse_instance(&write_instance(&inst)).unwrap(), inst);
    }
}
