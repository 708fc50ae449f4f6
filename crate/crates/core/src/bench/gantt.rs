//! Gantt data as comma-separated rows: `kind,id,job,op,start,end,leg`.
//! `job` and `op` are empty for blind relocations.

use std::fmt::Write as _;

use crate::fms::{ScheduleTrace, TraceRecord};

pub const GANTT_HEADER: &str = "kind,id,job,op,start,end,leg";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("gantt line {line}: {message}")]
pub struct GanttError {
    pub line: usize,
    pub message: String,
}

/// Records sorted by resource then start time.
pub fn export_gantt(trace: &ScheduleTrace) -> String {
    let mut recs = trace.records().to_vec();
    recs.sort_by_key(|r| (r.kind, r.id, r.start, r.end, r.leg));
    let mut out = String::with_capacity(32 * (recs.len() + 1));
    out.push_str(GANTT_HEADER);
    out.push('\n');
    let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in recs {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.kind,
            r.id,
            opt(r.job),
            opt(r.op),
            r.start,
            r.end,
            r.leg
        );
    }
    out
}

pub fn parse_gantt(text: &str) -> Result<ScheduleTrace, GanttError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == GANTT_HEADER => {}
        _ => {
            return Err(GanttError {
                line: 1,
                message: format!("expected header {GANTT_HEADER:?}"),
            })
        }
    }
    let mut records = Vec::new();
    for (i, line) in lines {
        let ln = i + 1;
        let err = |message: String| GanttError { line: ln, message };
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 7 {
            return Err(err(format!("expected 7 fields, got {}", f.len())));
        }
        let num = |s: &str, what: &str| -> Result<u64, GanttError> {
            s.parse::<u64>().map_err(|_| err(format!("bad {what} {s:?}")))
        };
        let opt = |s: &str, what: &str| -> Result<Option<usize>, GanttError> {
            if s.is_empty() {
                Ok(None)
            } else {
                num(s, what).map(|v| Some(v as usize))
            }
        };
        records.push(TraceRecord {
            kind: f[0].parse().map_err(err)?,
            id: num(f[1], "id")? as usize,
            job: opt(f[2], "job")?,
            op: opt(f[3], "op")?,
            start: num(f[4], "start")?,
            end: num(f[5], "end")?,
            leg: f[6].parse().map_err(err)?,
        });
    }
    Ok(ScheduleTrace::from_records(records))
}
