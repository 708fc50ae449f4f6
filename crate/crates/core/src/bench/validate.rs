//! Independent replay of a schedule trace against the instance data.

use std::collections::HashMap;
use std::fmt;

use crate::fms::{Leg, ResourceKind, ScheduleTrace, TraceRecord};
use crate::instance::{machine_location, Instance, STATION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constraint {
    MachineExclusivity,
    AgvExclusivity,
    ToolTransporterExclusivity,
    ToolExclusivity,
    ToolPresence,
    Precedence,
    LegDuration,
    Completeness,
    Malformed,
}

impl Constraint {
    pub fn as_str(self) -> &'static str {
        match self {
            Constraint::MachineExclusivity => "machine exclusivity",
            Constraint::AgvExclusivity => "agv exclusivity",
            Constraint::ToolTransporterExclusivity => "tool transporter exclusivity",
            Constraint::ToolExclusivity => "tool exclusivity",
            Constraint::ToolPresence => "tool presence",
            Constraint::Precedence => "precedence",
            Constraint::LegDuration => "leg duration",
            Constraint::Completeness => "completeness",
            Constraint::Malformed => "malformed record",
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub constraint: Constraint,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.constraint, self.message)
    }
}

struct Checker<'a> {
    inst: &'a Instance,
    out: Vec<Violation>,
}

impl Checker<'_> {
    fn flag(&mut self, constraint: Constraint, message: String) {
        self.out.push(Violation { constraint, message });
    }
}

fn describe(r: &TraceRecord) -> String {
    let jo = match (r.job, r.op) {
        (Some(j), Some(o)) => format!(" job {j} op {o}"),
        _ => String::new(),
    };
    format!("{} {} {}{} [{}, {})", r.kind, r.id, r.leg, jo, r.start, r.end)
}

/// Check a trace. `tools` selects whether tool sharing was simulated.
/// Returns the makespan when no constraint is violated.
pub fn validate(trace: &ScheduleTrace, inst: &Instance, tools: bool) -> Result<u64, Vec<Violation>> {
    let mut c = Checker { inst, out: Vec::new() };
    let mut process: HashMap<(usize, usize), TraceRecord> = HashMap::new();
    let mut loaded: HashMap<(usize, usize), TraceRecord> = HashMap::new();
    let mut moves: HashMap<(usize, usize), TraceRecord> = HashMap::new();

    for r in trace.records() {
        if r.end < r.start {
            c.flag(Constraint::Malformed, format!("{} ends before it starts", describe(r)));
            continue;
        }
        let op = match (r.job, r.op) {
            (Some(j), Some(o)) if j < inst.n_jobs() && o < inst.jobs[j].len() => Some((j, o)),
            (None, None) if r.leg == Leg::Deadhead => None,
            _ => {
                c.flag(Constraint::Malformed, format!("{} names no valid operation", describe(r)));
                continue;
            }
        };
        let expected_kind = match r.leg {
            Leg::Process => ResourceKind::Machine,
            Leg::Loaded => ResourceKind::Agv,
            Leg::ToolMove => ResourceKind::ToolTransporter,
            Leg::Deadhead => r.kind,
        };
        if r.kind != expected_kind || (r.leg == Leg::Deadhead && r.kind == ResourceKind::Machine) {
            c.flag(Constraint::Malformed, format!("{} has the wrong resource kind", describe(r)));
            continue;
        }
        let target = match r.leg {
            Leg::Process => Some(&mut process),
            Leg::Loaded => Some(&mut loaded),
            Leg::ToolMove => Some(&mut moves),
            Leg::Deadhead => None,
        };
        if let (Some(map), Some(key)) = (target, op) {
            if map.insert(key, *r).is_some() {
                c.flag(
                    Constraint::Completeness,
                    format!("{} recorded more than once", describe(r)),
                );
            }
        }
        if r.leg == Leg::Process {
            let (j, o) = op.expect("checked");
            let want = inst.jobs[j][o];
            if r.id != want.machine {
                c.flag(
                    Constraint::Malformed,
                    format!("{} runs on machine {} but needs machine {}", describe(r), r.id, want.machine),
                );
            }
            if r.duration() != want.duration {
                c.flag(
                    Constraint::LegDuration,
                    format!("{}: expected {} actual {}", describe(r), want.duration, r.duration()),
                );
            }
        }
    }
    if !c.out.is_empty() {
        return Err(c.out);
    }

    for (j, ops) in inst.jobs.iter().enumerate() {
        for o in 0..ops.len() {
            if !process.contains_key(&(j, o)) {
                c.flag(Constraint::Completeness, format!("job {j} op {o} never processed"));
            }
            if !loaded.contains_key(&(j, o)) {
                c.flag(Constraint::Completeness, format!("job {j} op {o} never transported"));
            }
        }
    }

    exclusivity(&mut c, trace);
    precedence(&mut c, &process, &loaded);
    agv_legs(&mut c, trace);
    if tools {
        tool_legs(&mut c, trace, &process, &moves);
    } else if !moves.is_empty() {
        c.flag(Constraint::Malformed, "tool moves in a trace without tool sharing".into());
    }

    if c.out.is_empty() {
        Ok(trace.makespan())
    } else {
        Err(c.out)
    }
}

fn exclusivity(c: &mut Checker<'_>, trace: &ScheduleTrace) {
    let mut by_resource: HashMap<(ResourceKind, usize), Vec<TraceRecord>> = HashMap::new();
    for r in trace.records() {
        by_resource.entry((r.kind, r.id)).or_default().push(*r);
    }
    let mut keys: Vec<_> = by_resource.keys().copied().collect();
    keys.sort();
    for key in keys {
        let recs = by_resource.get_mut(&key).expect("key");
        recs.sort_by_key(|r| (r.start, r.end));
        for w in recs.windows(2) {
            if w[1].start < w[0].end {
                let constraint = match key.0 {
                    ResourceKind::Machine => Constraint::MachineExclusivity,
                    ResourceKind::Agv => Constraint::AgvExclusivity,
                    ResourceKind::ToolTransporter => Constraint::ToolTransporterExclusivity,
                };
                c.flag(constraint, format!("{} overlaps {}", describe(&w[1]), describe(&w[0])));
            }
        }
    }
}

fn precedence(
    c: &mut Checker<'_>,
    process: &HashMap<(usize, usize), TraceRecord>,
    loaded: &HashMap<(usize, usize), TraceRecord>,
) {
    for (j, ops) in c.inst.jobs.iter().enumerate() {
        for o in 0..ops.len() {
            let (Some(p), Some(l)) = (process.get(&(j, o)), loaded.get(&(j, o))) else {
                continue;
            };
            if p.start < l.end {
                c.flag(
                    Constraint::Precedence,
                    format!("job {j} op {o} starts at {} before delivery at {}", p.start, l.end),
                );
            }
            if o > 0 {
                if let Some(prev) = process.get(&(j, o - 1)) {
                    if l.start < prev.end {
                        c.flag(
                            Constraint::Precedence,
                            format!("job {j} op {o} picked up at {} before op {} ends at {}", l.start, o - 1, prev.end),
                        );
                    }
                    if p.start < prev.end {
                        c.flag(
                            Constraint::Precedence,
                            format!("job {j} op {o} starts at {} before op {} ends at {}", p.start, o - 1, prev.end),
                        );
                    }
                }
            }
        }
    }
}

fn agv_legs(c: &mut Checker<'_>, trace: &ScheduleTrace) {
    let inst = c.inst;
    let d = &inst.d_agv;
    let agvs: std::collections::BTreeSet<usize> = trace
        .records()
        .iter()
        .filter(|r| r.kind == ResourceKind::Agv)
        .map(|r| r.id)
        .collect();
    for k in agvs {
        // None once a blind relocation has made the position unknown.
        let mut pos = Some(STATION);
        for r in trace.for_resource(ResourceKind::Agv, k) {
            match (r.leg, r.job.zip(r.op)) {
                (Leg::Loaded, Some((j, o))) => {
                    let pickup = inst.pickup_location(j, o);
                    if let Some(p) = pos {
                        if p != pickup {
                            c.flag(
                                Constraint::LegDuration,
                                format!("{}: vehicle at location {p}, pickup is at {pickup}", describe(&r)),
                            );
                        }
                    }
                    let dest = machine_location(inst.jobs[j][o].machine);
                    let want = d.get(pickup, dest);
                    if r.duration() != want {
                        c.flag(
                            Constraint::LegDuration,
                            format!("{}: expected {want} actual {}", describe(&r), r.duration()),
                        );
                    }
                    pos = Some(dest);
                }
                (Leg::Deadhead, Some((j, o))) => {
                    let to = inst.pickup_location(j, o);
                    if let Some(p) = pos {
                        let want = d.get(p, to);
                        if r.duration() != want {
                            c.flag(
                                Constraint::LegDuration,
                                format!("{}: expected {want} actual {}", describe(&r), r.duration()),
                            );
                        }
                    }
                    pos = Some(to);
                }
                (Leg::Deadhead, None) => {
                    let want = d.max();
                    if r.duration() != want {
                        c.flag(
                            Constraint::LegDuration,
                            format!("{}: blind relocation expected {want} actual {}", describe(&r), r.duration()),
                        );
                    }
                    pos = None;
                }
                _ => c.flag(Constraint::Malformed, format!("{} is not an AGV leg", describe(&r))),
            }
        }
    }
}

fn tool_legs(
    c: &mut Checker<'_>,
    trace: &ScheduleTrace,
    process: &HashMap<(usize, usize), TraceRecord>,
    moves: &HashMap<(usize, usize), TraceRecord>,
) {
    let inst = c.inst;
    let Some(d) = inst.d_tt.as_ref() else {
        c.flag(Constraint::Malformed, "tool sharing without a D_TT matrix".into());
        return;
    };
    // Per tool: its moves and uses in time order.
    let mut events: Vec<Vec<(u64, u8, TraceRecord)>> = vec![Vec::new(); inst.n_tools];
    for (&(j, o), r) in process {
        match inst.jobs[j][o].tool {
            Some(t) => events[t].push((r.start, 1, *r)),
            None => c.flag(Constraint::Malformed, format!("job {j} op {o} has no tool")),
        }
    }
    for (&(j, o), r) in moves {
        if let Some(t) = inst.jobs[j][o].tool {
            events[t].push((r.start, 0, *r));
        }
    }
    let mut move_from: HashMap<(usize, usize), usize> = HashMap::new();
    for (t, ev) in events.iter_mut().enumerate() {
        ev.sort_by_key(|e| (e.0, e.1, e.2.end));
        let mut loc = STATION;
        let mut free_at = 0u64;
        for &(_, kind, r) in ev.iter() {
            let (j, o) = (r.job.expect("checked"), r.op.expect("checked"));
            let dest = machine_location(inst.jobs[j][o].machine);
            if r.start < free_at {
                c.flag(
                    Constraint::ToolExclusivity,
                    format!("tool {t} still in use until {free_at}: {}", describe(&r)),
                );
            }
            if kind == 0 {
                move_from.insert((j, o), loc);
                let want = d.get(loc, dest);
                if r.duration() != want {
                    c.flag(
                        Constraint::LegDuration,
                        format!("{}: tool {t} from {loc} expected {want} actual {}", describe(&r), r.duration()),
                    );
                }
                loc = dest;
                free_at = r.end;
            } else {
                if loc != dest {
                    c.flag(
                        Constraint::ToolPresence,
                        format!("{}: tool {t} is at location {loc}, not {dest}", describe(&r)),
                    );
                }
                free_at = r.end;
            }
        }
    }

    let tts: std::collections::BTreeSet<usize> = trace
        .records()
        .iter()
        .filter(|r| r.kind == ResourceKind::ToolTransporter)
        .map(|r| r.id)
        .collect();
    for k in tts {
        let recs = trace.for_resource(ResourceKind::ToolTransporter, k);
        let mut pos = STATION;
        let mut i = 0;
        while i < recs.len() {
            let r = recs[i];
            let Some(key) = r.job.zip(r.op) else {
                c.flag(Constraint::Malformed, format!("{} names no operation", describe(&r)));
                i += 1;
                continue;
            };
            let (empty, carry) = if r.leg == Leg::Deadhead {
                match recs.get(i + 1) {
                    Some(next) if next.leg == Leg::ToolMove && next.job.zip(next.op) == Some(key) => {
                        i += 2;
                        (r.duration(), *next)
                    }
                    _ => {
                        c.flag(Constraint::Malformed, format!("{} is not followed by its tool move", describe(&r)));
                        i += 1;
                        continue;
                    }
                }
            } else {
                i += 1;
                (0, r)
            };
            let from = move_from.get(&key).copied().unwrap_or(STATION);
            let want = d.get(pos, from);
            if empty != want {
                c.flag(
                    Constraint::LegDuration,
                    format!("{}: empty leg from {pos} to {from} expected {want} actual {empty}", describe(&carry)),
                );
            }
            pos = machine_location(c.inst.jobs[key.0][key.1].machine);
        }
    }
}
