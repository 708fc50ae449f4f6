use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ResourceKind {
    Machine,
    Agv,
    ToolTransporter,
}

impl ResourceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ResourceKind::Machine => "machine",
            ResourceKind::Agv => "agv",
            ResourceKind::ToolTransporter => "tool_transporter",
        }
    }
}

impl fmt::Display for ResourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ResourceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "machine" => Ok(ResourceKind::Machine),
            "agv" => Ok(ResourceKind::Agv),
            "tool_transporter" => Ok(ResourceKind::ToolTransporter),
            other => Err(format!("unknown resource kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Leg {
    Process,
    Loaded,
    Deadhead,
    ToolMove,
}

impl Leg {
    pub fn as_str(self) -> &'static str {
        match self {
            Leg::Process => "process",
            Leg::Loaded => "loaded",
            Leg::Deadhead => "deadhead",
            Leg::ToolMove => "tool_move",
        }
    }
}

impl fmt::Display for Leg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Leg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "process" => Ok(Leg::Process),
            "loaded" => Ok(Leg::Loaded),
            "deadhead" => Ok(Leg::Deadhead),
            "tool_move" => Ok(Leg::ToolMove),
            other => Err(format!("unknown leg {other:?}")),
        }
    }
}

/// One timestamped allocation of a resource.
///
/// Deadhead records name the operation the vehicle is heading for. A
/// deadhead without job/op is a blind relocation of `max(D_AGV)` after
/// which the vehicle position is unknown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TraceRecord {
    pub kind: ResourceKind,
    pub id: usize,
    pub job: Option<usize>,
    pub op: Option<usize>,
    pub start: u64,
    pub end: u64,
    pub leg: Leg,
}

impl TraceRecord {
    pub fn duration(&self) -> u64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ScheduleTrace {
    records: Vec<TraceRecord>,
}

impl ScheduleTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records(records: Vec<TraceRecord>) -> Self {
        Self { records }
    }

    pub fn push(&mut self, record: TraceRecord) {
        debug_assert!(record.end >= record.start);
        self.records.push(record);
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn records_mut(&mut self) -> &mut Vec<TraceRecord> {
        &mut self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Latest end over all records, 0 for an empty trace.
    pub fn makespan(&self) -> u64 {
        self.records.iter().map(|r| r.end).max().unwrap_or(0)
    }

    /// Records of one resource sorted by start time.
    pub fn for_resource(&self, kind: ResourceKind, id: usize) -> Vec<TraceRecord> {
        let mut v: Vec<TraceRecord> = self
            .records
            .iter()
            .filter(|r| r.kind == kind && r.id == id)
            .copied()
            .collect();
        v.sort_by_key(|r| (r.start, r.end));
        v
    }

    /// Total busy time of one resource.
    pub fn busy_time(&self, kind: ResourceKind, id: usize) -> u64 {
        self.records
            .iter()
            .filter(|r| r.kind == kind && r.id == id)
            .map(TraceRecord::duration)
            .sum()
    }
}
