use std::fmt;

/// Attribute triplet carried by a token: (job, machine, tool).
///
/// Unset fields are wildcards when the color is used as a filter, and
/// "not applicable" when it labels a token (vehicles, idle markers).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Color {
    pub job: Option<usize>,
    pub machine: Option<usize>,
    pub tool: Option<usize>,
}

impl Color {
    pub const BLANK: Color = Color {
        job: None,
        machine: None,
        tool: None,
    };

    pub fn new(job: Option<usize>, machine: Option<usize>, tool: Option<usize>) -> Self {
        Self { job, machine, tool }
    }

    pub fn job(job: usize) -> Self {
        Self {
            job: Some(job),
            ..Self::BLANK
        }
    }

    pub fn machine(machine: usize) -> Self {
        Self {
            machine: Some(machine),
            ..Self::BLANK
        }
    }

    pub fn tool(tool: usize) -> Self {
        Self {
            tool: Some(tool),
            ..Self::BLANK
        }
    }

    pub fn is_blank(&self) -> bool {
        self.job.is_none() && self.machine.is_none() && self.tool.is_none()
    }

    pub fn get(&self, key: ColorKey) -> Option<usize> {
        match key {
            ColorKey::Job => self.job,
            ColorKey::Machine => self.machine,
            ColorKey::Tool => self.tool,
        }
    }

    /// True when every field set in `self` (used as a filter) equals the
    /// corresponding field of `token`.
    pub fn admits(&self, token: &Color) -> bool {
        fn field(filter: Option<usize>, value: Option<usize>) -> bool {
            filter.map_or(true, |f| value == Some(f))
        }
        field(self.job, token.job) && field(self.machine, token.machine) && field(self.tool, token.tool)
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn part(v: Option<usize>) -> String {
            v.map_or_else(|| "_".to_string(), |x| x.to_string())
        }
        write!(f, "({},{},{})", part(self.job), part(self.machine), part(self.tool))
    }
}

/// Field selector used by joins between input arcs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColorKey {
    Job,
    Machine,
    Tool,
}

/// A unit flowing through the net.
///
/// `process_time` and `transport_time` are fixed at creation. `entered_at`
/// is rewritten by the net whenever the token is deposited into a place.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub color: Color,
    process_time: u64,
    transport_time: u64,
    pub(crate) entered_at: u64,
    order_index: usize,
    pub(crate) trace_id: u64,
    pub(crate) assigned_delay: Option<u64>,
}

impl Token {
    pub fn new(color: Color, process_time: u64, transport_time: u64, order_index: usize) -> Self {
        Self {
            color,
            process_time,
            transport_time,
            entered_at: 0,
            order_index,
            trace_id: 0,
            assigned_delay: None,
        }
    }

    /// Resource marker (idle machine, idle vehicle, ...).
    pub fn marker(color: Color) -> Self {
        Self::new(color, 0, 0, 0)
    }

    pub fn process_time(&self) -> u64 {
        self.process_time
    }

    pub fn transport_time(&self) -> u64 {
        self.transport_time
    }

    pub fn entered_at(&self) -> u64 {
        self.entered_at
    }

    pub fn order_index(&self) -> usize {
        self.order_index
    }

    pub fn trace_id(&self) -> u64 {
        self.trace_id
    }

    /// Delay assigned by the net's owner for an `Assigned` timed transition.
    pub fn assigned_delay(&self) -> Option<u64> {
        self.assigned_delay
    }

    pub fn sojourn(&self, clock: u64) -> u64 {
        clock.saturating_sub(self.entered_at)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_admits_wildcards() {
        let tok = Color::new(Some(2), Some(1), None);
        assert!(Color::BLANK.admits(&tok));
        assert!(Color::machine(1).admits(&tok));
        assert!(!Color::machine(3).admits(&tok));
        assert!(!Color::tool(0).admits(&tok));
    }

    #[test]
    fn sojourn_saturates() {
        let mut t = Token::marker(Color::BLANK);
        t.entered_at = 10;
        assert_eq!(t.sojourn(4), 0);
        assert_eq!(t.sojourn(15), 5);
    }
}
