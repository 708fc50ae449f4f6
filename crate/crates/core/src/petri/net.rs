use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, VecDeque};
use std::hash::{Hash, Hasher};

use thiserror::Error;

use super::token::{Color, ColorKey, Token};

pub type PlaceId = usize;
pub type TransitionId = usize;

/// Default bound on zero-delay firings within one clock instant.
pub const DEFAULT_LIVELOCK_BOUND: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("unknown transition id {0}")]
    UnknownTransition(TransitionId),
    #[error("unknown place id {0}")]
    UnknownPlace(PlaceId),
    #[error("transition `{name}` ({id}) is not enabled")]
    NotEnabled { id: TransitionId, name: String },
    #[error("transition `{name}` ({id}) is controlled and fires only on an external trigger")]
    NeedsTrigger { id: TransitionId, name: String },
    #[error("transition `{name}` ({id}) is not controllable")]
    NotControllable { id: TransitionId, name: String },
    #[error("malformed transition `{name}`: {reason}")]
    Malformed { name: String, reason: String },
    #[error("place `{name}` is full (capacity {capacity})")]
    PlaceFull { name: String, capacity: usize },
    #[error("livelock: more than {bound} zero-delay firings at t={clock}, last fired `{last}`")]
    Livelock { bound: u64, clock: u64, last: String },
    #[error("token {trace_id} in place {place} is not awaiting a delay")]
    NotAwaitingDelay { place: PlaceId, trace_id: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlaceRole {
    JobQueue,
    /// Holds one token while the job has no operation in flight.
    JobReady,
    /// Selected operation awaiting an AGV assignment.
    AgvRequest,
    AgvBuffer,
    AgvIdle,
    /// Operation whose AGV is travelling empty to the pickup point.
    AgvApproach,
    AgvTransport,
    AgvRelocation,
    Delivered,
    MachineBuffer,
    MachineIdle,
    MachineProcessing,
    Completed,
    ToolRequest,
    ToolTransporterBuffer,
    ToolTransporterIdle,
    ToolTransporterTransport,
    ToolStore,
    /// Tool sitting at a machine, reserved for one operation.
    ToolReady,
    ToolReturn,
    Done,
    Generic,
}

impl PlaceRole {
    pub fn single_occupancy(self) -> bool {
        matches!(
            self,
            PlaceRole::MachineIdle
                | PlaceRole::AgvIdle
                | PlaceRole::ToolTransporterIdle
                | PlaceRole::MachineProcessing
        )
    }
}

#[derive(Debug, Clone)]
pub struct Place {
    pub id: PlaceId,
    pub name: String,
    pub role: PlaceRole,
    pub capacity: Option<usize>,
    tokens: VecDeque<Token>,
}

impl Place {
    pub fn tokens(&self) -> &VecDeque<Token> {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn head(&self) -> Option<&Token> {
        self.tokens.front()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransitionKind {
    Controlled,
    Automatic,
    Timed,
    Colored,
}

/// Which value supplies the sojourn a timed transition waits for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DelaySource {
    ProcessTime,
    TransportTime,
    Fixed(u64),
    /// Supplied per token by the net's owner through [`CTPNet::assign_delay`].
    Assigned,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputArc {
    pub place: PlaceId,
    /// Fields set here must match the consumed token. Blank admits anything.
    pub filter: Color,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputToken {
    /// Copy of the token consumed on input arc `i`.
    Copy(usize),
    /// New token with the given color and zero times.
    Fresh(Color),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputArc {
    pub place: PlaceId,
    pub token: OutputToken,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Equal,
    NotEqual,
}

/// Binding constraint between the tokens taken from two input arcs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Join {
    pub left: usize,
    pub right: usize,
    pub key: ColorKey,
    pub relation: Relation,
}

impl Join {
    fn holds(&self, a: &Token, b: &Token) -> bool {
        let eq = a.color.get(self.key) == b.color.get(self.key);
        match self.relation {
            Relation::Equal => eq,
            Relation::NotEqual => !eq,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Timing {
    /// Input arc whose head token must have waited long enough.
    pub arc: usize,
    pub delay: DelaySource,
}

#[derive(Debug, Clone)]
pub struct Transition {
    pub id: TransitionId,
    pub name: String,
    pub kind: TransitionKind,
    pub inputs: Vec<InputArc>,
    pub outputs: Vec<OutputArc>,
    pub join: Option<Join>,
    pub timing: Option<Timing>,
}

impl Transition {
    pub fn upstream(&self) -> impl Iterator<Item = PlaceId> + '_ {
        self.inputs.iter().map(|a| a.place)
    }

    pub fn downstream(&self) -> impl Iterator<Item = PlaceId> + '_ {
        self.outputs.iter().map(|a| a.place)
    }

    pub fn is_colored(&self) -> bool {
        self.join.is_some() || self.inputs.iter().any(|a| !a.filter.is_blank())
    }
}

/// Builder for a transition, checked when added to a net.
#[derive(Debug, Clone)]
pub struct TransitionSpec {
    name: String,
    kind: TransitionKind,
    inputs: Vec<InputArc>,
    outputs: Vec<OutputArc>,
    join: Option<Join>,
    timing: Option<Timing>,
}

impl TransitionSpec {
    pub fn new(name: impl Into<String>, kind: TransitionKind) -> Self {
        Self {
            name: name.into(),
            kind,
            inputs: Vec::new(),
            outputs: Vec::new(),
            join: None,
            timing: None,
        }
    }

    pub fn input(self, place: PlaceId) -> Self {
        self.input_filtered(place, Color::BLANK)
    }

    pub fn input_filtered(mut self, place: PlaceId, filter: Color) -> Self {
        self.inputs.push(InputArc { place, filter });
        self
    }

    /// Deposit a copy of the token consumed on input arc `from`.
    pub fn output(mut self, place: PlaceId, from: usize) -> Self {
        self.outputs.push(OutputArc {
            place,
            token: OutputToken::Copy(from),
        });
        self
    }

    pub fn output_fresh(mut self, place: PlaceId, color: Color) -> Self {
        self.outputs.push(OutputArc {
            place,
            token: OutputToken::Fresh(color),
        });
        self
    }

    pub fn join(mut self, left: usize, right: usize, key: ColorKey, relation: Relation) -> Self {
        self.join = Some(Join {
            left,
            right,
            key,
            relation,
        });
        self
    }

    pub fn timed(mut self, arc: usize, delay: DelaySource) -> Self {
        self.timing = Some(Timing { arc, delay });
        self
    }
}

/// One executed firing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Firing {
    pub transition: TransitionId,
    pub at: u64,
    /// Consumed tokens, one per input arc in arc order.
    pub consumed: Vec<Token>,
    /// `(place, trace_id)` of each deposited token, in output arc order.
    pub produced: Vec<(PlaceId, u64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PendingDelay {
    pub place: PlaceId,
    pub trace_id: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Halt {
    /// At least one controlled transition is enabled.
    Decision,
    /// A token entered a place feeding an `Assigned` timed transition and
    /// needs its delay before time can move on.
    NeedsDelay(PendingDelay),
    /// Nothing can fire now or later.
    Terminal,
}

#[derive(Debug, Clone)]
pub struct Advance {
    pub elapsed: u64,
    pub fired: Vec<Firing>,
    pub halt: Halt,
}

/// Colored-timed Petri net with an integer event clock.
#[derive(Debug, Clone)]
pub struct CTPNet {
    places: Vec<Place>,
    transitions: Vec<Transition>,
    clock: u64,
    controllable: Vec<TransitionId>,
    consumers: Vec<Vec<TransitionId>>,
    producers: Vec<Vec<TransitionId>>,
    timed: Vec<TransitionId>,
    assigned_places: Vec<bool>,
    pending: VecDeque<PendingDelay>,
    next_trace_id: u64,
    livelock_bound: u64,
}

impl Default for CTPNet {
    fn default() -> Self {
        Self::new()
    }
}

impl CTPNet {
    pub fn new() -> Self {
        Self {
            places: Vec::new(),
            transitions: Vec::new(),
            clock: 0,
            controllable: Vec::new(),
            consumers: Vec::new(),
            producers: Vec::new(),
            timed: Vec::new(),
            assigned_places: Vec::new(),
            pending: VecDeque::new(),
            next_trace_id: 1,
            livelock_bound: DEFAULT_LIVELOCK_BOUND,
        }
    }

    pub fn set_livelock_bound(&mut self, bound: u64) {
        self.livelock_bound = bound;
    }

    pub fn add_place(&mut self, name: impl Into<String>, role: PlaceRole) -> PlaceId {
        let capacity = role.single_occupancy().then_some(1);
        self.add_place_with_capacity(name, role, capacity)
    }

    pub fn add_place_with_capacity(
        &mut self,
        name: impl Into<String>,
        role: PlaceRole,
        capacity: Option<usize>,
    ) -> PlaceId {
        let id = self.places.len();
        self.places.push(Place {
            id,
            name: name.into(),
            role,
            capacity,
            tokens: VecDeque::new(),
        });
        self.consumers.push(Vec::new());
        self.producers.push(Vec::new());
        self.assigned_places.push(false);
        id
    }

    pub fn add_transition(&mut self, spec: TransitionSpec) -> Result<TransitionId, NetError> {
        let malformed = |reason: &str| NetError::Malformed {
            name: spec.name.clone(),
            reason: reason.to_string(),
        };
        if spec.inputs.is_empty() {
            return Err(malformed("no upstream places"));
        }
        for arc in &spec.inputs {
            if arc.place >= self.places.len() {
                return Err(NetError::UnknownPlace(arc.place));
            }
        }
        for (i, a) in spec.inputs.iter().enumerate() {
            if spec.inputs[..i].iter().any(|b| b.place == a.place) {
                return Err(malformed("duplicate upstream place"));
            }
        }
        for arc in &spec.outputs {
            if arc.place >= self.places.len() {
                return Err(NetError::UnknownPlace(arc.place));
            }
            if let OutputToken::Copy(i) = arc.token {
                if i >= spec.inputs.len() {
                    return Err(malformed("output copies a missing input arc"));
                }
            }
        }
        if let Some(j) = spec.join {
            if j.left == j.right || j.left >= spec.inputs.len() || j.right >= spec.inputs.len() {
                return Err(malformed("join references invalid arcs"));
            }
        }
        match (spec.kind, spec.timing) {
            (TransitionKind::Timed, None) => return Err(malformed("timed transition without delay")),
            (TransitionKind::Timed, Some(t)) if t.arc >= spec.inputs.len() => {
                return Err(malformed("delay arc out of range"))
            }
            (TransitionKind::Timed, Some(_)) => {}
            (_, Some(_)) => return Err(malformed("only timed transitions carry a delay")),
            (_, None) => {}
        }

        let id = self.transitions.len();
        for arc in &spec.inputs {
            self.consumers[arc.place].push(id);
        }
        for arc in &spec.outputs {
            if !self.producers[arc.place].contains(&id) {
                self.producers[arc.place].push(id);
            }
        }
        match spec.kind {
            TransitionKind::Controlled => self.controllable.push(id),
            TransitionKind::Timed => {
                self.timed.push(id);
                let timing = spec.timing.expect("checked above");
                if timing.delay == DelaySource::Assigned {
                    self.assigned_places[spec.inputs[timing.arc].place] = true;
                }
            }
            _ => {}
        }
        self.transitions.push(Transition {
            id,
            name: spec.name,
            kind: spec.kind,
            inputs: spec.inputs,
            outputs: spec.outputs,
            join: spec.join,
            timing: spec.timing,
        });
        Ok(id)
    }

    /// Place a token into the initial (or current) marking. Returns its trace id.
    pub fn add_token(&mut self, place: PlaceId, mut token: Token) -> Result<u64, NetError> {
        let p = self.places.get(place).ok_or(NetError::UnknownPlace(place))?;
        if let Some(cap) = p.capacity {
            if p.tokens.len() >= cap {
                return Err(NetError::PlaceFull {
                    name: p.name.clone(),
                    capacity: cap,
                });
            }
        }
        token.trace_id = self.fresh_id();
        Ok(self.deposit(place, token))
    }

    fn fresh_id(&mut self) -> u64 {
        let id = self.next_trace_id;
        self.next_trace_id += 1;
        id
    }

    fn deposit(&mut self, place: PlaceId, mut token: Token) -> u64 {
        token.entered_at = self.clock;
        token.assigned_delay = None;
        let id = token.trace_id;
        if self.assigned_places[place] {
            self.pending.push_back(PendingDelay { place, trace_id: id });
        }
        self.places[place].tokens.push_back(token);
        id
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn place(&self, id: PlaceId) -> &Place {
        &self.places[id]
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, id: TransitionId) -> Result<&Transition, NetError> {
        self.transitions.get(id).ok_or(NetError::UnknownTransition(id))
    }

    pub fn controllable_ids(&self) -> &[TransitionId] {
        &self.controllable
    }

    pub fn marking(&self) -> Vec<usize> {
        self.places.iter().map(|p| p.tokens.len()).collect()
    }

    pub fn token_count(&self) -> usize {
        self.places.iter().map(|p| p.tokens.len()).sum()
    }

    pub fn pending_delays(&self) -> impl Iterator<Item = &PendingDelay> {
        self.pending.iter()
    }

    fn required_delay(timing: &Timing, token: &Token) -> Option<u64> {
        match timing.delay {
            DelaySource::ProcessTime => Some(token.process_time()),
            DelaySource::TransportTime => Some(token.transport_time()),
            DelaySource::Fixed(d) => Some(d),
            DelaySource::Assigned => token.assigned_delay,
        }
    }

    /// Token indices (one per input arc) satisfying filters, join and
    /// capacity. With `check_time` the delay arc must also have waited.
    fn binding(&self, t: &Transition, check_time: bool) -> Option<Vec<usize>> {
        let candidates = |arc: usize| -> Vec<usize> {
            let a = &t.inputs[arc];
            let place = &self.places[a.place];
            let mut idx = place
                .tokens
                .iter()
                .enumerate()
                .filter(|(_, tok)| a.filter.admits(&tok.color))
                .map(|(i, _)| i);
            if t.timing.map_or(false, |tm| tm.arc == arc) {
                // Timed arcs only ever look at the first admissible token.
                idx.next().into_iter().collect()
            } else {
                idx.collect()
            }
        };

        let mut chosen = vec![usize::MAX; t.inputs.len()];
        match t.join {
            Some(join) => {
                let left = candidates(join.left);
                let right = candidates(join.right);
                let places = (&self.places[t.inputs[join.left].place], &self.places[t.inputs[join.right].place]);
                let pair = left.iter().find_map(|&l| {
                    right
                        .iter()
                        .find(|&&r| join.holds(&places.0.tokens[l], &places.1.tokens[r]))
                        .map(|&r| (l, r))
                })?;
                chosen[join.left] = pair.0;
                chosen[join.right] = pair.1;
            }
            None => {}
        }
        for arc in 0..t.inputs.len() {
            if chosen[arc] == usize::MAX {
                chosen[arc] = *candidates(arc).first()?;
            }
        }

        if let Some(timing) = t.timing {
            let tok = &self.places[t.inputs[timing.arc].place].tokens[chosen[timing.arc]];
            let delay = Self::required_delay(&timing, tok)?;
            if check_time && tok.sojourn(self.clock) < delay {
                return None;
            }
        }

        // Single-occupancy and other bounded places downstream.
        for out in &t.outputs {
            let place = &self.places[out.place];
            if let Some(cap) = place.capacity {
                let consumed = t.inputs.iter().filter(|a| a.place == out.place).count();
                let added = t.outputs.iter().filter(|o| o.place == out.place).count();
                if place.tokens.len() - consumed + added > cap {
                    return None;
                }
            }
        }
        Some(chosen)
    }

    /// Guard function: true iff the transition could fire now (ignoring the
    /// external trigger required by controlled transitions).
    pub fn guard(&self, id: TransitionId) -> Result<bool, NetError> {
        let t = self.transition(id)?;
        Ok(self.binding(t, true).is_some())
    }

    /// Earliest clock at which a timed transition's delay is satisfied,
    /// assuming the marking does not change.
    pub fn ready_at(&self, id: TransitionId) -> Result<Option<u64>, NetError> {
        let t = self.transition(id)?;
        let Some(timing) = t.timing else {
            return Ok(None);
        };
        Ok(self.binding(t, false).and_then(|b| {
            let tok = &self.places[t.inputs[timing.arc].place].tokens[b[timing.arc]];
            Self::required_delay(&timing, tok).map(|d| tok.entered_at + d)
        }))
    }

    fn fire_bound(&mut self, id: TransitionId, binding: Vec<usize>) -> Firing {
        let t = &self.transitions[id];
        let inputs: Vec<PlaceId> = t.upstream().collect();
        let outputs = t.outputs.clone();
        let mut consumed = Vec::with_capacity(inputs.len());
        for (arc, &place) in inputs.iter().enumerate() {
            let tok = self.places[place]
                .tokens
                .remove(binding[arc])
                .expect("binding index valid");
            if self.assigned_places[place] {
                self.pending.retain(|p| p.trace_id != tok.trace_id);
            }
            consumed.push(tok);
        }
        let mut reused = vec![false; consumed.len()];
        let mut produced = Vec::with_capacity(outputs.len());
        for out in outputs {
            let token = match out.token {
                OutputToken::Copy(i) => {
                    let mut tok = consumed[i].clone();
                    if reused[i] {
                        tok.trace_id = self.fresh_id();
                    }
                    reused[i] = true;
                    tok
                }
                OutputToken::Fresh(color) => {
                    let mut tok = Token::marker(color);
                    tok.trace_id = self.fresh_id();
                    tok
                }
            };
            let tid = self.deposit(out.place, token);
            produced.push((out.place, tid));
        }
        Firing {
            transition: id,
            at: self.clock,
            consumed,
            produced,
        }
    }

    /// Fire a non-controlled transition whose guard holds.
    pub fn fire(&mut self, id: TransitionId) -> Result<Firing, NetError> {
        let t = self.transition(id)?;
        if t.kind == TransitionKind::Controlled {
            return Err(NetError::NeedsTrigger {
                id,
                name: t.name.clone(),
            });
        }
        self.fire_checked(id)
    }

    /// Fire a controlled transition: the external trigger.
    pub fn trigger(&mut self, id: TransitionId) -> Result<Firing, NetError> {
        let t = self.transition(id)?;
        if t.kind != TransitionKind::Controlled {
            return Err(NetError::NotControllable {
                id,
                name: t.name.clone(),
            });
        }
        self.fire_checked(id)
    }

    fn fire_checked(&mut self, id: TransitionId) -> Result<Firing, NetError> {
        let t = &self.transitions[id];
        match self.binding(t, true) {
            Some(b) => Ok(self.fire_bound(id, b)),
            None => Err(NetError::NotEnabled {
                id,
                name: t.name.clone(),
            }),
        }
    }

    /// Guard values over the controllable transitions, in their stable order.
    pub fn action_mask(&self) -> Vec<bool> {
        self.controllable
            .iter()
            .map(|&id| self.binding(&self.transitions[id], true).is_some())
            .collect()
    }

    /// Supply the delay of a token waiting in a place that feeds an
    /// `Assigned` timed transition.
    pub fn assign_delay(&mut self, place: PlaceId, trace_id: u64, delay: u64) -> Result<(), NetError> {
        let pos = self
            .pending
            .iter()
            .position(|p| p.place == place && p.trace_id == trace_id)
            .ok_or(NetError::NotAwaitingDelay { place, trace_id })?;
        self.pending.remove(pos);
        let tok = self.places[place]
            .tokens
            .iter_mut()
            .find(|t| t.trace_id == trace_id)
            .ok_or(NetError::NotAwaitingDelay { place, trace_id })?;
        tok.assigned_delay = Some(delay);
        Ok(())
    }

    fn next_ready_time(&self) -> Option<u64> {
        self.timed
            .iter()
            .filter_map(|&id| self.ready_at(id).ok().flatten())
            .filter(|&t| t > self.clock)
            .min()
    }

    /// Run the net until a decision is needed, a delay must be assigned, or
    /// nothing can ever fire again.
    ///
    /// At each instant every enabled automatic, colored or timed transition
    /// fires, always picking the lowest enabled id next. When the instant is
    /// exhausted the clock jumps to the earliest time a timed transition
    /// becomes ready.
    pub fn advance(&mut self) -> Result<Advance, NetError> {
        let start = self.clock;
        let mut fired = Vec::new();
        let mut work: BTreeSet<TransitionId> = self
            .transitions
            .iter()
            .filter(|t| t.kind != TransitionKind::Controlled)
            .map(|t| t.id)
            .collect();
        loop {
            let mut instant_firings = 0u64;
            while let Some(id) = work.pop_first() {
                let Some(binding) = self.binding(&self.transitions[id], true) else {
                    continue;
                };
                let firing = self.fire_bound(id, binding);
                instant_firings += 1;
                if instant_firings > self.livelock_bound {
                    return Err(NetError::Livelock {
                        bound: self.livelock_bound,
                        clock: self.clock,
                        last: self.transitions[id].name.clone(),
                    });
                }
                let t = &self.transitions[id];
                let automatic = |w: &TransitionId| self.transitions[*w].kind != TransitionKind::Controlled;
                for p in t.downstream() {
                    work.extend(self.consumers[p].iter().filter(|w| automatic(w)));
                }
                for p in t.upstream() {
                    work.extend(self.producers[p].iter().filter(|w| automatic(w)));
                }
                work.insert(id);
                fired.push(firing);
            }

            let halt = if let Some(&p) = self.pending.front() {
                Some(Halt::NeedsDelay(p))
            } else if self.action_mask().into_iter().any(|m| m) {
                Some(Halt::Decision)
            } else {
                None
            };
            if let Some(halt) = halt {
                return Ok(Advance {
                    elapsed: self.clock - start,
                    fired,
                    halt,
                });
            }
            match self.next_ready_time() {
                Some(t) => {
                    debug_assert!(t > self.clock);
                    self.clock = t;
                    work.extend(self.timed.iter().copied());
                }
                None => {
                    return Ok(Advance {
                        elapsed: self.clock - start,
                        fired,
                        halt: Halt::Terminal,
                    })
                }
            }
        }
    }

    /// No transition is enabled, none will become enabled by waiting, and
    /// no delay is outstanding.
    pub fn is_quiescent(&self) -> bool {
        self.pending.is_empty()
            && self
                .transitions
                .iter()
                .all(|t| self.binding(t, true).is_none())
            && self.next_ready_time().is_none()
    }

    /// Hash of clock, pending delays and full marking.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.clock.hash(&mut h);
        for p in &self.places {
            p.tokens.hash(&mut h);
        }
        self.pending.hash(&mut h);
        self.next_trace_id.hash(&mut h);
        h.finish()
    }
}
