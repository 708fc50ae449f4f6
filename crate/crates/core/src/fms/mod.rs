//! The manufacturing-system net: jobs, AGV, machine and tool-transport
//! blocks built on [`CTPNet`], plus the bookkeeping (vehicle positions,
//! tool locations, schedule trace) that the net alone does not carry.

mod trace;

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use thiserror::Error;

use crate::instance::{machine_location, Instance, STATION};
use crate::petri::{
    CTPNet, Color, ColorKey, DelaySource, Firing, Halt, NetError, PendingDelay, PlaceId, PlaceRole, Relation, Token,
    TransitionId, TransitionKind, TransitionSpec,
};

pub use trace::{Leg, ResourceKind, ScheduleTrace, TraceRecord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FmsError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("cannot build net: {0}")]
    Build(String),
    #[error("action {action} out of range (mask length {len})")]
    ActionOutOfRange { action: usize, len: usize },
    #[error("action {action} ({name}) is masked")]
    MaskedAction { action: usize, name: String },
    #[error("net stalled at t={clock} with {remaining} operations unfinished")]
    Deadlock { clock: u64, remaining: usize },
    #[error("no relocation is awaiting a target")]
    NoRelocationPending,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    #[default]
    AgvOnly,
    AgvAndTools,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BuildOptions {
    pub n_agvs: usize,
    pub n_tool_transporters: usize,
    pub mode: Mode,
    /// Expose tool-transporter dispatch as agent actions instead of firing
    /// it automatically (first idle transporter by id).
    pub controlled_tool_dispatch: bool,
}

impl BuildOptions {
    pub fn agv_only(n_agvs: usize) -> Self {
        Self {
            n_agvs,
            n_tool_transporters: 0,
            mode: Mode::AgvOnly,
            controlled_tool_dispatch: false,
        }
    }

    pub fn with_tools(n_agvs: usize, n_tool_transporters: usize) -> Self {
        Self {
            n_agvs,
            n_tool_transporters,
            mode: Mode::AgvAndTools,
            controlled_tool_dispatch: false,
        }
    }
}

/// Meaning of one entry of the action vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Control {
    Job(usize),
    Agv(usize),
    ToolDispatch { tool: usize, transporter: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    JobSelect(usize),
    AgvSelect(usize),
    ToolDispatch,
    Release,
    Route,
    Load,
    Pickup(usize),
    Unload,
    Relocate,
    Start(usize),
    Finish,
    ToolRoute,
    ToolReturn,
    ToolBypass,
    ToolUnload,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PlaceTag {
    Other,
    Approach(usize),
    Relocation(usize),
    ToolTransport(usize),
}

/// Place ids of the built net.
#[derive(Debug, Clone, Default)]
pub struct Layout {
    pub job_queue: Vec<PlaceId>,
    pub job_ready: Vec<PlaceId>,
    pub agv_request: PlaceId,
    pub agv_buffer: Vec<PlaceId>,
    pub agv_idle: Vec<PlaceId>,
    pub agv_approach: Vec<PlaceId>,
    pub agv_transport: Vec<PlaceId>,
    pub agv_relocation: Vec<PlaceId>,
    pub delivered: PlaceId,
    pub machine_buffer: Vec<PlaceId>,
    pub machine_idle: Vec<PlaceId>,
    pub machine_processing: Vec<PlaceId>,
    pub completed: PlaceId,
    pub done: PlaceId,
    pub tool_request: Option<PlaceId>,
    pub tool_queue: Vec<PlaceId>,
    pub tool_store: Vec<PlaceId>,
    pub tool_ready: Option<PlaceId>,
    pub tool_return: Option<PlaceId>,
    pub tt_idle: Vec<PlaceId>,
    pub tt_transport: Vec<PlaceId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FmsHalt {
    /// At least one action is enabled.
    Decision,
    /// AGV `agv` finished an unload with an empty buffer while work remains;
    /// supply a target with [`FmsNet::assign_relocation`].
    Relocation { agv: usize },
    /// Every operation is done and all vehicles are idle.
    Terminal,
}

/// Where an AGV should deadhead to after an unload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelocationTarget {
    /// Travel `max(D_AGV)`; the position is unknown afterwards and the next
    /// approach is free.
    Fallback,
    /// Travel to the pickup location of a predicted operation.
    Predicted { job: usize, op: usize },
}

#[derive(Debug, Clone)]
pub struct FmsNet {
    net: CTPNet,
    instance: Instance,
    options: BuildOptions,
    layout: Layout,
    roles: Vec<Role>,
    place_tags: Vec<PlaceTag>,
    controls: Vec<Control>,
    agv_pos: Vec<Option<usize>>,
    agv_work: Vec<u64>,
    tt_pos: Vec<usize>,
    tool_loc: Vec<usize>,
    dispatched: Vec<usize>,
    finished: Vec<usize>,
    ready_since: Vec<u64>,
    entered: Vec<Option<u64>>,
    last_fired: Vec<TransitionId>,
    unassigned: usize,
    awaiting: Option<(usize, PendingDelay)>,
    trace: ScheduleTrace,
    max_agv: u64,
    decisions: u64,
}

impl FmsNet {
    pub fn build(instance: &Instance, options: &BuildOptions) -> Result<Self, FmsError> {
        instance.validate().map_err(|e| FmsError::Build(e.to_string()))?;
        let q = options.n_agvs;
        let tools = options.mode == Mode::AgvAndTools;
        let s = if tools { options.n_tool_transporters } else { 0 };
        if q == 0 {
            return Err(FmsError::Build("at least one AGV is required".into()));
        }
        if tools {
            if !instance.has_tools() {
                return Err(FmsError::Build(format!(
                    "instance {} has no tools but tool sharing was requested",
                    instance.name
                )));
            }
            if s == 0 {
                return Err(FmsError::Build("at least one tool transporter is required".into()));
            }
        }
        let n = instance.n_jobs();
        let m = instance.n_machines;
        let n_tools = if tools { instance.n_tools } else { 0 };

        let mut net = CTPNet::new();
        let mut lay = Layout::default();
        let many = |net: &mut CTPNet, count: usize, label: &str, role: PlaceRole| -> Vec<PlaceId> {
            (0..count).map(|i| net.add_place(format!("{label}[{i}]"), role)).collect()
        };

        lay.job_queue = many(&mut net, n, "job_queue", PlaceRole::JobQueue);
        lay.job_ready = (0..n)
            .map(|j| net.add_place_with_capacity(format!("job_ready[{j}]"), PlaceRole::JobReady, Some(1)))
            .collect();
        lay.agv_request = net.add_place_with_capacity("agv_request", PlaceRole::AgvRequest, Some(1));
        lay.agv_buffer = many(&mut net, q, "agv_buffer", PlaceRole::AgvBuffer);
        lay.agv_idle = many(&mut net, q, "agv_idle", PlaceRole::AgvIdle);
        lay.agv_approach = many(&mut net, q, "agv_approach", PlaceRole::AgvApproach);
        lay.agv_transport = many(&mut net, q, "agv_transport", PlaceRole::AgvTransport);
        lay.agv_relocation = many(&mut net, q, "agv_relocation", PlaceRole::AgvRelocation);
        lay.delivered = net.add_place("delivered", PlaceRole::Delivered);
        lay.machine_buffer = many(&mut net, m, "machine_buffer", PlaceRole::MachineBuffer);
        lay.machine_idle = many(&mut net, m, "machine_idle", PlaceRole::MachineIdle);
        lay.machine_processing = many(&mut net, m, "machine_processing", PlaceRole::MachineProcessing);
        lay.completed = net.add_place("completed", PlaceRole::Completed);
        lay.done = net.add_place("done", PlaceRole::Done);
        if tools {
            lay.tool_request = Some(net.add_place("tool_request", PlaceRole::ToolRequest));
            lay.tool_queue = many(&mut net, n_tools, "tool_queue", PlaceRole::ToolTransporterBuffer);
            lay.tool_store = (0..n_tools)
                .map(|l| net.add_place_with_capacity(format!("tool_store[{l}]"), PlaceRole::ToolStore, Some(1)))
                .collect();
            lay.tool_ready = Some(net.add_place("tool_ready", PlaceRole::ToolReady));
            lay.tool_return = Some(net.add_place("tool_return", PlaceRole::ToolReturn));
            lay.tt_idle = many(&mut net, s, "tt_idle", PlaceRole::ToolTransporterIdle);
            lay.tt_transport = many(&mut net, s, "tt_transport", PlaceRole::ToolTransporterTransport);
        }

        let mut roles = Vec::new();
        let mut controls = Vec::new();
        let mut add = |net: &mut CTPNet, spec: TransitionSpec, role: Role| -> Result<TransitionId, FmsError> {
            let id = net.add_transition(spec)?;
            debug_assert_eq!(id, roles.len());
            roles.push(role);
            Ok(id)
        };
        use TransitionKind::*;

        // Transition creation order is the firing priority within an instant.
        for j in 0..n {
            let mut spec = TransitionSpec::new(format!("job_select[{j}]"), Controlled)
                .input(lay.job_queue[j])
                .input(lay.job_ready[j])
                .output(lay.agv_request, 0);
            if let Some(tr) = lay.tool_request {
                // duplicate: one token for the AGV block, one tool request
                spec = spec.output(tr, 0);
            }
            add(&mut net, spec, Role::JobSelect(j))?;
            controls.push(Control::Job(j));
        }
        for k in 0..q {
            let spec = TransitionSpec::new(format!("agv_select[{k}]"), Controlled)
                .input(lay.agv_request)
                .output(lay.agv_buffer[k], 0);
            add(&mut net, spec, Role::AgvSelect(k))?;
            controls.push(Control::Agv(k));
        }
        let tool_kind = if options.controlled_tool_dispatch { Controlled } else { Colored };
        if tools {
            for l in 0..n_tools {
                for r in 0..s {
                    let spec = TransitionSpec::new(format!("tool_dispatch[{l}][{r}]"), tool_kind)
                        .input(lay.tool_queue[l])
                        .input(lay.tool_store[l])
                        .input(lay.tt_idle[r])
                        .join(0, 1, ColorKey::Machine, Relation::NotEqual)
                        .output(lay.tt_transport[r], 0);
                    add(&mut net, spec, Role::ToolDispatch)?;
                    if options.controlled_tool_dispatch {
                        controls.push(Control::ToolDispatch { tool: l, transporter: r });
                    }
                }
            }
        }
        for j in 0..n {
            let spec = TransitionSpec::new(format!("release[{j}]"), Colored)
                .input_filtered(lay.completed, Color::job(j))
                .output(lay.done, 0)
                .output_fresh(lay.job_ready[j], Color::job(j));
            add(&mut net, spec, Role::Release)?;
        }
        for mm in 0..m {
            let spec = TransitionSpec::new(format!("route[{mm}]"), Colored)
                .input_filtered(lay.delivered, Color::machine(mm))
                .output(lay.machine_buffer[mm], 0);
            add(&mut net, spec, Role::Route)?;
        }
        if tools {
            let (tr, ready, ret) = (
                lay.tool_request.expect("tools"),
                lay.tool_ready.expect("tools"),
                lay.tool_return.expect("tools"),
            );
            for l in 0..n_tools {
                let spec = TransitionSpec::new(format!("tool_route[{l}]"), Colored)
                    .input_filtered(tr, Color::tool(l))
                    .output(lay.tool_queue[l], 0);
                add(&mut net, spec, Role::ToolRoute)?;
                let spec = TransitionSpec::new(format!("tool_return[{l}]"), Colored)
                    .input_filtered(ret, Color::tool(l))
                    .output(lay.tool_store[l], 0);
                add(&mut net, spec, Role::ToolReturn)?;
                // tool already sitting at the requesting machine
                let spec = TransitionSpec::new(format!("tool_bypass[{l}]"), Colored)
                    .input(lay.tool_queue[l])
                    .input(lay.tool_store[l])
                    .join(0, 1, ColorKey::Machine, Relation::Equal)
                    .output(ready, 0);
                add(&mut net, spec, Role::ToolBypass)?;
            }
        }
        for k in 0..q {
            let spec = TransitionSpec::new(format!("load[{k}]"), Automatic)
                .input(lay.agv_buffer[k])
                .input(lay.agv_idle[k])
                .output(lay.agv_approach[k], 0);
            add(&mut net, spec, Role::Load)?;
        }
        for mm in 0..m {
            let mut spec = TransitionSpec::new(format!("start[{mm}]"), Colored).input(lay.machine_buffer[mm]);
            if let Some(ready) = lay.tool_ready {
                spec = spec
                    .input_filtered(ready, Color::machine(mm))
                    .input(lay.machine_idle[mm])
                    .join(0, 1, ColorKey::Job, Relation::Equal);
            } else {
                spec = spec.input(lay.machine_idle[mm]);
            }
            spec = spec.output(lay.machine_processing[mm], 0);
            add(&mut net, spec, Role::Start(mm))?;
        }
        for k in 0..q {
            let spec = TransitionSpec::new(format!("pickup[{k}]"), Timed)
                .input(lay.agv_approach[k])
                .timed(0, DelaySource::Assigned)
                .output(lay.agv_transport[k], 0);
            add(&mut net, spec, Role::Pickup(k))?;
            let spec = TransitionSpec::new(format!("unload[{k}]"), Timed)
                .input(lay.agv_transport[k])
                .timed(0, DelaySource::TransportTime)
                .output(lay.delivered, 0)
                .output_fresh(lay.agv_relocation[k], Color::BLANK);
            add(&mut net, spec, Role::Unload)?;
            let spec = TransitionSpec::new(format!("relocate[{k}]"), Timed)
                .input(lay.agv_relocation[k])
                .timed(0, DelaySource::Assigned)
                .output_fresh(lay.agv_idle[k], Color::BLANK);
            add(&mut net, spec, Role::Relocate)?;
        }
        for mm in 0..m {
            let mut spec = TransitionSpec::new(format!("finish[{mm}]"), Timed)
                .input(lay.machine_processing[mm])
                .timed(0, DelaySource::ProcessTime)
                .output(lay.completed, 0)
                .output_fresh(lay.machine_idle[mm], Color::machine(mm));
            if let Some(ret) = lay.tool_return {
                spec = spec.output(ret, 0);
            }
            add(&mut net, spec, Role::Finish)?;
        }
        for r in 0..s {
            let spec = TransitionSpec::new(format!("tt_unload[{r}]"), Timed)
                .input(lay.tt_transport[r])
                .timed(0, DelaySource::Assigned)
                .output(lay.tool_ready.expect("tools"), 0)
                .output_fresh(lay.tt_idle[r], Color::BLANK);
            add(&mut net, spec, Role::ToolUnload)?;
        }

        debug_assert_eq!(net.controllable_ids().len(), controls.len());

        // Initial marking.
        for (j, ops) in instance.jobs.iter().enumerate() {
            for (o, op) in ops.iter().enumerate() {
                let tool = if tools { op.tool } else { None };
                let transport = instance
                    .d_agv
                    .get(instance.pickup_location(j, o), machine_location(op.machine));
                let tok = Token::new(Color::new(Some(j), Some(op.machine), tool), op.duration, transport, o);
                net.add_token(lay.job_queue[j], tok)?;
            }
            net.add_token(lay.job_ready[j], Token::marker(Color::job(j)))?;
        }
        for k in 0..q {
            net.add_token(lay.agv_idle[k], Token::marker(Color::BLANK))?;
        }
        for mm in 0..m {
            net.add_token(lay.machine_idle[mm], Token::marker(Color::machine(mm)))?;
        }
        for l in 0..n_tools {
            net.add_token(lay.tool_store[l], Token::marker(Color::tool(l)))?;
        }
        for r in 0..s {
            net.add_token(lay.tt_idle[r], Token::marker(Color::BLANK))?;
        }

        let mut place_tags = vec![PlaceTag::Other; net.places().len()];
        for k in 0..q {
            place_tags[lay.agv_approach[k]] = PlaceTag::Approach(k);
            place_tags[lay.agv_relocation[k]] = PlaceTag::Relocation(k);
        }
        for r in 0..s {
            place_tags[lay.tt_transport[r]] = PlaceTag::ToolTransport(r);
        }

        Ok(Self {
            net,
            instance: instance.clone(),
            options: *options,
            layout: lay,
            roles,
            place_tags,
            controls,
            agv_pos: vec![Some(STATION); q],
            agv_work: vec![0; q],
            tt_pos: vec![STATION; s],
            tool_loc: vec![STATION; n_tools],
            dispatched: vec![0; n],
            finished: vec![0; n],
            ready_since: vec![0; n],
            entered: vec![None; n],
            last_fired: Vec::new(),
            unassigned: instance.n_operations(),
            awaiting: None,
            trace: ScheduleTrace::new(),
            max_agv: instance.d_agv.max(),
            decisions: 0,
        })
    }

    pub fn net(&self) -> &CTPNet {
        &self.net
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn options(&self) -> &BuildOptions {
        &self.options
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn controls(&self) -> &[Control] {
        &self.controls
    }

    pub fn n_agvs(&self) -> usize {
        self.agv_pos.len()
    }

    pub fn n_tool_transporters(&self) -> usize {
        self.tt_pos.len()
    }

    pub fn clock(&self) -> u64 {
        self.net.clock()
    }

    pub fn trace(&self) -> &ScheduleTrace {
        &self.trace
    }

    pub fn into_trace(self) -> ScheduleTrace {
        self.trace
    }

    pub fn action_mask(&self) -> Vec<bool> {
        if self.awaiting.is_some() {
            return vec![false; self.controls.len()];
        }
        self.net.action_mask()
    }

    /// Current AGV location; `None` after a blind relocation.
    pub fn agv_position(&self, agv: usize) -> Option<usize> {
        self.agv_pos[agv]
    }

    pub fn tool_transporter_position(&self, transporter: usize) -> usize {
        self.tt_pos[transporter]
    }

    /// Location of a tool (or where it is being carried to).
    pub fn tool_location(&self, tool: usize) -> usize {
        self.tool_loc[tool]
    }

    /// Loaded plus deadhead time accumulated by an AGV.
    pub fn agv_work(&self, agv: usize) -> u64 {
        self.agv_work[agv]
    }

    pub fn agv_is_idle(&self, agv: usize) -> bool {
        !self.net.place(self.layout.agv_idle[agv]).is_empty()
    }

    pub fn agv_buffer_len(&self, agv: usize) -> usize {
        self.net.place(self.layout.agv_buffer[agv]).len()
    }

    pub fn machine_is_idle(&self, machine: usize) -> bool {
        !self.net.place(self.layout.machine_idle[machine]).is_empty()
    }

    /// Remaining processing time of the operation on a machine, 0 if idle.
    pub fn machine_remaining(&self, machine: usize) -> u64 {
        self.net
            .place(self.layout.machine_processing[machine])
            .head()
            .map_or(0, |t| (t.entered_at() + t.process_time()).saturating_sub(self.clock()))
    }

    /// Operations of a job handed to the AGV block so far.
    pub fn dispatched_ops(&self, job: usize) -> usize {
        self.dispatched[job]
    }

    pub fn finished_ops(&self, job: usize) -> usize {
        self.finished[job]
    }

    /// Time since which the job has had no operation in flight.
    pub fn ready_since(&self, job: usize) -> u64 {
        self.ready_since[job]
    }

    /// Time the job's first operation was dispatched.
    pub fn entered_at(&self, job: usize) -> Option<u64> {
        self.entered[job]
    }

    /// Transitions fired since the last trigger, the trigger included.
    pub fn last_fired(&self) -> &[TransitionId] {
        &self.last_fired
    }

    /// Operations not yet placed in any AGV buffer.
    pub fn unassigned_ops(&self) -> usize {
        self.unassigned
    }

    pub fn remaining_ops(&self) -> usize {
        self.instance.n_operations() - self.finished.iter().sum::<usize>()
    }

    pub fn is_complete(&self) -> bool {
        self.remaining_ops() == 0
    }

    /// Number of external triggers applied so far.
    pub fn decisions(&self) -> u64 {
        self.decisions
    }

    /// AGV travel time between two locations; deadheading uses the same matrix.
    pub fn transport_delay(&self, from: usize, to: usize) -> u64 {
        self.instance.d_agv.get(from, to)
    }

    /// Pickup location of the head of the AGV's buffer, if any.
    pub fn relocation_target(&self, agv: usize) -> Option<usize> {
        self.net
            .place(self.layout.agv_buffer[agv])
            .head()
            .map(|t| self.instance.pickup_location(t.color.job.expect("op token"), t.order_index()))
    }

    /// `(job, op)` of the token waiting for AGV selection.
    pub fn pending_request(&self) -> Option<(usize, usize)> {
        self.net
            .place(self.layout.agv_request)
            .head()
            .map(|t| (t.color.job.expect("op token"), t.order_index()))
    }

    pub fn awaiting_relocation(&self) -> Option<usize> {
        self.awaiting.map(|(k, _)| k)
    }

    /// Fire the controlled transition behind `action`.
    pub fn trigger(&mut self, action: usize) -> Result<(), FmsError> {
        let len = self.controls.len();
        if action >= len {
            return Err(FmsError::ActionOutOfRange { action, len });
        }
        let id = self.net.controllable_ids()[action];
        if self.awaiting.is_some() || !self.net.guard(id)? {
            return Err(FmsError::MaskedAction {
                action,
                name: self.net.transitions()[id].name.clone(),
            });
        }
        let firing = self.net.trigger(id)?;
        self.decisions += 1;
        self.last_fired.clear();
        self.absorb(&firing);
        Ok(())
    }

    /// Run until a decision, an open relocation, or the end.
    pub fn advance(&mut self) -> Result<FmsHalt, FmsError> {
        if let Some((agv, _)) = self.awaiting {
            return Ok(FmsHalt::Relocation { agv });
        }
        loop {
            let adv = self.net.advance()?;
            for f in &adv.fired {
                self.absorb(f);
            }
            match adv.halt {
                Halt::Decision => return Ok(FmsHalt::Decision),
                Halt::Terminal => {
                    let remaining = self.remaining_ops();
                    if remaining > 0 {
                        return Err(FmsError::Deadlock {
                            clock: self.clock(),
                            remaining,
                        });
                    }
                    return Ok(FmsHalt::Terminal);
                }
                Halt::NeedsDelay(p) => match self.place_tags[p.place] {
                    PlaceTag::Approach(k) => self.assign_approach(k, p)?,
                    PlaceTag::ToolTransport(r) => self.assign_tool_transport(r, p)?,
                    PlaceTag::Relocation(k) => {
                        if let Some(target) = self.relocation_target(k) {
                            self.relocate_to(k, p, target, self.head_of_buffer(k))?;
                        } else if self.unassigned == 0 {
                            self.net.assign_delay(p.place, p.trace_id, 0)?;
                        } else {
                            self.awaiting = Some((k, p));
                            return Ok(FmsHalt::Relocation { agv: k });
                        }
                    }
                    PlaceTag::Other => unreachable!("assigned delays only on vehicle places"),
                },
            }
        }
    }

    /// Resolve an open relocation.
    pub fn assign_relocation(&mut self, target: RelocationTarget) -> Result<(), FmsError> {
        let (k, p) = self.awaiting.take().ok_or(FmsError::NoRelocationPending)?;
        match target {
            RelocationTarget::Fallback => {
                let start = self.clock();
                let d = self.max_agv;
                self.net.assign_delay(p.place, p.trace_id, d)?;
                self.trace.push(TraceRecord {
                    kind: ResourceKind::Agv,
                    id: k,
                    job: None,
                    op: None,
                    start,
                    end: start + d,
                    leg: Leg::Deadhead,
                });
                self.agv_work[k] += d;
                self.agv_pos[k] = None;
            }
            RelocationTarget::Predicted { job, op } => {
                let loc = self.instance.pickup_location(job, op);
                self.relocate_to(k, p, loc, Some((job, op)))?;
            }
        }
        Ok(())
    }

    fn head_of_buffer(&self, agv: usize) -> Option<(usize, usize)> {
        self.net
            .place(self.layout.agv_buffer[agv])
            .head()
            .map(|t| (t.color.job.expect("op token"), t.order_index()))
    }

    fn deadhead(&mut self, agv: usize, to: usize, op: Option<(usize, usize)>) -> u64 {
        let d = self.agv_pos[agv].map_or(0, |from| self.instance.d_agv.get(from, to));
        if d > 0 {
            let start = self.clock();
            self.trace.push(TraceRecord {
                kind: ResourceKind::Agv,
                id: agv,
                job: op.map(|o| o.0),
                op: op.map(|o| o.1),
                start,
                end: start + d,
                leg: Leg::Deadhead,
            });
            self.agv_work[agv] += d;
        }
        self.agv_pos[agv] = Some(to);
        d
    }

    fn relocate_to(
        &mut self,
        agv: usize,
        p: PendingDelay,
        to: usize,
        op: Option<(usize, usize)>,
    ) -> Result<(), FmsError> {
        let d = self.deadhead(agv, to, op);
        self.net.assign_delay(p.place, p.trace_id, d)?;
        Ok(())
    }

    fn token_in(&self, place: PlaceId, trace_id: u64) -> &Token {
        self.net
            .place(place)
            .tokens()
            .iter()
            .find(|t| t.trace_id() == trace_id)
            .expect("pending token present")
    }

    fn assign_approach(&mut self, agv: usize, p: PendingDelay) -> Result<(), FmsError> {
        let tok = self.token_in(p.place, p.trace_id);
        let (job, op) = (tok.color.job.expect("op token"), tok.order_index());
        let pickup = self.instance.pickup_location(job, op);
        let d = self.deadhead(agv, pickup, Some((job, op)));
        self.net.assign_delay(p.place, p.trace_id, d)?;
        Ok(())
    }

    fn assign_tool_transport(&mut self, r: usize, p: PendingDelay) -> Result<(), FmsError> {
        let tok = self.token_in(p.place, p.trace_id);
        let (job, op) = (tok.color.job.expect("op token"), tok.order_index());
        let tool = tok.color.tool.expect("tool request");
        let dest = machine_location(tok.color.machine.expect("tool request"));
        let d_tt = self.instance.d_tt.as_ref().expect("tools mode");
        let from = self.tool_loc[tool];
        let empty = d_tt.get(self.tt_pos[r], from);
        let carry = d_tt.get(from, dest);
        let start = self.clock();
        if empty > 0 {
            self.trace.push(TraceRecord {
                kind: ResourceKind::ToolTransporter,
                id: r,
                job: Some(job),
                op: Some(op),
                start,
                end: start + empty,
                leg: Leg::Deadhead,
            });
        }
        self.trace.push(TraceRecord {
            kind: ResourceKind::ToolTransporter,
            id: r,
            job: Some(job),
            op: Some(op),
            start: start + empty,
            end: start + empty + carry,
            leg: Leg::ToolMove,
        });
        self.tt_pos[r] = dest;
        self.tool_loc[tool] = dest;
        self.net.assign_delay(p.place, p.trace_id, empty + carry)?;
        Ok(())
    }

    fn absorb(&mut self, f: &Firing) {
        self.last_fired.push(f.transition);
        match self.roles[f.transition] {
            Role::JobSelect(j) => {
                self.dispatched[j] += 1;
                self.entered[j].get_or_insert(f.at);
            }
            Role::AgvSelect(_) => {
                self.unassigned -= 1;
            }
            Role::Pickup(k) => {
                let tok = &f.consumed[0];
                let (job, op) = (tok.color.job.expect("op token"), tok.order_index());
                let d = tok.transport_time();
                self.trace.push(TraceRecord {
                    kind: ResourceKind::Agv,
                    id: k,
                    job: Some(job),
                    op: Some(op),
                    start: f.at,
                    end: f.at + d,
                    leg: Leg::Loaded,
                });
                self.agv_work[k] += d;
                self.agv_pos[k] = Some(machine_location(tok.color.machine.expect("op token")));
            }
            Role::Start(mm) => {
                let tok = &f.consumed[0];
                self.trace.push(TraceRecord {
                    kind: ResourceKind::Machine,
                    id: mm,
                    job: tok.color.job,
                    op: Some(tok.order_index()),
                    start: f.at,
                    end: f.at + tok.process_time(),
                    leg: Leg::Process,
                });
            }
            Role::Release => {
                let j = f.consumed[0].color.job.expect("op token");
                self.finished[j] += 1;
                self.ready_since[j] = f.at;
            }
            Role::ToolBypass | Role::ToolDispatch => {}
            Role::Route | Role::Load | Role::Unload | Role::Relocate | Role::Finish => {}
            Role::ToolRoute | Role::ToolReturn | Role::ToolUnload => {}
        }
    }

    /// Hash of the complete simulation state.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.net.fingerprint().hash(&mut h);
        self.agv_pos.hash(&mut h);
        self.agv_work.hash(&mut h);
        self.tt_pos.hash(&mut h);
        self.tool_loc.hash(&mut h);
        self.dispatched.hash(&mut h);
        self.finished.hash(&mut h);
        self.awaiting.map(|(k, p)| (k, p.place, p.trace_id)).hash(&mut h);
        self.trace.hash(&mut h);
        h.finish()
    }
}

#[cfg(test)]
mod tests;
