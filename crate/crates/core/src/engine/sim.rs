use std::fmt::Write as _;

use rand::SeedableRng;

use super::{Daemon, Protocol, Scheduler, SimRng, Value, View};
use crate::error::EngineError;
use crate::graph::{Edge, NodeId};
use crate::Graph;

/// External change applied between steps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Event {
    Weight { edge: Edge, weight: u64 },
    Member { node: NodeId, join: bool },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduledEvent {
    /// Applied once this many rounds have completed.
    pub round: usize,
    pub event: Event,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub activated: Vec<NodeId>,
    /// `(node, register, new value)` for every register that changed.
    pub changed: Vec<(NodeId, &'static str, Value)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    /// Step counts at which a round completed.
    pub round_boundaries: Vec<usize>,
    /// Step counts at which an event was applied, with the event.
    pub events: Vec<(usize, Event)>,
}

impl Trace {
    /// One line per step: `step_index;activated_ids;changed_registers`.
    pub fn export(&self) -> String {
        let mut out = String::new();
        for (i, st) in self.steps.iter().enumerate() {
            let ids: Vec<String> = st.activated.iter().map(|u| u.to_string()).collect();
            let ch: Vec<String> = st.changed.iter().map(|(u, r, v)| format!("{u}.{r}={v}")).collect();
            let _ = writeln!(out, "{};{};{}", i, ids.join(","), ch.join(","));
        }
        out
    }
}

/// Tracks round completion: a round ends once every node activable at its
/// start has been activated or has stopped being activable.
#[derive(Clone, Debug)]
pub struct RoundTracker {
    pending: Vec<bool>,
    left: usize,
    completed: usize,
    steps_in_round: usize,
}

impl RoundTracker {
    pub fn new(n: usize, activable: &[NodeId]) -> Self {
        let mut t = RoundTracker { pending: vec![false; n], left: 0, completed: 0, steps_in_round: 0 };
        t.start(activable);
        t
    }

    fn start(&mut self, activable: &[NodeId]) {
        self.pending.iter_mut().for_each(|p| *p = false);
        for &u in activable {
            self.pending[u] = true;
        }
        self.left = activable.len();
        self.steps_in_round = 0;
    }

    /// Records one step. Returns true when it closed a round.
    pub fn observe(&mut self, activated: &[NodeId], activable_after: &[NodeId], is_activable: &[bool]) -> bool {
        self.steps_in_round += 1;
        for &u in activated {
            if self.pending[u] {
                self.pending[u] = false;
                self.left -= 1;
            }
        }
        if self.left > 0 {
            for (p, &act) in self.pending.iter_mut().zip(is_activable) {
                if *p && !act {
                    *p = false;
                    self.left -= 1;
                }
            }
        }
        if self.left == 0 {
            self.completed += 1;
            self.start(activable_after);
            true
        } else {
            false
        }
    }

    /// Called when an external event changes the activable set.
    pub fn refresh(&mut self, activable: &[NodeId]) {
        if self.left == 0 {
            self.start(activable);
        }
    }

    pub fn completed(&self) -> usize {
        self.completed
    }

    /// Completed rounds plus the current one if it has started.
    pub fn rounds_so_far(&self) -> usize {
        self.completed + usize::from(self.steps_in_round > 0)
    }

    pub fn pending(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.pending.iter().enumerate().filter(|(_, &p)| p).map(|(u, _)| u)
    }
}

/// Nodes whose guard holds in `cfg`.
pub fn activable_nodes<P: Protocol>(proto: &P, net: &Graph, cfg: &[P::State]) -> Result<Vec<NodeId>, EngineError> {
    if cfg.len() != net.n() {
        return Err(EngineError::SizeMismatch { expected: net.n(), found: cfg.len() });
    }
    Ok(net.nodes().filter(|&u| proto.activable(&View::new(net, u, cfg))).collect())
}

/// One atomic step: the daemon picks among the activable nodes, every chosen
/// node computes its new registers from the same pre-step configuration.
pub fn schedule_step<P: Protocol>(
    proto: &P,
    net: &Graph,
    cfg: &[P::State],
    sched: &mut Scheduler,
    rng: &mut SimRng,
) -> Result<(Vec<P::State>, Vec<NodeId>), EngineError> {
    let act = activable_nodes(proto, net, cfg)?;
    let chosen = sched.select(&act);
    let mut next = cfg.to_vec();
    for &u in &chosen {
        next[u] = proto.step(&View::new(net, u, cfg), rng);
    }
    Ok((next, chosen))
}

/// Declared register width at every node.
pub fn memory_bits<P: Protocol>(proto: &P, net: &Graph, cfg: &[P::State]) -> Vec<usize> {
    cfg.iter().map(|s| proto.bits(net, s)).collect()
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub max_rounds: usize,
    pub record_trace: bool,
    pub events: Vec<ScheduledEvent>,
    /// Hard cap on steps, independent of rounds.
    pub max_steps: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { max_rounds: 1000, record_trace: false, events: Vec::new(), max_steps: usize::MAX }
    }
}

impl RunOptions {
    pub fn rounds(max_rounds: usize) -> Self {
        RunOptions { max_rounds, ..Default::default() }
    }
}

#[derive(Clone, Debug)]
pub struct Report<S> {
    pub converged: bool,
    pub rounds: usize,
    pub steps: usize,
    pub trace: Trace,
    pub final_config: Vec<S>,
    /// Network after all applied events.
    pub net: Graph,
    /// Largest per-node register width seen over the run.
    pub max_bits: usize,
}

/// A running execution. Owns its network so weight events can be applied.
pub struct Simulation<'p, P: Protocol> {
    proto: &'p P,
    net: Graph,
    cfg: Vec<P::State>,
    sched: Scheduler,
    rng: SimRng,
    is_act: Vec<bool>,
    act: Vec<NodeId>,
    tracker: RoundTracker,
    steps: usize,
    trace: Option<Trace>,
}

impl<'p, P: Protocol> Simulation<'p, P> {
    pub fn new(proto: &'p P, net: &Graph, init: Vec<P::State>, daemon: Daemon) -> Result<Self, EngineError> {
        let act = activable_nodes(proto, net, &init)?;
        let mut is_act = vec![false; net.n()];
        for &u in &act {
            is_act[u] = true;
        }
        Ok(Simulation {
            proto,
            net: net.clone(),
            cfg: init,
            sched: Scheduler::new(daemon, net.n()),
            rng: SimRng::seed_from_u64(daemon.seed ^ 0x5eed_57ab),
            tracker: RoundTracker::new(net.n(), &act),
            is_act,
            act,
            steps: 0,
            trace: None,
        })
    }

    pub fn record_trace(&mut self) {
        self.trace.get_or_insert_with(Trace::default);
    }

    pub fn net(&self) -> &Graph {
        &self.net
    }

    pub fn config(&self) -> &[P::State] {
        &self.cfg
    }

    pub fn activable(&self) -> &[NodeId] {
        &self.act
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn rounds(&self) -> &RoundTracker {
        &self.tracker
    }

    pub fn legitimate(&self) -> bool {
        self.proto.legitimate(&self.net, &self.cfg)
    }

    /// Legitimate and, for silent protocols, quiescent.
    pub fn converged(&self) -> bool {
        (!self.proto.silent() || self.act.is_empty()) && self.legitimate()
    }

    fn recompute_activable(&mut self, touched: &[NodeId]) {
        let mut dirty = vec![false; self.net.n()];
        for &u in touched {
            dirty[u] = true;
            for nb in self.net.neighbors(u) {
                dirty[nb.node] = true;
            }
        }
        for u in self.net.nodes() {
            if dirty[u] {
                self.is_act[u] = self.proto.activable(&View::new(&self.net, u, &self.cfg));
            }
        }
        self.act = self.net.nodes().filter(|&u| self.is_act[u]).collect();
    }

    fn recompute_all(&mut self) {
        let all: Vec<NodeId> = self.net.nodes().collect();
        self.recompute_activable(&all);
    }

    /// Performs one step; returns the activated set (empty if nothing is activable).
    pub fn step(&mut self) -> Vec<NodeId> {
        let chosen = self.sched.select(&self.act);
        if chosen.is_empty() {
            return chosen;
        }
        let mut updates = Vec::with_capacity(chosen.len());
        for &u in &chosen {
            updates.push(self.proto.step(&View::new(&self.net, u, &self.cfg), &mut self.rng));
        }
        let mut changed = Vec::new();
        for (&u, s) in chosen.iter().zip(updates) {
            if self.trace.is_some() {
                for spec in self.proto.schema() {
                    let new = self.proto.get(&s, spec.name);
                    if new != self.proto.get(&self.cfg[u], spec.name) {
                        if let Some(v) = new {
                            changed.push((u, spec.name, v));
                        }
                    }
                }
            }
            self.cfg[u] = s;
        }
        self.recompute_activable(&chosen);
        self.steps += 1;
        let closed = self.tracker.observe(&chosen, &self.act, &self.is_act);
        if let Some(tr) = self.trace.as_mut() {
            tr.steps.push(TraceStep { activated: chosen.clone(), changed });
            if closed {
                tr.round_boundaries.push(self.steps);
            }
        }
        chosen
    }

    /// Applies an external event and re-evaluates all guards.
    pub fn apply_event(&mut self, ev: &Event) -> Result<(), EngineError> {
        if let Event::Weight { edge, weight } = ev {
            self.net.set_weight(*edge, *weight)?;
        }
        self.proto.on_event(&self.net, &mut self.cfg, ev);
        self.recompute_all();
        self.tracker.refresh(&self.act);
        if let Some(tr) = self.trace.as_mut() {
            tr.events.push((self.steps, ev.clone()));
        }
        Ok(())
    }

    pub fn max_bits(&self) -> usize {
        memory_bits(self.proto, &self.net, &self.cfg).into_iter().max().unwrap_or(0)
    }

    pub fn into_parts(self) -> (Graph, Vec<P::State>, Option<Trace>) {
        (self.net, self.cfg, self.trace)
    }
}

/// Runs until convergence or until `max_rounds` rounds complete.
pub fn run<P: Protocol>(
    proto: &P,
    net: &Graph,
    init: Vec<P::State>,
    daemon: Daemon,
    opts: &RunOptions,
) -> Result<Report<P::State>, EngineError> {
    run_observed(proto, net, init, daemon, opts, |_, _| {})
}

/// As [`run`], calling `observer` on the initial configuration and after every step or event.
pub fn run_observed<P: Protocol>(
    proto: &P,
    net: &Graph,
    init: Vec<P::State>,
    daemon: Daemon,
    opts: &RunOptions,
    mut observer: impl FnMut(&Graph, &[P::State]),
) -> Result<Report<P::State>, EngineError> {
    if opts.max_rounds == 0 {
        return Err(EngineError::Unsupported("max_rounds > 0".into()));
    }
    let mut sim = Simulation::new(proto, net, init, daemon)?;
    if opts.record_trace {
        sim.record_trace();
    }
    let mut events = opts.events.clone();
    events.sort_by_key(|e| e.round);
    let mut next_event = 0;
    let mut max_bits = sim.max_bits();
    observer(sim.net(), sim.config());
    let converged = loop {
        while next_event < events.len() && events[next_event].round <= sim.rounds().completed() {
            sim.apply_event(&events[next_event].event)?;
            next_event += 1;
            observer(sim.net(), sim.config());
        }
        let done_events = next_event == events.len();
        if done_events && sim.converged() {
            break true;
        }
        if sim.activable().is_empty() {
            if !done_events {
                // Quiescent before the next scheduled event: fast-forward to it.
                sim.apply_event(&events[next_event].event)?;
                next_event += 1;
                observer(sim.net(), sim.config());
                continue;
            }
            break false;
        }
        if sim.rounds().completed() >= opts.max_rounds || sim.steps() >= opts.max_steps {
            break false;
        }
        sim.step();
        max_bits = max_bits.max(sim.max_bits());
        observer(sim.net(), sim.config());
    };
    let rounds = if converged { sim.rounds().rounds_so_far() } else { sim.rounds().completed() };
    let steps = sim.steps();
    let (net, final_config, trace) = sim.into_parts();
    Ok(Report { converged, rounds, steps, trace: trace.unwrap_or_default(), final_config, net, max_bits })
}
