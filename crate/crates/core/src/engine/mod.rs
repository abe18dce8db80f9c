//! Shared-register simulation kernel.
//!
//! A protocol declares its registers, an activation guard and a step function.
//! Steps read the node's own registers and its neighbors' through a [`View`]
//! and return the node's new registers; all nodes activated in one step read
//! the same pre-step configuration.

mod daemon;
mod explore;
mod faults;
mod registers;
mod sim;

use std::fmt::Debug;
use std::hash::Hash;

use rand_chacha::ChaCha8Rng;

pub use daemon::{Daemon, DaemonKind, Fairness, Scheduler};
pub use explore::{exhaustive_schedules, ExploreOutcome, RegisterSystem, TransitionSystem, DEFAULT_STATE_CAP};
pub use faults::{inject_faults, FaultMode, FaultSpec, Selection};
pub use registers::{ceil_log2, Bound, Encoding, RegisterField, RegisterSpec, Value};
pub use sim::{
    activable_nodes, memory_bits, run, run_observed, schedule_step, Event, Report, RoundTracker, RunOptions, ScheduledEvent,
    Simulation, Trace, TraceStep,
};

use crate::error::EngineError;
use crate::graph::{Neighbor, NodeId};
use crate::Graph;

pub type SimRng = ChaCha8Rng;

/// Read access to registers, by node.
pub trait StateSource<S> {
    fn state(&self, v: NodeId) -> &S;
}

impl<S> StateSource<S> for [S] {
    fn state(&self, v: NodeId) -> &S {
        &self[v]
    }
}

impl<S> StateSource<S> for Vec<S> {
    fn state(&self, v: NodeId) -> &S {
        &self[v]
    }
}

/// One component of a composite configuration.
pub struct Projected<'a, T, S> {
    inner: Source<'a, T>,
    project: fn(&T) -> &S,
}

impl<T, S> StateSource<S> for Projected<'_, T, S> {
    fn state(&self, v: NodeId) -> &S {
        (self.project)(self.inner.get(v))
    }
}

impl<T, S> Projected<'_, T, S> {
    pub fn view<'b>(&'b self, net: &'b Graph, node: NodeId) -> View<'b, S> {
        View::with_source(net, node, self)
    }
}

/// What a node may read during one step: its own registers and those of its neighbors.
pub struct View<'a, S> {
    net: &'a Graph,
    node: NodeId,
    src: Source<'a, S>,
}

enum Source<'a, S> {
    Slice(&'a [S]),
    Dyn(&'a dyn StateSource<S>),
}

impl<S> Clone for Source<'_, S> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<S> Copy for Source<'_, S> {}

impl<'a, S> Source<'a, S> {
    fn get(self, v: NodeId) -> &'a S {
        match self {
            Source::Slice(s) => &s[v],
            Source::Dyn(d) => d.state(v),
        }
    }
}

impl<'a, S> View<'a, S> {
    pub fn new(net: &'a Graph, node: NodeId, cfg: &'a [S]) -> Self {
        View { net, node, src: Source::Slice(cfg) }
    }

    pub fn with_source(net: &'a Graph, node: NodeId, src: &'a dyn StateSource<S>) -> Self {
        View { net, node, src: Source::Dyn(src) }
    }

    pub fn net(&self) -> &'a Graph {
        self.net
    }

    pub fn node(&self) -> NodeId {
        self.node
    }

    pub fn own(&self) -> &'a S {
        self.src.get(self.node)
    }

    /// Registers of `v`, which must be the node itself or a neighbor.
    pub fn state(&self, v: NodeId) -> &'a S {
        assert!(
            v == self.node || self.net.is_edge(self.node, v),
            "node {} read non-neighbor {v}",
            self.node
        );
        self.src.get(v)
    }

    pub fn neighbors(&self) -> impl Iterator<Item = (&'a Neighbor<u64>, &'a S)> + '_ {
        let src = self.src;
        self.net.neighbors(self.node).iter().map(move |nb| (nb, src.get(nb.node)))
    }

    pub fn degree(&self) -> usize {
        self.net.degree(self.node)
    }

    /// Projection of every readable state onto one component.
    pub fn projection<T>(&self, project: fn(&S) -> &T) -> Projected<'a, S, T> {
        Projected { inner: self.src, project }
    }
}

pub trait Protocol {
    type State: Clone + Eq + Hash + Debug;

    fn name(&self) -> String;

    fn schema(&self) -> Vec<RegisterSpec>;

    /// Clean starting registers for `u`.
    fn init(&self, net: &Graph, u: NodeId) -> Self::State;

    fn activable(&self, view: &View<'_, Self::State>) -> bool;

    fn step(&self, view: &View<'_, Self::State>, rng: &mut SimRng) -> Self::State;

    fn legitimate(&self, net: &Graph, cfg: &[Self::State]) -> bool;

    /// Silent protocols stop changing registers once legitimate.
    fn silent(&self) -> bool {
        true
    }

    fn get(&self, s: &Self::State, register: &str) -> Option<Value>;

    /// Writes a register value without domain checks.
    fn put(&self, s: &mut Self::State, register: &str, v: Value) -> Result<(), EngineError>;

    /// Overwrites `register` of node `u` with a random value from its domain.
    fn corrupt(&self, net: &Graph, u: NodeId, s: &mut Self::State, register: &str, rng: &mut SimRng) -> Result<(), EngineError> {
        let spec = self
            .schema()
            .into_iter()
            .find(|r| r.name == register)
            .ok_or_else(|| EngineError::UnknownRegister(register.to_string()))?;
        let v = spec.encoding.random(net, u, rng);
        self.put(s, register, v)
    }

    /// Declared width of the node's registers, in bits.
    fn bits(&self, net: &Graph, s: &Self::State) -> usize {
        self.schema()
            .iter()
            .map(|r| r.encoding.width(net, self.get(s, r.name).as_ref()))
            .sum()
    }

    /// Parent pointer, for protocols that maintain a tree.
    fn parent(&self, _s: &Self::State) -> Option<Option<NodeId>> {
        None
    }

    /// Applies an external event to the configuration (weights are already updated in `net`).
    fn on_event(&self, _net: &Graph, _cfg: &mut [Self::State], _ev: &Event) {}

    fn initial_configuration(&self, net: &Graph) -> Vec<Self::State> {
        net.nodes().map(|u| self.init(net, u)).collect()
    }

    /// Writes `v` after checking it against the register's declared domain.
    fn set(&self, net: &Graph, s: &mut Self::State, register: &str, v: Value) -> Result<(), EngineError> {
        let spec = self
            .schema()
            .into_iter()
            .find(|r| r.name == register)
            .ok_or_else(|| EngineError::UnknownRegister(register.to_string()))?;
        if !spec.encoding.admits(net, &v) {
            return Err(EngineError::OutOfDomain { register: register.to_string(), value: v.to_string() });
        }
        self.put(s, register, v)
    }
}

/// Parent map of a configuration, if the protocol maintains one.
pub fn parent_map<P: Protocol>(proto: &P, cfg: &[P::State]) -> Option<Vec<Option<NodeId>>> {
    cfg.iter().map(|s| proto.parent(s)).collect()
}
