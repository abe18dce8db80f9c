//! Fair composition of a master layer over a slave layer, and the loop-free
//! tree transformer that uses it.

use std::collections::BTreeSet;
use std::fmt::Debug;
use std::hash::Hash;

use crate::engine::{Event, Protocol, RegisterSpec, SimRng, Value, View};
use crate::graph::NodeId;
use crate::EngineError;
use crate::oracles::mst_reference;
use crate::register_access;
use crate::Graph;

use super::tree::{children, reparent, tree_coherent, tree_schema, tree_step, HasTree, Rooting, TreeRegs};

/// A layer that reads a slave's registers and never writes them.
pub trait Master<S: Protocol> {
    type State: Clone + Eq + Hash + Debug;

    fn name(&self) -> String;

    fn schema(&self) -> Vec<RegisterSpec>;

    fn init(&self, net: &Graph, u: NodeId) -> Self::State;

    /// Master move, or `None` when the master is idle at this node.
    fn step(&self, slave: &S, view: &View<'_, (S::State, Self::State)>) -> Option<Self::State>;

    fn legitimate(&self, slave: &S, net: &Graph, cfg: &[(S::State, Self::State)]) -> bool;

    fn silent(&self) -> bool {
        true
    }

    fn get(&self, s: &Self::State, register: &str) -> Option<Value>;

    fn put(&self, s: &mut Self::State, register: &str, v: Value) -> Result<(), EngineError>;

    fn parent(&self, _s: &Self::State) -> Option<Option<NodeId>> {
        None
    }
}

/// Registers of a slave that exposes a tree.
pub trait TreeState {
    fn tree_parent(&self) -> Option<NodeId>;
}

/// Registers of a slave that computes a target tree for the master to reach.
pub trait TargetState {
    fn target_parent(&self) -> Option<NodeId>;
}

pub struct Composed<M, S> {
    pub master: M,
    pub slave: S,
    slave_registers: BTreeSet<&'static str>,
}

/// Composes `master` over `slave`. A node runs its slave move when it has
/// one and its master move otherwise, so the master acts on a locally
/// quiet slave.
pub fn compose_fair<M: Master<S>, S: Protocol>(master: M, slave: S) -> Result<Composed<M, S>, EngineError> {
    let slave_registers: BTreeSet<_> = slave.schema().iter().map(|r| r.name).collect();
    if let Some(r) = master.schema().iter().find(|r| slave_registers.contains(r.name)) {
        return Err(EngineError::SchemaCollision(r.name.to_string()));
    }
    Ok(Composed { master, slave, slave_registers })
}

impl<M: Master<S>, S: Protocol> Composed<M, S> {
    fn slave_moves(&self, view: &View<'_, (S::State, M::State)>) -> bool {
        let proj = view.projection(|s: &(S::State, M::State)| &s.0);
        self.slave.activable(&proj.view(view.net(), view.node()))
    }
}

impl<M: Master<S>, S: Protocol> Protocol for Composed<M, S> {
    type State = (S::State, M::State);

    fn name(&self) -> String {
        self.master.name()
    }

    fn schema(&self) -> Vec<RegisterSpec> {
        let mut out = self.slave.schema();
        out.extend(self.master.schema());
        out
    }

    fn init(&self, net: &Graph, u: NodeId) -> Self::State {
        (self.slave.init(net, u), self.master.init(net, u))
    }

    fn activable(&self, view: &View<'_, Self::State>) -> bool {
        self.slave_moves(view) || self.master.step(&self.slave, view).is_some()
    }

    fn step(&self, view: &View<'_, Self::State>, rng: &mut SimRng) -> Self::State {
        let own = view.own();
        if self.slave_moves(view) {
            let proj = view.projection(|s: &(S::State, M::State)| &s.0);
            let next = self.slave.step(&proj.view(view.net(), view.node()), rng);
            return (next, own.1.clone());
        }
        match self.master.step(&self.slave, view) {
            Some(m) => (own.0.clone(), m),
            None => own.clone(),
        }
    }

    fn legitimate(&self, net: &Graph, cfg: &[Self::State]) -> bool {
        let slave: Vec<_> = cfg.iter().map(|s| s.0.clone()).collect();
        self.slave.legitimate(net, &slave) && self.master.legitimate(&self.slave, net, cfg)
    }

    fn silent(&self) -> bool {
        self.master.silent() && self.slave.silent()
    }

    fn get(&self, s: &Self::State, register: &str) -> Option<Value> {
        if self.slave_registers.contains(register) {
            self.slave.get(&s.0, register)
        } else {
            self.master.get(&s.1, register)
        }
    }

    fn put(&self, s: &mut Self::State, register: &str, v: Value) -> Result<(), EngineError> {
        if self.slave_registers.contains(register) {
            self.slave.put(&mut s.0, register, v)
        } else {
            self.master.put(&mut s.1, register, v)
        }
    }

    fn corrupt(&self, net: &Graph, u: NodeId, s: &mut Self::State, register: &str, rng: &mut SimRng) -> Result<(), EngineError> {
        if self.slave_registers.contains(register) {
            self.slave.corrupt(net, u, &mut s.0, register, rng)
        } else {
            let spec = self
                .master
                .schema()
                .into_iter()
                .find(|r| r.name == register)
                .ok_or_else(|| EngineError::UnknownRegister(register.to_string()))?;
            self.master.put(&mut s.1, register, spec.encoding.random(net, u, rng))
        }
    }

    fn parent(&self, s: &Self::State) -> Option<Option<NodeId>> {
        self.master.parent(&s.1).or_else(|| self.slave.parent(&s.0))
    }

    fn on_event(&self, net: &Graph, cfg: &mut [Self::State], ev: &Event) {
        let mut slave: Vec<_> = cfg.iter().map(|s| s.0.clone()).collect();
        self.slave.on_event(net, &mut slave, ev);
        for (s, x) in cfg.iter_mut().zip(slave) {
            s.0 = x;
        }
    }
}

/// Loop-free transformer moving the current tree onto the slave's target tree.
///
/// A node is anchored when its whole path to the root already uses target
/// edges; it is clean when neither it nor anything below it is anchored. A
/// node switches to its target parent only when that parent is anchored and
/// its own children are clean, so the new parent cannot lie in its subtree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct BfsScRegisters {
    pub tree: TreeRegs,
    pub anchored: bool,
    pub clean: bool,
}

impl HasTree for BfsScRegisters {
    fn tree(&self) -> &TreeRegs {
        &self.tree
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
struct Flat {
    parent: Option<NodeId>,
    depth: usize,
    anchored: bool,
    clean: bool,
}

register_access!(Flat { parent, depth, anchored, clean });

impl BfsScRegisters {
    fn flat(&self) -> Flat {
        Flat { parent: self.tree.parent, depth: self.tree.depth, anchored: self.anchored, clean: self.clean }
    }

    fn unflat(f: Flat) -> Self {
        BfsScRegisters { tree: TreeRegs { parent: f.parent, depth: f.depth }, anchored: f.anchored, clean: f.clean }
    }
}

impl<S, T: HasTree> HasTree for (S, T) {
    fn tree(&self) -> &TreeRegs {
        self.1.tree()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct BfsSc;

pub fn bfs_sc_root(net: &Graph) -> NodeId {
    net.root().unwrap_or(0)
}

/// One transformer move at the viewed node.
pub fn bfs_sc_transform_step<S: TargetState>(view: &View<'_, (S, BfsScRegisters)>) -> Option<BfsScRegisters> {
    let net = view.net();
    let u = view.node();
    let root = bfs_sc_root(net);
    let (slave, own) = view.own();
    if let Some(tree) = tree_step(view, Rooting::Designated(root), true) {
        return Some(BfsScRegisters { tree, anchored: false, clean: false });
    }
    let target = slave.target_parent().filter(|&v| net.is_edge(u, v));
    let anchored = u == root
        || (own.tree.parent.is_some() && own.tree.parent == target && view.state(own.tree.parent.unwrap()).1.anchored);
    let kids_clean = children(view).all(|c| view.state(c).1.clean);
    let clean = !anchored && kids_clean;
    if anchored != own.anchored || clean != own.clean {
        return Some(BfsScRegisters { anchored, clean, ..own.clone() });
    }
    let v = target?;
    if u == root || own.tree.parent == Some(v) || own.anchored || !kids_clean || !view.state(v).1.anchored {
        return None;
    }
    Some(BfsScRegisters { tree: reparent(view, v), anchored: false, clean: false })
}

impl<S> Master<S> for BfsSc
where
    S: Protocol,
    S::State: TargetState,
{
    type State = BfsScRegisters;

    fn name(&self) -> String {
        "bfs-sc".into()
    }

    fn schema(&self) -> Vec<RegisterSpec> {
        let mut out = tree_schema().to_vec();
        out.push(RegisterSpec::new("anchored", crate::engine::Encoding::Bool));
        out.push(RegisterSpec::new("clean", crate::engine::Encoding::Bool));
        out
    }

    fn init(&self, net: &Graph, u: NodeId) -> BfsScRegisters {
        let depth = if u == bfs_sc_root(net) { 0 } else { super::tree::depth_ceiling(net) };
        BfsScRegisters { tree: TreeRegs { parent: None, depth }, anchored: false, clean: false }
    }

    fn step(&self, _slave: &S, view: &View<'_, (S::State, BfsScRegisters)>) -> Option<BfsScRegisters> {
        bfs_sc_transform_step(view)
    }

    fn legitimate(&self, _slave: &S, net: &Graph, cfg: &[(S::State, BfsScRegisters)]) -> bool {
        let root = bfs_sc_root(net);
        let tree: Vec<_> = cfg.iter().map(|s| s.1.tree.clone()).collect();
        tree_coherent(net, Rooting::Designated(root), &tree)
            && cfg.iter().enumerate().all(|(u, (sl, m))| {
                (u == root || m.tree.parent == sl.target_parent()) && m.anchored && !m.clean
            })
    }

    fn get(&self, s: &BfsScRegisters, register: &str) -> Option<Value> {
        s.flat().register(register)
    }

    fn put(&self, s: &mut BfsScRegisters, register: &str, v: Value) -> Result<(), EngineError> {
        let mut f = s.flat();
        f.set_register(register, v)?;
        *s = BfsScRegisters::unflat(f);
        Ok(())
    }

    fn parent(&self, s: &BfsScRegisters) -> Option<Option<NodeId>> {
        Some(s.tree.parent)
    }
}

/// Orients an edge set as a tree hanging from `root`.
pub fn orient(net: &Graph, edges: &BTreeSet<crate::graph::Edge>, root: NodeId) -> Vec<Option<NodeId>> {
    let mut parent = vec![None; net.n()];
    let mut seen = vec![false; net.n()];
    seen[root] = true;
    let mut stack = vec![root];
    while let Some(u) = stack.pop() {
        for e in edges.iter().filter(|e| e.touches(u)) {
            let v = e.other(u);
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some(u);
                stack.push(v);
            }
        }
    }
    parent
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct TargetRegisters {
    pub target: Option<NodeId>,
}

register_access!(TargetRegisters { target });

impl TargetState for TargetRegisters {
    fn target_parent(&self) -> Option<NodeId> {
        self.target
    }
}

/// Slave publishing the minimum spanning tree of the current weights, read
/// from the sequential oracle. Used to drive and test the transformer.
#[derive(Clone, Copy, Debug, Default)]
pub struct MstOracleSlave;

/// Slave publishing a fixed target tree.
#[derive(Clone, Debug)]
pub struct ConstantSlave(pub Vec<Option<NodeId>>);

fn target_schema() -> Vec<RegisterSpec> {
    vec![RegisterSpec::new("target", crate::engine::Encoding::Node)]
}

fn oracle_target(net: &Graph) -> Vec<Option<NodeId>> {
    orient(net, &mst_reference(net), bfs_sc_root(net))
}

macro_rules! target_slave {
    ($ty:ty, $name:expr, |$self_:ident, $net:ident| $targets:expr) => {
        impl Protocol for $ty {
            type State = TargetRegisters;

            fn name(&self) -> String {
                $name.into()
            }

            fn schema(&self) -> Vec<RegisterSpec> {
                target_schema()
            }

            fn init(&self, _net: &Graph, _u: NodeId) -> TargetRegisters {
                TargetRegisters::default()
            }

            fn activable(&self, view: &View<'_, TargetRegisters>) -> bool {
                let ($self_, $net) = (self, view.net());
                $targets[view.node()] != view.own().target
            }

            fn step(&self, view: &View<'_, TargetRegisters>, _rng: &mut SimRng) -> TargetRegisters {
                let ($self_, $net) = (self, view.net());
                TargetRegisters { target: $targets[view.node()] }
            }

            fn legitimate(&self, net: &Graph, cfg: &[TargetRegisters]) -> bool {
                let ($self_, $net) = (self, net);
                let t = $targets;
                cfg.iter().enumerate().all(|(u, s)| s.target == t[u])
            }

            fn get(&self, s: &TargetRegisters, register: &str) -> Option<Value> {
                s.register(register)
            }

            fn put(&self, s: &mut TargetRegisters, register: &str, v: Value) -> Result<(), EngineError> {
                s.set_register(register, v)
            }
        }
    };
}

target_slave!(MstOracleSlave, "mst-oracle", |_s, net| oracle_target(net));
target_slave!(ConstantSlave, "constant", |s, _net| s.0.clone());

/// The `bfs-sc` protocol: the transformer driven by the oracle slave.
pub fn bfs_sc() -> Composed<BfsSc, MstOracleSlave> {
    compose_fair(BfsSc, MstOracleSlave).expect("disjoint schemas")
}
