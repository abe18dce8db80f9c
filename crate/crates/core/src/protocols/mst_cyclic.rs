//! Loop-free MST by fundamental-cycle inspection under a circulating token.
//!
//! The token gives every node its DFS label. While a node `u` holds it, `u`
//! inspects, smallest label first, each non-tree neighbor `v` visited earlier
//! in the wave. A probe walks the tree path from `u` to `v` using the labels,
//! records the heaviest edge, and `v` decides: if `{u, v}` is lighter, that
//! edge is exchanged in by rotation. The token stays frozen at `u` until the
//! probe has finished.

use std::collections::BTreeSet;

use super::token::{path_predecessor, token_legitimate, token_schema, token_step, Predecessor, TokenAccess, TokenRegs};
use super::tree::{children, depth_ceiling, tree_coherent, tree_schema, tree_step, HasTree, Rooting, TreeRegs};
use super::walk::{probe_header_bits, random_probe, walk_step, Hop, Outcome, Probe, Target, Verdict, Walker};
use super::Formation;
use crate::engine::{ceil_log2, Bound, Encoding, Event, Protocol, RegisterSpec, SimRng, Value, View};
use crate::graph::{parent_edges, Edge, NodeId};
use crate::oracles::mst_reference;
use crate::register_access;
use crate::{EngineError, Graph, Rank};

/// Probe payload: the target's label and the heaviest edge met so far, with
/// whether it was walked upward (on the initiator's side of the cycle).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct CycleMax {
    pub dest: usize,
    pub max: Option<(Rank, bool)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct CyclicRegs {
    pub tree: TreeRegs,
    pub token: TokenRegs,
    /// Inspections launched during the current token visit.
    pub scan: usize,
    pub probe: Option<Probe<CycleMax>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
struct Flat {
    parent: Option<NodeId>,
    depth: usize,
    scan: usize,
}

register_access!(Flat { parent, depth, scan });

impl HasTree for CyclicRegs {
    fn tree(&self) -> &TreeRegs {
        &self.tree
    }
}

fn probe_bits(net: &Graph) -> usize {
    let lg = ceil_log2(net.n() as u64);
    probe_header_bits(net) + ceil_log2(net.n() as u64 + 1) + ceil_log2(net.max_weight() + 1) + 2 * lg + 1
}

pub fn cyclic_root(net: &Graph) -> NodeId {
    net.root().unwrap_or(0)
}

fn access() -> TokenAccess<CyclicRegs> {
    TokenAccess { parent: |s| s.tree.parent, token: |s| &s.token }
}

fn tree_adjacent(a: NodeId, sa: &CyclicRegs, b: NodeId, sb: &CyclicRegs) -> bool {
    sa.tree.parent == Some(b) || sb.tree.parent == Some(a)
}

/// Non-tree neighbors visited before `u` in the current wave, smallest label first.
pub fn inspection_targets(view: &View<'_, CyclicRegs>) -> Vec<NodeId> {
    let u = view.node();
    let own = view.own();
    let mut c: Vec<(usize, NodeId)> = view
        .neighbors()
        .filter(|(nb, s)| !tree_adjacent(u, own, nb.node, s) && s.token.label < own.token.label)
        .map(|(nb, s)| (s.token.label, nb.node))
        .collect();
    c.sort_unstable();
    c.into_iter().map(|(_, v)| v).collect()
}

/// Exchange decision for the non-tree edge `e` against the heaviest path edge.
pub fn improvement(e: Rank, max: Option<(Rank, bool)>) -> bool {
    max.is_some_and(|(f, _)| e < f)
}

/// Token-driven cycle-inspection MST (`mst-cyclic`).
#[derive(Clone, Copy, Debug, Default)]
pub struct MstCyclic;

impl Walker<CyclicRegs> for MstCyclic {
    type Payload = CycleMax;

    fn probe<'a>(&self, s: &'a CyclicRegs) -> Option<&'a Probe<CycleMax>> {
        s.probe.as_ref()
    }

    fn tree<'a>(&self, s: &'a CyclicRegs) -> &'a TreeRegs {
        &s.tree
    }

    fn navigate(&self, view: &View<'_, CyclicRegs>, p: &Probe<CycleMax>) -> Hop {
        let kids: Vec<(NodeId, usize)> = children(view).map(|c| (c, view.state(c).token.label)).collect();
        match path_predecessor(view.own().token.label, &kids, p.payload.dest) {
            Ok(Predecessor::Parent) => view.own().tree.parent.map_or(Hop::Abort, Hop::To),
            Ok(Predecessor::Child(c)) => Hop::To(c),
            Err(_) => Hop::Abort,
        }
    }

    fn extend(&self, view: &View<'_, CyclicRegs>, from: NodeId, p: &Probe<CycleMax>) -> CycleMax {
        let x = view.node();
        let up = view.state(from).tree.parent == Some(x);
        let rank = view.net().rank(Edge::new(from, x));
        let max = match p.payload.max {
            Some(m) if m.0 > rank => Some(m),
            _ => Some((rank, up)),
        };
        CycleMax { dest: p.payload.dest, max }
    }

    fn decide(&self, view: &View<'_, CyclicRegs>, p: &Probe<CycleMax>) -> Verdict {
        let v = view.node();
        let u = p.init;
        if !view.net().is_edge(u, v) || tree_adjacent(u, view.state(u), v, view.own()) {
            return Verdict::Keep(Outcome::Aborted);
        }
        let e = view.net().rank(Edge::new(u, v));
        match p.payload.max {
            Some((f, up)) if improvement(e, p.payload.max) => {
                if up {
                    Verdict::Forward { cut: Some(f.edge()), attach: v }
                } else {
                    Verdict::Backward { cut: Some(f.edge()), attach: u }
                }
            }
            _ => Verdict::Keep(Outcome::Verified),
        }
    }
}

impl MstCyclic {
    const TREE_REGS: [&'static str; 3] = ["parent", "depth", "scan"];

    fn next(&self, view: &View<'_, CyclicRegs>) -> Option<CyclicRegs> {
        let net = view.net();
        let u = view.node();
        let own = view.own();
        let root = cyclic_root(net);
        if let Some(t) = tree_step(view, Rooting::Designated(root), true) {
            return Some(CyclicRegs { tree: t, ..own.clone() });
        }
        if let Some(mv) = walk_step(self, view) {
            let mut s = own.clone();
            s.probe = mv.probe;
            if let Some(t) = mv.tree {
                s.tree = t;
            }
            return Some(s);
        }
        let acc = access();
        let holds = acc.holds(view, root);
        if holds && own.probe.is_none() {
            let targets = inspection_targets(view);
            if let Some(&v) = targets.get(own.scan) {
                let dest = view.state(v).token.label;
                let probe = Probe::start(u, Target::Node(v), CycleMax { dest, max: None });
                return Some(CyclicRegs { scan: own.scan + 1, probe: Some(probe), ..own.clone() });
            }
        }
        if !holds && own.scan != 0 {
            return Some(CyclicRegs { scan: 0, ..own.clone() });
        }
        // The token is frozen while this node's own inspection runs.
        if own.probe.as_ref().is_some_and(|p| p.init == u) {
            return None;
        }
        token_step(view, root, acc).map(|t| CyclicRegs { token: t, ..own.clone() })
    }
}

impl Protocol for MstCyclic {
    type State = CyclicRegs;

    fn name(&self) -> String {
        "mst-cyclic".into()
    }

    fn schema(&self) -> Vec<RegisterSpec> {
        let mut s = tree_schema().to_vec();
        s.extend(token_schema());
        s.push(RegisterSpec::new("scan", Encoding::Int(Bound::Degree)));
        s.push(RegisterSpec::new("probe", Encoding::Opaque(probe_bits)));
        s
    }

    fn init(&self, net: &Graph, u: NodeId) -> CyclicRegs {
        let tree = if u == cyclic_root(net) {
            TreeRegs::default()
        } else {
            TreeRegs { parent: None, depth: depth_ceiling(net) }
        };
        let token = TokenRegs { cursor: net.max_degree() + 1, ..TokenRegs::default() };
        CyclicRegs { tree, token, scan: 0, probe: None }
    }

    fn activable(&self, view: &View<'_, CyclicRegs>) -> bool {
        self.next(view).is_some()
    }

    fn step(&self, view: &View<'_, CyclicRegs>, _rng: &mut SimRng) -> CyclicRegs {
        self.next(view).unwrap_or_else(|| view.own().clone())
    }

    fn legitimate(&self, net: &Graph, cfg: &[CyclicRegs]) -> bool {
        let root = cyclic_root(net);
        let trees: Vec<TreeRegs> = cfg.iter().map(|s| s.tree.clone()).collect();
        if !tree_coherent(net, Rooting::Designated(root), &trees) || cfg.iter().any(|s| s.probe.is_some()) {
            return false;
        }
        let parents: Vec<_> = trees.iter().map(|t| t.parent).collect();
        if parent_edges(net, &parents) != Some(mst_reference(net)) {
            return false;
        }
        let tokens: Vec<TokenRegs> = cfg.iter().map(|s| s.token.clone()).collect();
        token_legitimate(net, &parents, root, &tokens)
    }

    fn silent(&self) -> bool {
        false
    }

    fn get(&self, s: &CyclicRegs, register: &str) -> Option<Value> {
        match register {
            "probe" => Some(Value::Opaque(s.probe.as_ref().map_or("-".into(), |p| p.to_string()))),
            r if Self::TREE_REGS.contains(&r) => {
                Flat { parent: s.tree.parent, depth: s.tree.depth, scan: s.scan }.register(r)
            }
            r => s.token.register(r),
        }
    }

    fn put(&self, s: &mut CyclicRegs, register: &str, v: Value) -> Result<(), EngineError> {
        match register {
            "probe" => match v {
                Value::Opaque(ref x) if x == "-" => {
                    s.probe = None;
                    Ok(())
                }
                _ => Err(EngineError::OutOfDomain { register: register.into(), value: v.to_string() }),
            },
            r if Self::TREE_REGS.contains(&r) => {
                let mut f = Flat { parent: s.tree.parent, depth: s.tree.depth, scan: s.scan };
                f.set_register(r, v)?;
                s.tree = TreeRegs { parent: f.parent, depth: f.depth };
                s.scan = f.scan;
                Ok(())
            }
            r => s.token.set_register(r, v),
        }
    }

    fn corrupt(&self, net: &Graph, u: NodeId, s: &mut CyclicRegs, register: &str, rng: &mut SimRng) -> Result<(), EngineError> {
        if register == "probe" {
            s.probe = random_probe(net, u, rng).map(|mut p: Probe<CycleMax>| {
                p.payload.dest = rand::Rng::gen_range(rng, 0..=net.n());
                p
            });
            return Ok(());
        }
        let spec = self
            .schema()
            .into_iter()
            .find(|r| r.name == register)
            .ok_or_else(|| EngineError::UnknownRegister(register.to_string()))?;
        let v = spec.encoding.random(net, u, rng);
        self.put(s, register, v)
    }

    fn parent(&self, s: &CyclicRegs) -> Option<Option<NodeId>> {
        Some(s.tree.parent)
    }

    fn on_event(&self, _net: &Graph, cfg: &mut [CyclicRegs], ev: &Event) {
        if let Event::Weight { edge, .. } = ev {
            abort_at(cfg, *edge);
        }
    }
}

/// Marks the uncommitted probe records at both endpoints of a re-weighted edge.
pub(crate) fn abort_at<P>(cfg: &mut [impl AsProbe<P>], e: Edge) {
    for x in [e.lo(), e.hi()] {
        if let Some(p) = cfg[x].probe_mut() {
            if p.uncommitted() {
                p.abort = true;
            }
        }
    }
}

pub(crate) trait AsProbe<P> {
    fn probe_mut(&mut self) -> Option<&mut Probe<P>>;
}

impl AsProbe<CycleMax> for CyclicRegs {
    fn probe_mut(&mut self) -> Option<&mut Probe<CycleMax>> {
        self.probe.as_mut()
    }
}

impl Formation for MstCyclic {
    fn formed(&self, net: &Graph, cfg: &[CyclicRegs]) -> bool {
        let trees: Vec<TreeRegs> = cfg.iter().map(|s| s.tree.clone()).collect();
        tree_coherent(net, Rooting::Designated(cyclic_root(net)), &trees) && cfg.iter().all(|s| s.probe.is_none())
    }
}

/// Tree edges of a configuration, if its parent map is a spanning tree.
pub fn tree_edges(net: &Graph, parents: &[Option<NodeId>]) -> Option<BTreeSet<Edge>> {
    crate::graph::is_spanning_parent_map(net, parents).then(|| parent_edges(net, parents)).flatten()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run, Daemon, RunOptions};
    use crate::Network;
    use rand::SeedableRng;

    fn regs(parent: Option<NodeId>, depth: usize, label: usize) -> CyclicRegs {
        CyclicRegs { tree: TreeRegs { parent, depth }, token: TokenRegs { label, ..Default::default() }, ..Default::default() }
    }

    #[test]
    fn targets_smaller_labels_first() {
        // u = 0 with non-tree neighbors labelled 7 and 2; tree edge to 3.
        let net = Network::new(4, &[(0, 1, 1), (0, 2, 1), (0, 3, 1)]).unwrap();
        let cfg = vec![regs(Some(3), 1, 5), regs(None, 0, 7), regs(None, 0, 2), regs(None, 0, 0)];
        assert_eq!(inspection_targets(&View::new(&net, 0, &cfg)), vec![2]);
        let lone = vec![regs(Some(3), 1, 5), regs(None, 0, 7), regs(Some(3), 1, 9), regs(None, 0, 0)];
        assert!(inspection_targets(&View::new(&net, 0, &lone)).is_empty());
    }

    #[test]
    fn decision_rule() {
        let r = |w: u64| Rank { weight: w, lo: 0, hi: 1 };
        assert!(improvement(r(2), Some((r(9), true))));
        assert!(!improvement(r(9), Some((r(9), true))));
        assert!(!improvement(r(9), Some((r(4), false))));
    }

    #[test]
    fn converges_from_clean_start() {
        let mut rng = SimRng::seed_from_u64(5);
        for seed in 0..6 {
            let net = crate::gen::random_connected(8, 6, 50, &mut rng);
            let init = MstCyclic.initial_configuration(&net);
            let rep = run(&MstCyclic, &net, init, Daemon::distributed(seed), &RunOptions::rounds(20_000)).unwrap();
            assert!(rep.converged, "seed {seed}");
        }
    }
}
