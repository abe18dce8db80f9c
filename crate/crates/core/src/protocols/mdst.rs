//! Low-degree spanning tree by cycle searches and degree-reducing exchanges.
//!
//! The tree is rooted at the smallest id through root claims. The root learns
//! the maximum tree degree `k` by convergecast and broadcasts it. On a timer,
//! the smaller endpoint of each non-tree edge launches a depth-first search
//! along the tree toward the other endpoint, recording id, degree and
//! blocking mark of every node on the current path. At the far end, if an
//! inner node has degree `k` (or `k - 1` and is marked) and both endpoints
//! are light enough, the edge replaces the path edge above or below that
//! node. Otherwise endpoints of degree `k - 1` mark themselves, so that later
//! searches unload them first.

use rand::Rng;

use super::tree::{children, depth_ceiling, tree_coherent, HasTree, Rooting, TreeRegs};
use super::walk::{explore, probe_header_bits, random_probe, walk_step, Hop, Outcome, Probe, Target, Verdict, Walker};
use super::Formation;
use crate::engine::{ceil_log2, Bound, Encoding, Event, Protocol, RegisterSpec, SimRng, Value, View};
use crate::graph::{parent_edges, Edge, NodeId};
use crate::oracles::is_degree_witness;
use crate::register_access;
use crate::{EngineError, Graph};

/// One node of a search path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rec {
    pub id: NodeId,
    pub deg: usize,
    pub bad: bool,
    /// The search entered this node from its parent.
    pub down: bool,
}

/// How light the endpoints of an exchanged edge must be, for maximum degree `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Threshold {
    /// Degree below `k - 2`.
    Strict,
    /// Degree at most `k - 2`; needed for the one-above-optimal guarantee.
    #[default]
    Relaxed,
}

impl Threshold {
    pub fn admits(self, d: usize, k: usize) -> bool {
        match self {
            Threshold::Strict => d + 2 < k,
            Threshold::Relaxed => d + 2 <= k,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    /// Add the searched edge and remove `cut`; `up` if the search climbed it.
    Exchange { cut: Edge, up: bool },
    Blocked,
    Nothing,
}

/// Decision at the end of a search over `recs` (initiator first, target last).
pub fn reduce_degree_decision(recs: &[Rec], k: usize, t: Threshold) -> Decision {
    if recs.len() < 3 {
        return Decision::Nothing;
    }
    let last = recs.len() - 1;
    let heavy = (1..last).find(|&i| recs[i].deg == k || (recs[i].bad && recs[i].deg + 1 == k));
    let Some(i) = heavy else {
        return Decision::Nothing;
    };
    if t.admits(recs[0].deg, k) && t.admits(recs[last].deg, k) {
        Decision::Exchange { cut: Edge::new(recs[i - 1].id, recs[i].id), up: !recs[i].down }
    } else {
        Decision::Blocked
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct MdstRegs {
    pub tree: TreeRegs,
    pub claim: NodeId,
    /// Largest tree degree in the subtree.
    pub sub: usize,
    pub kmax: usize,
    /// Marked as blocking while the maximum degree was this value.
    pub bad: Option<usize>,
    pub timer: usize,
    pub port: usize,
    pub probe: Option<Probe<Vec<Rec>>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
struct Flat {
    parent: Option<NodeId>,
    depth: usize,
    claim: usize,
    sub: usize,
    kmax: usize,
    timer: usize,
    port: usize,
}

register_access!(Flat { parent, depth, claim, sub, kmax, timer, port });

impl Flat {
    fn of(s: &MdstRegs) -> Self {
        Flat {
            parent: s.tree.parent,
            depth: s.tree.depth,
            claim: s.claim,
            sub: s.sub,
            kmax: s.kmax,
            timer: s.timer,
            port: s.port,
        }
    }

    fn store(self, s: &mut MdstRegs) {
        s.tree = TreeRegs { parent: self.parent, depth: self.depth };
        s.claim = self.claim;
        s.sub = self.sub;
        s.kmax = self.kmax;
        s.timer = self.timer;
        s.port = self.port;
    }
}

impl HasTree for MdstRegs {
    fn tree(&self) -> &TreeRegs {
        &self.tree
    }
}

fn tree_degree(view: &View<'_, MdstRegs>) -> usize {
    children(view).count() + usize::from(view.own().tree.parent.is_some())
}

fn marked(s: &MdstRegs, deg: usize) -> bool {
    s.bad == Some(s.kmax) && deg + 1 == s.kmax
}

fn tree_adjacent(a: NodeId, sa: &MdstRegs, b: NodeId, sb: &MdstRegs) -> bool {
    sa.tree.parent == Some(b) || sb.tree.parent == Some(a)
}

const TIMER_FACTOR: u64 = 2;

fn bad_bits(net: &Graph) -> usize {
    1 + ceil_log2(net.max_degree() as u64 + 2)
}

/// Width of a search's record list, which travels with the probe.
pub fn search_bits(net: &Graph, s: &MdstRegs) -> usize {
    let lg = ceil_log2(net.n() as u64);
    let per = lg + ceil_log2(net.max_degree() as u64 + 1) + 2;
    s.probe.as_ref().map_or(0, |p| p.payload.len() * per)
}

/// Claim-tree repair: invalid parents detach, smaller claims are adopted.
/// Returns the new tree registers and claim.
pub fn claim_step(view: &View<'_, MdstRegs>) -> Option<(TreeRegs, NodeId)> {
    let net = view.net();
    let x = view.node();
    let own = view.own();
    let ceil = depth_ceiling(net);
    let alone = (TreeRegs { parent: None, depth: 0 }, x);
    match own.tree.parent {
        None => {
            if own.claim != x || own.tree.depth != 0 {
                return Some(alone);
            }
        }
        Some(p) => {
            if p == x || !net.is_edge(x, p) {
                return Some(alone);
            }
            let sp = view.state(p);
            if sp.claim != own.claim || own.claim >= x || sp.tree.depth + 1 >= ceil {
                return Some(alone);
            }
            if own.tree.depth != sp.tree.depth + 1 {
                return Some((TreeRegs { parent: Some(p), depth: sp.tree.depth + 1 }, own.claim));
            }
        }
    }
    view.neighbors()
        .filter(|(_, s)| s.claim < own.claim && s.tree.depth + 1 < ceil)
        .min_by_key(|(nb, s)| (s.claim, s.tree.depth, nb.node))
        .map(|(nb, s)| (TreeRegs { parent: Some(nb.node), depth: s.tree.depth + 1 }, s.claim))
}

/// Degree-reduction protocol (`mdst`).
#[derive(Clone, Copy, Debug, Default)]
pub struct Mdst {
    pub threshold: Threshold,
}

impl Walker<MdstRegs> for Mdst {
    type Payload = Vec<Rec>;

    fn probe<'a>(&self, s: &'a MdstRegs) -> Option<&'a Probe<Vec<Rec>>> {
        s.probe.as_ref()
    }

    fn tree<'a>(&self, s: &'a MdstRegs) -> &'a TreeRegs {
        &s.tree
    }

    fn navigate(&self, view: &View<'_, MdstRegs>, p: &Probe<Vec<Rec>>) -> Hop {
        explore(self, view, p)
    }

    fn extend(&self, view: &View<'_, MdstRegs>, from: NodeId, p: &Probe<Vec<Rec>>) -> Vec<Rec> {
        let own = view.own();
        let deg = tree_degree(view);
        let mut recs = p.payload.clone();
        recs.push(Rec { id: view.node(), deg, bad: marked(own, deg), down: own.tree.parent == Some(from) });
        recs
    }

    fn decide(&self, view: &View<'_, MdstRegs>, p: &Probe<Vec<Rec>>) -> Verdict {
        let x = view.node();
        let u = p.init;
        let own = view.own();
        if !view.net().is_edge(u, x) || tree_adjacent(u, view.state(u), x, own) {
            return Verdict::Keep(Outcome::Aborted);
        }
        let mut recs = p.payload.clone();
        if let Some(last) = recs.last_mut() {
            last.deg = tree_degree(view);
        }
        match reduce_degree_decision(&recs, own.kmax, self.threshold) {
            Decision::Exchange { cut, up: true } => Verdict::Forward { cut: Some(cut), attach: x },
            Decision::Exchange { cut, up: false } => Verdict::Backward { cut: Some(cut), attach: u },
            Decision::Blocked => Verdict::Keep(Outcome::Blocked),
            Decision::Nothing => Verdict::Keep(Outcome::Verified),
        }
    }
}

impl Mdst {
    const FLAT: [&'static str; 7] = ["parent", "depth", "claim", "sub", "kmax", "timer", "port"];

    pub fn relaxed() -> Self {
        Mdst { threshold: Threshold::Relaxed }
    }

    fn period(net: &Graph) -> usize {
        TIMER_FACTOR as usize * net.n()
    }

    fn next(&self, view: &View<'_, MdstRegs>) -> Option<MdstRegs> {
        let net = view.net();
        let x = view.node();
        let own = view.own();
        if let Some((tree, claim)) = claim_step(view) {
            return Some(MdstRegs { tree, claim, ..own.clone() });
        }
        let deg = tree_degree(view);
        let sub = children(view).map(|c| view.state(c).sub).fold(deg, usize::max);
        if own.sub != sub {
            return Some(MdstRegs { sub, ..own.clone() });
        }
        let kmax = own.tree.parent.map_or(own.sub, |p| view.state(p).kmax);
        if own.kmax != kmax {
            return Some(MdstRegs { kmax, ..own.clone() });
        }
        if own.bad.is_some() && !marked(own, deg) {
            return Some(MdstRegs { bad: None, ..own.clone() });
        }
        if let Some(mv) = walk_step(self, view) {
            let mut s = own.clone();
            s.probe = mv.probe;
            if let Some(t) = mv.tree {
                s.tree = t;
            }
            let blocked = mv.decided == Some(Verdict::Keep(Outcome::Blocked)) || mv.finished == Some(Outcome::Blocked);
            if blocked && deg + 1 == own.kmax {
                s.bad = Some(own.kmax);
            }
            return Some(s);
        }
        if own.probe.is_some() {
            return None;
        }
        if own.timer > 0 {
            return Some(MdstRegs { timer: own.timer.min(Self::period(net)) - 1, ..own.clone() });
        }
        let d = view.degree();
        let start = if (1..=d).contains(&own.port) { own.port } else { 1 };
        let pick = (0..d).map(|i| (start - 1 + i) % d + 1).find_map(|port| {
            let nb = net.neighbor_at(x, port)?;
            let v = nb.node;
            (x < v && !tree_adjacent(x, own, v, view.state(v))).then_some((port, v))
        });
        let mut s = MdstRegs { timer: Self::period(net), ..own.clone() };
        if let Some((port, v)) = pick {
            let rec = Rec { id: x, deg, bad: marked(own, deg), down: false };
            s.port = port % d + 1;
            s.probe = Some(Probe::start(x, Target::Node(v), vec![rec]));
        }
        Some(s)
    }
}

fn min_id(net: &Graph) -> NodeId {
    net.nodes().min().unwrap_or(0)
}

impl Protocol for Mdst {
    type State = MdstRegs;

    fn name(&self) -> String {
        "mdst".into()
    }

    fn schema(&self) -> Vec<RegisterSpec> {
        vec![
            RegisterSpec::new("parent", Encoding::Node),
            RegisterSpec::new("depth", Encoding::Int(Bound::Scaled(super::tree::DEPTH_FACTOR))),
            RegisterSpec::new("claim", Encoding::Int(Bound::Nodes)),
            RegisterSpec::new("sub", Encoding::Int(Bound::Degree)),
            RegisterSpec::new("kmax", Encoding::Int(Bound::Degree)),
            RegisterSpec::new("bad", Encoding::Opaque(bad_bits)),
            RegisterSpec::new("timer", Encoding::Int(Bound::Scaled(TIMER_FACTOR))),
            RegisterSpec::new("port", Encoding::Int(Bound::Degree)),
            RegisterSpec::new("probe", Encoding::Opaque(probe_header_bits)),
        ]
    }

    fn init(&self, _net: &Graph, u: NodeId) -> MdstRegs {
        MdstRegs { claim: u, port: 1, ..MdstRegs::default() }
    }

    fn activable(&self, view: &View<'_, MdstRegs>) -> bool {
        self.next(view).is_some()
    }

    fn step(&self, view: &View<'_, MdstRegs>, _rng: &mut SimRng) -> MdstRegs {
        self.next(view).unwrap_or_else(|| view.own().clone())
    }

    fn legitimate(&self, net: &Graph, cfg: &[MdstRegs]) -> bool {
        let trees: Vec<TreeRegs> = cfg.iter().map(|s| s.tree.clone()).collect();
        let root = min_id(net);
        if !tree_coherent(net, Rooting::Forest, &trees) || cfg.iter().any(|s| s.claim != root) {
            return false;
        }
        let parents: Vec<_> = trees.iter().map(|t| t.parent).collect();
        let Some(edges) = parent_edges(net, &parents) else {
            return false;
        };
        if edges.len() + 1 != net.n() {
            return false;
        }
        let deg = crate::oracles::degrees(net.n(), &edges);
        let k = deg.iter().copied().max().unwrap_or(0);
        let mut sub = deg.clone();
        for u in net.nodes() {
            let mut a = parents[u];
            while let Some(v) = a {
                sub[v] = sub[v].max(deg[u]);
                a = parents[v];
            }
        }
        if cfg.iter().zip(&sub).any(|(s, &m)| s.kmax != k || s.sub != m) {
            return false;
        }
        let witness = net.nodes().filter(|&u| deg[u] == k || marked(&cfg[u], deg[u])).collect();
        is_degree_witness(net, &edges, &witness)
    }

    fn silent(&self) -> bool {
        false
    }

    fn get(&self, s: &MdstRegs, register: &str) -> Option<Value> {
        match register {
            "bad" => Some(Value::Opaque(s.bad.map_or("-".into(), |k| k.to_string()))),
            "probe" => Some(Value::Opaque(s.probe.as_ref().map_or("-".into(), |p| p.to_string()))),
            r => Flat::of(s).register(r),
        }
    }

    fn put(&self, s: &mut MdstRegs, register: &str, v: Value) -> Result<(), EngineError> {
        match register {
            "bad" | "probe" => match v {
                Value::Opaque(ref x) if x == "-" => {
                    if register == "bad" {
                        s.bad = None;
                    } else {
                        s.probe = None;
                    }
                    Ok(())
                }
                Value::Opaque(ref x) if register == "bad" => {
                    s.bad = Some(x.parse().map_err(|_| EngineError::OutOfDomain { register: register.into(), value: x.clone() })?);
                    Ok(())
                }
                _ => Err(EngineError::OutOfDomain { register: register.into(), value: v.to_string() }),
            },
            r if Self::FLAT.contains(&r) => {
                let mut f = Flat::of(s);
                f.set_register(r, v)?;
                f.store(s);
                Ok(())
            }
            r => Err(EngineError::UnknownRegister(r.to_string())),
        }
    }

    fn corrupt(&self, net: &Graph, u: NodeId, s: &mut MdstRegs, register: &str, rng: &mut SimRng) -> Result<(), EngineError> {
        let n = net.n();
        let d = net.max_degree();
        match register {
            "bad" => s.bad = rng.gen_bool(0.5).then(|| rng.gen_range(0..=d + 1)),
            "probe" => {
                s.probe = random_probe(net, u, rng).map(|mut p: Probe<Vec<Rec>>| {
                    let len = rng.gen_range(0..=n.min(4));
                    p.payload = (0..len)
                        .map(|_| Rec { id: rng.gen_range(0..n), deg: rng.gen_range(0..=d), bad: rng.gen(), down: rng.gen() })
                        .collect();
                    p
                })
            }
            r => {
                let spec = self
                    .schema()
                    .into_iter()
                    .find(|x| x.name == r)
                    .ok_or_else(|| EngineError::UnknownRegister(r.to_string()))?;
                let v = spec.encoding.random(net, u, rng);
                self.put(s, r, v)?;
            }
        }
        Ok(())
    }

    fn parent(&self, s: &MdstRegs) -> Option<Option<NodeId>> {
        Some(s.tree.parent)
    }

    fn on_event(&self, _net: &Graph, cfg: &mut [MdstRegs], ev: &Event) {
        if let Event::Weight { edge, .. } = ev {
            super::mst_cyclic::abort_at(cfg, *edge);
        }
    }
}

impl super::mst_cyclic::AsProbe<Vec<Rec>> for MdstRegs {
    fn probe_mut(&mut self) -> Option<&mut Probe<Vec<Rec>>> {
        self.probe.as_mut()
    }
}

impl Formation for Mdst {
    fn formed(&self, net: &Graph, cfg: &[MdstRegs]) -> bool {
        let trees: Vec<TreeRegs> = cfg.iter().map(|s| s.tree.clone()).collect();
        let root = min_id(net);
        tree_coherent(net, Rooting::Forest, &trees) && cfg.iter().all(|s| s.claim == root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run, Daemon, RunOptions};
    use crate::oracles::{max_degree, min_max_degree_exact, tree_path};
    use crate::Network;

    fn rec(id: NodeId, deg: usize) -> Rec {
        Rec { id, deg, bad: false, down: false }
    }

    #[test]
    fn decision_examples() {
        let path = [rec(0, 1), rec(1, 4), rec(2, 1)];
        assert!(matches!(reduce_degree_decision(&path, 4, Threshold::Strict), Decision::Exchange { .. }));
        let boundary = [rec(0, 2), rec(1, 4), rec(2, 1)];
        assert_eq!(reduce_degree_decision(&boundary, 4, Threshold::Strict), Decision::Blocked);
        assert!(matches!(reduce_degree_decision(&boundary, 4, Threshold::Relaxed), Decision::Exchange { .. }));
        let flat = [rec(0, 1), rec(1, 3), rec(2, 1)];
        assert_eq!(reduce_degree_decision(&flat, 4, Threshold::Relaxed), Decision::Nothing);
        let marked = [rec(0, 1), Rec { bad: true, ..rec(1, 3) }, rec(2, 1)];
        assert!(matches!(reduce_degree_decision(&marked, 4, Threshold::Relaxed), Decision::Exchange { .. }));
    }

    #[test]
    fn smaller_claim_is_adopted() {
        let net = Network::unweighted(2, &[(0, 1)]).unwrap();
        // Nodes 0 and 1 standing in for ids 3 and 5.
        let mut cfg = vec![Mdst::relaxed().init(&net, 0), Mdst::relaxed().init(&net, 1)];
        cfg[0].claim = 0;
        let (t, c) = claim_step(&View::new(&net, 1, &cfg)).unwrap();
        assert_eq!((t.parent, c), (Some(0), 0));
        assert_eq!(claim_step(&View::new(&net, 0, &cfg)), None);
    }

    #[test]
    fn ghost_claim_dies_out() {
        // Nodes 1 and 2 claim a root 0 that is not there: 0 is isolated from them by its claim.
        let net = crate::gen::path(3);
        let mut cfg: Vec<MdstRegs> = (0..3).map(|u| Mdst::relaxed().init(&net, u)).collect();
        cfg[0].claim = 0;
        cfg[1] = MdstRegs { tree: TreeRegs { parent: Some(2), depth: 1 }, claim: 0, ..cfg[1].clone() };
        cfg[2] = MdstRegs { tree: TreeRegs { parent: Some(1), depth: 2 }, claim: 0, ..cfg[2].clone() };
        let rep = run(&Mdst::relaxed(), &net, cfg, Daemon::distributed(1), &RunOptions::rounds(2000)).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.final_config[2].tree.parent, Some(1));
        assert_eq!(rep.final_config[1].tree.parent, Some(0));
    }

    #[test]
    fn search_records_the_tree_path() {
        // Tree 0-1-2-3 plus 1-4; non-tree edge 0-3 spans 1, 2.
        let net = Network::unweighted(5, &[(0, 1), (1, 2), (2, 3), (1, 4), (0, 3)]).unwrap();
        let parents = [None, Some(0), Some(1), Some(2), Some(1)];
        let mut cfg: Vec<MdstRegs> = (0..5)
            .map(|u| MdstRegs {
                tree: TreeRegs { parent: parents[u], depth: [0, 1, 2, 3, 2][u] },
                claim: 0,
                kmax: 9,
                timer: 1000,
                ..MdstRegs::default()
            })
            .collect();
        cfg[0].probe = Some(Probe::start(0, Target::Node(3), vec![rec(0, 1)]));
        let m = Mdst::relaxed();
        for _ in 0..200 {
            for u in 0..5 {
                if let Some(mv) = walk_step(&m, &View::new(&net, u, &cfg)) {
                    if mv.decided.is_some() {
                        let ids: Vec<NodeId> = cfg[3].probe.as_ref().unwrap().payload.iter().map(|r| r.id).collect();
                        let tree = parent_edges(&net, &parents).unwrap();
                        assert_eq!(Some(ids), tree_path(5, &tree, 0, 3));
                        return;
                    }
                    cfg[u].probe = mv.probe;
                }
            }
        }
        panic!("search never reached its target");
    }

    #[test]
    fn star_inside_wheel_is_flattened() {
        // Hub 0 with a rim cycle 1..5: the exchange rule must unload the hub.
        let mut edges: Vec<(NodeId, NodeId)> = (1..6).map(|i| (0, i)).collect();
        edges.extend((1..6).map(|i| (i, i % 5 + 1)));
        let net = Network::unweighted(6, &edges).unwrap();
        let rep = run(&Mdst::relaxed(), &net, Mdst::relaxed().initial_configuration(&net), Daemon::distributed(3), &RunOptions::rounds(5000)).unwrap();
        assert!(rep.converged);
        let parents: Vec<_> = rep.final_config.iter().map(|s| s.tree.parent).collect();
        let t = parent_edges(&net, &parents).unwrap();
        assert!(max_degree(6, &t) <= min_max_degree_exact(&net).unwrap() + 1);
    }
}
