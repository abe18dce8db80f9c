//! Silent MST over heavy/light ancestry labels.
//!
//! Every parentless node roots a fragment. Subtree sizes pick each node's
//! heavy child and labels follow from the parent's label, so two nodes of a
//! fragment find their common ancestor from their labels alone, and a node
//! tells internal from outgoing edges by comparing the first pair.
//!
//! The root broadcasts a control word and waits for a summary of its whole
//! fragment carrying the same tag. A pass inspects the internal non-tree
//! edges in increasing order: a probe walks the cycle and exchanges the edge
//! in when it is lighter than the heaviest edge met. Only after a pass during
//! which the root saw nothing incoherent does the fragment join the fragment
//! across its lightest outgoing edge, and only if that one has a smaller root.

use std::collections::BTreeSet;

use rand::Rng;

use super::tree::{children, tree_coherent, tree_schema, tree_step, HasTree, Rooting, TreeRegs};
use super::walk::{probe_header_bits, random_probe, walk_step, Hop, Outcome, Probe, Target, Verdict, Walker};
use super::Formation;
use crate::engine::{ceil_log2, Bound, Encoding, Event, Protocol, RegisterSpec, SimRng, Value, View};
use crate::graph::{parent_edges, Edge, NodeId};
use crate::label::LcaLabel;
use crate::oracles::mst_reference;
use crate::register_access;
use crate::{EngineError, Graph, Rank};

/// Tags cycle modulo this.
pub const TAGS: u8 = 4;
const TAG_BITS: usize = 2;

/// Control word broadcast from the root.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Ctl {
    pub root: NodeId,
    pub tag: u8,
    /// Scan threshold: internal edges up to this rank are settled.
    pub cur: Option<Rank>,
    pub insp: Option<Rank>,
    pub merge: Option<Rank>,
}

impl Ctl {
    fn bumped(self) -> Ctl {
        Ctl { tag: (self.tag + 1) % TAGS, ..self }
    }
}

/// Convergecast summary of a subtree, valid for the control word `(root, tag)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Summary {
    pub root: NodeId,
    pub tag: u8,
    /// Every register in the subtree agrees with its neighbors.
    pub ok: bool,
    /// No probe record in the subtree.
    pub quiet: bool,
    /// Lightest internal non-tree edge above the threshold.
    pub cand: Option<Rank>,
    /// Lightest outgoing edge, with the fragment id on the other side.
    pub out: Option<(Rank, NodeId)>,
    /// Some node is in charge of the current inspection or merge.
    pub owner: bool,
    pub done: Option<Outcome>,
}

impl Summary {
    fn fresh(&self, c: &Ctl) -> bool {
        (self.root, self.tag) == (c.root, c.tag)
    }
}

/// Folds a child's summary into a node's own.
pub fn combine(a: Summary, b: &Summary) -> Summary {
    let min = |x: Option<Rank>, y: Option<Rank>| match (x, y) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    };
    let out = match (a.out, b.out) {
        (Some(x), Some(y)) => Some(if y.0 < x.0 { y } else { x }),
        (x, y) => x.or(y),
    };
    Summary {
        ok: a.ok && b.ok,
        quiet: a.quiet && b.quiet,
        cand: min(a.cand, b.cand),
        out,
        owner: a.owner || b.owner,
        done: a.done.or(b.done),
        ..a
    }
}

/// Probe payload. Inspections carry the far endpoint's label and the
/// heaviest edge so far; merges climb to the root and carry neither.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct LcaProbe {
    /// Control word `(root, tag)` the probe was launched under.
    pub key: (NodeId, u8),
    pub dest: Option<LcaLabel>,
    pub max: Option<(Rank, bool)>,
    /// Node at the far end of the chain, handed back with the verdict.
    pub top: NodeId,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct LcaRegs {
    pub tree: TreeRegs,
    pub size: usize,
    pub heavy: Option<NodeId>,
    pub label: LcaLabel,
    pub ctl: Ctl,
    pub agg: Summary,
    pub res: Option<((NodeId, u8), Outcome)>,
    /// Root only: nothing incoherent seen since the pass began.
    pub clean: bool,
    /// Root only: fragment size when the pass began.
    pub pass_size: usize,
    pub probe: Option<Probe<LcaProbe>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
struct Flat {
    parent: Option<NodeId>,
    depth: usize,
    size: usize,
    heavy: Option<NodeId>,
    label: LcaLabel,
    clean: bool,
    pass_size: usize,
}

register_access!(Flat { parent, depth, size, heavy, label, clean, pass_size });

impl Flat {
    fn of(s: &LcaRegs) -> Self {
        Flat {
            parent: s.tree.parent,
            depth: s.tree.depth,
            size: s.size,
            heavy: s.heavy,
            label: s.label.clone(),
            clean: s.clean,
            pass_size: s.pass_size,
        }
    }

    fn store(self, s: &mut LcaRegs) {
        s.tree = TreeRegs { parent: self.parent, depth: self.depth };
        s.size = self.size;
        s.heavy = self.heavy;
        s.label = self.label;
        s.clean = self.clean;
        s.pass_size = self.pass_size;
    }
}

impl HasTree for LcaRegs {
    fn tree(&self) -> &TreeRegs {
        &self.tree
    }
}

fn lg(net: &Graph) -> usize {
    ceil_log2(net.n() as u64)
}

fn rank_bits(net: &Graph) -> usize {
    ceil_log2(net.max_weight() + 1) + 2 * lg(net)
}

/// Most pairs a label has in a correctly decomposed tree.
pub fn max_pairs(n: usize) -> usize {
    (usize::BITS - n.max(1).leading_zeros()) as usize
}

fn ctl_bits(net: &Graph) -> usize {
    lg(net) + TAG_BITS + 3 * (rank_bits(net) + 1)
}

fn agg_bits(net: &Graph) -> usize {
    2 * lg(net) + TAG_BITS + 3 + (rank_bits(net) + 1) * 2 + 3
}

fn res_bits(net: &Graph) -> usize {
    1 + lg(net) + TAG_BITS + 2
}

fn probe_bits(net: &Graph) -> usize {
    let label = max_pairs(net.n()) * 2 * lg(net) + ceil_log2(max_pairs(net.n()) as u64 + 1);
    probe_header_bits(net) + lg(net) + TAG_BITS + 1 + label + rank_bits(net) + 2 + lg(net)
}

fn tree_adjacent(a: NodeId, sa: &LcaRegs, b: NodeId, sb: &LcaRegs) -> bool {
    sa.tree.parent == Some(b) || sb.tree.parent == Some(a)
}

/// Label a node should carry given its parent's registers.
pub fn assign_label(view: &View<'_, LcaRegs>) -> LcaLabel {
    let x = view.node();
    match view.own().tree.parent {
        None => LcaLabel::root(x),
        Some(p) => {
            let sp = view.state(p);
            if sp.heavy == Some(x) {
                sp.label.heavy_child()
            } else {
                sp.label.light_child(x)
            }
        }
    }
}

/// Child with the largest subtree, smaller id on ties.
pub fn heavy_child(view: &View<'_, LcaRegs>) -> Option<NodeId> {
    children(view).max_by_key(|&c| (view.state(c).size, std::cmp::Reverse(c)))
}

fn subtree_size(view: &View<'_, LcaRegs>) -> usize {
    let s = 1 + children(view).map(|c| view.state(c).size).sum::<usize>();
    s.min(view.net().n())
}

/// Labels longer than a correct decomposition allows wait for sizes to settle.
fn admissible(n: usize, l: &LcaLabel) -> bool {
    l.len() <= 2 * max_pairs(n) && l.0.iter().all(|&(_, d)| d < n)
}

fn structure_step(view: &View<'_, LcaRegs>) -> Option<LcaRegs> {
    let own = view.own();
    let size = subtree_size(view);
    let heavy = heavy_child(view);
    if own.size != size || own.heavy != heavy {
        return Some(LcaRegs { size, heavy, ..own.clone() });
    }
    let label = assign_label(view);
    (own.label != label && admissible(view.net().n(), &label)).then(|| LcaRegs { label, ..own.clone() })
}

fn coherent(view: &View<'_, LcaRegs>) -> bool {
    let own = view.own();
    tree_step(view, Rooting::Forest, false).is_none()
        && own.size == subtree_size(view)
        && own.heavy == heavy_child(view)
        && own.label == assign_label(view)
}

/// Whether this node handles the current inspection or merge, and the far endpoint.
fn duty(view: &View<'_, LcaRegs>) -> Option<NodeId> {
    let x = view.node();
    let own = view.own();
    if let Some(r) = own.ctl.insp {
        return (r.lo == x).then_some(r.hi);
    }
    let r = own.ctl.merge?;
    let e = r.edge();
    if !e.touches(x) || own.label.fragment() != Some(own.ctl.root) {
        return None;
    }
    let y = e.other(x);
    let across = view.net().is_edge(x, y) && view.state(y).label.fragment() != Some(own.ctl.root);
    (across || x == e.lo()).then_some(y)
}

/// What this node alone reports for the current control word.
pub fn contribution(view: &View<'_, LcaRegs>) -> Summary {
    let x = view.node();
    let own = view.own();
    let c = own.ctl;
    let frag = own.label.fragment();
    let mut cand: Option<Rank> = None;
    let mut out: Option<(Rank, NodeId)> = None;
    for (nb, s) in view.neighbors() {
        let v = nb.node;
        if tree_adjacent(x, own, v, s) {
            continue;
        }
        let r = view.net().rank(Edge::new(x, v));
        let other = s.label.fragment();
        if other == frag {
            if c.cur.is_none_or(|t| r > t) && cand.is_none_or(|b| r < b) {
                cand = Some(r);
            }
        } else if out.is_none_or(|b| r < b.0) {
            out = Some((r, other.unwrap_or(usize::MAX)));
        }
    }
    let key = (c.root, c.tag);
    Summary {
        root: c.root,
        tag: c.tag,
        ok: coherent(view) && frag == Some(c.root),
        quiet: own.probe.is_none(),
        cand,
        out,
        owner: duty(view).is_some(),
        done: own.res.filter(|(k, _)| *k == key).map(|(_, o)| o),
    }
}

/// Summary over the subtree, once the control word has reached this node and
/// every child has answered it.
fn summarize(view: &View<'_, LcaRegs>) -> Option<Summary> {
    let own = view.own();
    let c = own.ctl;
    if let Some(p) = own.tree.parent {
        if view.state(p).ctl != c {
            return None;
        }
    }
    let mut s = contribution(view);
    for ch in children(view) {
        let a = &view.state(ch).agg;
        if !a.fresh(&c) {
            return None;
        }
        s = combine(s, a);
    }
    Some(s)
}

/// Move of a root reading its own fresh summary: correction first, then merge.
pub fn root_step(x: NodeId, own: &LcaRegs) -> Option<LcaRegs> {
    let c = own.ctl;
    let a = own.agg;
    if !a.fresh(&c) {
        return None;
    }
    let mut s = own.clone();
    if !a.ok {
        return own.clean.then(|| {
            s.clean = false;
            s
        });
    }
    if !a.quiet {
        return None;
    }
    if let Some(e) = c.insp {
        let o = match a.done {
            Some(o) => o,
            None if a.owner => return None,
            None => Outcome::Aborted,
        };
        let cur = if matches!(o, Outcome::Verified | Outcome::Changed) { Some(e) } else { c.cur };
        s.ctl = Ctl { insp: None, cur, ..c.bumped() };
        return Some(s);
    }
    if c.merge.is_some() {
        if a.done.is_none() && a.owner {
            return None;
        }
        s.ctl = Ctl { merge: None, ..c.bumped() };
        return Some(s);
    }
    if let Some(e) = a.cand {
        s.ctl = Ctl { insp: Some(e), ..c.bumped() };
        return Some(s);
    }
    if !own.clean || own.size != own.pass_size {
        s.ctl = Ctl { cur: None, ..c.bumped() };
        s.clean = true;
        s.pass_size = own.size;
        return Some(s);
    }
    match a.out {
        Some((e, f)) if f < x => {
            s.ctl = Ctl { merge: Some(e), ..c.bumped() };
            Some(s)
        }
        _ => None,
    }
}

/// Label-driven MST with fragment merging (`mst-lca`).
#[derive(Clone, Copy, Debug, Default)]
pub struct MstLca;

impl Walker<LcaRegs> for MstLca {
    type Payload = LcaProbe;

    fn probe<'a>(&self, s: &'a LcaRegs) -> Option<&'a Probe<LcaProbe>> {
        s.probe.as_ref()
    }

    fn tree<'a>(&self, s: &'a LcaRegs) -> &'a TreeRegs {
        &s.tree
    }

    fn navigate(&self, view: &View<'_, LcaRegs>, p: &Probe<LcaProbe>) -> Hop {
        let own = view.own();
        let up = own.tree.parent.map_or(Hop::Abort, Hop::To);
        let Some(dest) = &p.payload.dest else {
            return up;
        };
        if !own.label.is_ancestor_of(dest) {
            return up;
        }
        children(view)
            .find(|&c| view.state(c).label.is_ancestor_of(dest))
            .map_or(Hop::Abort, Hop::To)
    }

    fn extend(&self, view: &View<'_, LcaRegs>, from: NodeId, p: &Probe<LcaProbe>) -> LcaProbe {
        let x = view.node();
        let up = view.state(from).tree.parent == Some(x);
        let rank = view.net().rank(Edge::new(from, x));
        let max = match p.payload.max {
            Some(m) if m.0 > rank => Some(m),
            _ => Some((rank, up)),
        };
        LcaProbe { key: p.payload.key, dest: p.payload.dest.clone(), max, top: x }
    }

    fn relay(&self, own: &LcaProbe, successor: &LcaProbe) -> LcaProbe {
        LcaProbe { top: successor.top, ..own.clone() }
    }

    fn decide(&self, view: &View<'_, LcaRegs>, p: &Probe<LcaProbe>) -> Verdict {
        let x = view.node();
        let u = p.init;
        let own = view.own();
        if p.payload.dest.is_none() {
            // Merge request reaching the root.
            let want = own.ctl.merge.map(|r| r.edge());
            let ok = p.payload.key == (own.ctl.root, own.ctl.tag) && want.is_some_and(|e| e.touches(u));
            return match want {
                Some(e) if ok => Verdict::Forward { cut: None, attach: e.other(u) },
                _ => Verdict::Keep(Outcome::Aborted),
            };
        }
        if !view.net().is_edge(u, x) || tree_adjacent(u, view.state(u), x, own) {
            return Verdict::Keep(Outcome::Aborted);
        }
        let e = view.net().rank(Edge::new(u, x));
        match p.payload.max {
            Some((f, up)) if e < f => {
                if up {
                    Verdict::Forward { cut: Some(f.edge()), attach: x }
                } else {
                    Verdict::Backward { cut: Some(f.edge()), attach: u }
                }
            }
            _ => Verdict::Keep(Outcome::Verified),
        }
    }

    fn may_attach(&self, view: &View<'_, LcaRegs>, p: &Probe<LcaProbe>, attach: NodeId) -> bool {
        if p.payload.dest.is_some() {
            return true;
        }
        // Joining is only ever toward a smaller root, so merges cannot close a cycle.
        let sy = view.state(attach);
        sy.tree.parent != Some(view.node()) && sy.label.fragment().is_some_and(|f| f < p.payload.top)
    }
}

impl MstLca {
    const FLAT: [&'static str; 7] = ["parent", "depth", "size", "heavy", "label", "clean", "pass_size"];

    fn next(&self, view: &View<'_, LcaRegs>) -> Option<LcaRegs> {
        let x = view.node();
        let own = view.own();
        if let Some(t) = tree_step(view, Rooting::Forest, false) {
            return Some(LcaRegs { tree: t, ..own.clone() });
        }
        if let Some(s) = structure_step(view) {
            return Some(s);
        }
        if let Some(mv) = walk_step(self, view) {
            let mut s = own.clone();
            s.probe = mv.probe;
            if let Some(t) = mv.tree {
                s.tree = t;
            }
            if let (Some(o), Some(p)) = (mv.finished, own.probe.as_ref()) {
                if p.payload.key == (own.ctl.root, own.ctl.tag) {
                    s.res = Some((p.payload.key, o));
                }
            }
            return Some(s);
        }
        match own.tree.parent {
            None if own.ctl.root != x => {
                let ctl = Ctl { root: x, cur: None, insp: None, merge: None, ..own.ctl.bumped() };
                return Some(LcaRegs { ctl, clean: false, pass_size: own.size, ..own.clone() });
            }
            Some(p) if view.state(p).ctl != own.ctl => {
                return Some(LcaRegs { ctl: view.state(p).ctl, ..own.clone() });
            }
            _ => {}
        }
        let key = (own.ctl.root, own.ctl.tag);
        if own.res.is_some_and(|(k, _)| k != key) {
            return Some(LcaRegs { res: None, ..own.clone() });
        }
        if let Some(y) = duty(view) {
            if own.res.is_none() && own.probe.is_none() {
                return Some(self.launch(view, y));
            }
        }
        if let Some(a) = summarize(view) {
            if a != own.agg {
                return Some(LcaRegs { agg: a, ..own.clone() });
            }
        }
        if own.tree.parent.is_none() {
            return root_step(x, own);
        }
        None
    }

    fn launch(&self, view: &View<'_, LcaRegs>, y: NodeId) -> LcaRegs {
        let x = view.node();
        let own = view.own();
        let key = (own.ctl.root, own.ctl.tag);
        let failed = LcaRegs { res: Some((key, Outcome::Aborted)), ..own.clone() };
        if !view.net().is_edge(x, y) || tree_adjacent(x, own, y, view.state(y)) {
            return failed;
        }
        let sy = view.state(y);
        let payload = if own.ctl.insp.is_some() {
            if sy.label.fragment() != own.label.fragment() {
                return failed;
            }
            LcaProbe { key, dest: Some(sy.label.clone()), max: None, top: x }
        } else {
            if sy.label.fragment() == own.label.fragment() {
                return failed;
            }
            LcaProbe { key, dest: None, max: None, top: x }
        };
        let target = if payload.dest.is_some() { Target::Node(y) } else { Target::Root };
        LcaRegs { probe: Some(Probe::start(x, target, payload)), ..own.clone() }
    }
}

fn random_rank(net: &Graph, rng: &mut SimRng) -> Option<Rank> {
    if net.m() == 0 || rng.gen_ratio(1, 3) {
        return None;
    }
    net.edges().nth(rng.gen_range(0..net.m())).map(|(e, _)| net.rank(e))
}

fn random_outcome(rng: &mut SimRng) -> Outcome {
    [Outcome::Verified, Outcome::Changed, Outcome::Aborted, Outcome::Blocked][rng.gen_range(0..4)]
}

impl Protocol for MstLca {
    type State = LcaRegs;

    fn name(&self) -> String {
        "mst-lca".into()
    }

    fn schema(&self) -> Vec<RegisterSpec> {
        let mut s = tree_schema().to_vec();
        s.extend([
            RegisterSpec::new("size", Encoding::Int(Bound::Nodes)),
            RegisterSpec::new("heavy", Encoding::Node),
            RegisterSpec::new("label", Encoding::Label),
            RegisterSpec::new("ctl", Encoding::Opaque(ctl_bits)),
            RegisterSpec::new("agg", Encoding::Opaque(agg_bits)),
            RegisterSpec::new("res", Encoding::Opaque(res_bits)),
            RegisterSpec::new("clean", Encoding::Bool),
            RegisterSpec::new("pass_size", Encoding::Int(Bound::Nodes)),
            RegisterSpec::new("probe", Encoding::Opaque(probe_bits)),
        ]);
        s
    }

    fn init(&self, _net: &Graph, u: NodeId) -> LcaRegs {
        LcaRegs {
            tree: TreeRegs::default(),
            size: 1,
            heavy: None,
            label: LcaLabel::root(u),
            ctl: Ctl { root: u, ..Ctl::default() },
            agg: Summary { root: u, ..Summary::default() },
            res: None,
            clean: false,
            pass_size: 1,
            probe: None,
        }
    }

    fn activable(&self, view: &View<'_, LcaRegs>) -> bool {
        self.next(view).is_some()
    }

    fn step(&self, view: &View<'_, LcaRegs>, _rng: &mut SimRng) -> LcaRegs {
        self.next(view).unwrap_or_else(|| view.own().clone())
    }

    fn legitimate(&self, net: &Graph, cfg: &[LcaRegs]) -> bool {
        let trees: Vec<TreeRegs> = cfg.iter().map(|s| s.tree.clone()).collect();
        if !tree_coherent(net, Rooting::Forest, &trees) || cfg.iter().any(|s| s.probe.is_some()) {
            return false;
        }
        let parents: Vec<_> = trees.iter().map(|t| t.parent).collect();
        if parent_edges(net, &parents) != Some(mst_reference(net)) {
            return false;
        }
        net.nodes().all(|u| coherent(&View::new(net, u, cfg)))
    }

    fn get(&self, s: &LcaRegs, register: &str) -> Option<Value> {
        let shown = |x: String| Some(Value::Opaque(x));
        match register {
            "ctl" => shown(format!("{:?}", s.ctl)),
            "agg" => shown(format!("{:?}", s.agg)),
            "res" => shown(s.res.map_or("-".into(), |r| format!("{r:?}"))),
            "probe" => shown(s.probe.as_ref().map_or("-".into(), |p| p.to_string())),
            r => Flat::of(s).register(r),
        }
    }

    fn put(&self, s: &mut LcaRegs, register: &str, v: Value) -> Result<(), EngineError> {
        match register {
            "ctl" | "agg" | "res" | "probe" => match v {
                Value::Opaque(ref x) if x == "-" => {
                    match register {
                        "ctl" => s.ctl = Ctl::default(),
                        "agg" => s.agg = Summary::default(),
                        "res" => s.res = None,
                        _ => s.probe = None,
                    }
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

    fn corrupt(&self, net: &Graph, u: NodeId, s: &mut LcaRegs, register: &str, rng: &mut SimRng) -> Result<(), EngineError> {
        let n = net.n();
        match register {
            "ctl" => {
                s.ctl = Ctl {
                    root: rng.gen_range(0..n),
                    tag: rng.gen_range(0..TAGS),
                    cur: random_rank(net, rng),
                    insp: random_rank(net, rng),
                    merge: random_rank(net, rng),
                };
            }
            "agg" => {
                s.agg = Summary {
                    root: rng.gen_range(0..n),
                    tag: rng.gen_range(0..TAGS),
                    ok: rng.gen(),
                    quiet: rng.gen(),
                    cand: random_rank(net, rng),
                    out: random_rank(net, rng).map(|r| (r, rng.gen_range(0..n))),
                    owner: rng.gen(),
                    done: rng.gen_bool(0.5).then(|| random_outcome(rng)),
                };
            }
            "res" => {
                s.res = rng.gen_bool(0.5).then(|| ((rng.gen_range(0..n), rng.gen_range(0..TAGS)), random_outcome(rng)));
            }
            "probe" => {
                s.probe = random_probe(net, u, rng).map(|mut p: Probe<LcaProbe>| {
                    p.payload = LcaProbe {
                        key: (rng.gen_range(0..n), rng.gen_range(0..TAGS)),
                        dest: rng.gen_bool(0.7).then(|| LcaLabel(vec![(rng.gen_range(0..n), rng.gen_range(0..n))])),
                        max: random_rank(net, rng).map(|r| (r, rng.gen())),
                        top: rng.gen_range(0..n),
                    };
                    p
                });
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

    fn parent(&self, s: &LcaRegs) -> Option<Option<NodeId>> {
        Some(s.tree.parent)
    }

    fn on_event(&self, _net: &Graph, cfg: &mut [LcaRegs], ev: &Event) {
        if let Event::Weight { edge, .. } = ev {
            super::mst_cyclic::abort_at(cfg, *edge);
            for s in cfg.iter_mut() {
                s.clean = false;
            }
        }
    }
}

impl super::mst_cyclic::AsProbe<LcaProbe> for LcaRegs {
    fn probe_mut(&mut self) -> Option<&mut Probe<LcaProbe>> {
        self.probe.as_mut()
    }
}

impl Formation for MstLca {
    fn formed(&self, net: &Graph, cfg: &[LcaRegs]) -> bool {
        let trees: Vec<TreeRegs> = cfg.iter().map(|s| s.tree.clone()).collect();
        tree_coherent(net, Rooting::Forest, &trees)
            && trees.iter().filter(|t| t.parent.is_none()).count() == 1
            && cfg.iter().all(|s| s.probe.is_none())
    }
}

/// Fragments of a forest parent map, by root.
pub fn fragments(parents: &[Option<NodeId>]) -> Vec<BTreeSet<NodeId>> {
    let n = parents.len();
    let root_of = |mut u: NodeId| {
        for _ in 0..n {
            match parents[u] {
                Some(p) => u = p,
                None => return Some(u),
            }
        }
        None
    };
    let mut by_root = std::collections::BTreeMap::<NodeId, BTreeSet<NodeId>>::new();
    for u in 0..n {
        if let Some(r) = root_of(u) {
            by_root.entry(r).or_default().insert(u);
        }
    }
    by_root.into_values().collect()
}
