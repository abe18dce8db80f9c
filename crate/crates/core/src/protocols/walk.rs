//! Probes that lock a tree path and rotate parent pointers along it.
//!
//! A probe is a chain of records, one per node on a tree path, linked by
//! `prev`/`next`. Records double as locks: a node on one probe's path turns
//! every other probe away. The head extends the chain one hop at a time, up
//! toward the root and then down, never back. At the target the host protocol
//! decides whether to keep the tree or to exchange one path edge for the edge
//! closing the cycle. An exchange is carried out by re-parenting path nodes
//! one at a time, either from the initiator forward or from the target
//! backward, and every single re-parenting leaves a tree.
//!
//! The initiator is told how its probe ended when its own record clears.

use std::fmt;
use std::hash::Hash;

use rand::Rng;

use super::tree::TreeRegs;
use crate::engine::{ceil_log2, SimRng, View};
use crate::graph::{Edge, NodeId};
use crate::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    Node(NodeId),
    /// Whatever node is currently the root of the initiator's tree.
    Root,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    /// The target checked the path and left the tree alone.
    Verified,
    Changed,
    /// Lock conflict, stale navigation data or an external event.
    Aborted,
    /// The host refused the exchange for a reason of its own.
    Blocked,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Keep(Outcome),
    /// The initiator re-parents to `attach`, then each successor to its
    /// predecessor until the edge `cut` is reached (`None`: to the end).
    Forward { cut: Option<Edge>, attach: NodeId },
    /// The target re-parents to `attach`, then each predecessor to its
    /// successor until `cut` is reached.
    Backward { cut: Option<Edge>, attach: NodeId },
}

impl Verdict {
    fn cut(&self) -> Option<Edge> {
        match *self {
            Verdict::Forward { cut, .. } | Verdict::Backward { cut, .. } => cut,
            Verdict::Keep(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    Walk,
    /// Dead end of an exploring walk; the predecessor moves on.
    Dead,
    /// Verdict travelling back to the initiator.
    Back(Verdict),
    /// Rotation passed this node; the flag tells whether it re-parented.
    Rot(Verdict, bool),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Probe<P> {
    pub init: NodeId,
    pub target: Target,
    pub prev: Option<NodeId>,
    pub next: Option<NodeId>,
    pub hops: usize,
    /// Entered this node from its parent.
    pub down: bool,
    /// Next port an exploring head tries.
    pub cursor: usize,
    pub phase: Phase,
    /// Set by external events; an exchange not yet started is dropped.
    pub abort: bool,
    pub payload: P,
}

impl<P> Probe<P> {
    pub fn start(init: NodeId, target: Target, payload: P) -> Self {
        Probe { init, target, prev: None, next: None, hops: 0, down: false, cursor: 1, phase: Phase::Walk, abort: false, payload }
    }

    fn same<Q>(&self, other: &Probe<Q>) -> bool {
        self.init == other.init && self.target == other.target
    }

    /// Whether the rotation has not started, so the probe can still be dropped.
    pub fn uncommitted(&self) -> bool {
        matches!(self.phase, Phase::Walk | Phase::Dead | Phase::Back(Verdict::Keep(_) | Verdict::Forward { .. }))
    }
}

impl<P: fmt::Debug> fmt::Display for Probe<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = match self.target {
            Target::Node(v) => v.to_string(),
            Target::Root => "root".into(),
        };
        let opt = |x: Option<NodeId>| x.map_or("-".to_string(), |v| v.to_string());
        write!(
            f,
            "{}>{} {}/{} h{} c{} {:?}{} {:?}",
            self.init,
            t,
            opt(self.prev),
            opt(self.next),
            self.hops,
            self.cursor,
            self.phase,
            if self.abort { " abort" } else { "" },
            self.payload
        )
    }
}

/// Declared width of a probe record without its payload.
pub fn probe_header_bits(net: &Graph) -> usize {
    let lg = ceil_log2(net.n() as u64);
    let hops = ceil_log2(net.n() as u64 + 1);
    let cursor = ceil_log2(net.max_degree() as u64 + 2);
    // init, target, prev, next; cut edge and attach node of the verdict.
    7 * lg + hops + cursor + 1 + 3 + 1 + 1
}

/// Next hop chosen by the head.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hop {
    To(NodeId),
    /// Nothing left to explore from here.
    Dead,
    Abort,
}

/// What a protocol supplies to run probes over its registers.
pub trait Walker<S> {
    type Payload: Clone + Eq + Hash + fmt::Debug;

    fn probe<'a>(&self, s: &'a S) -> Option<&'a Probe<Self::Payload>>;

    fn tree<'a>(&self, s: &'a S) -> &'a TreeRegs;

    fn navigate(&self, view: &View<'_, S>, p: &Probe<Self::Payload>) -> Hop;

    /// Payload of the record the viewed node creates when joining from `from`.
    fn extend(&self, view: &View<'_, S>, from: NodeId, p: &Probe<Self::Payload>) -> Self::Payload;

    /// Decision taken at the target.
    fn decide(&self, view: &View<'_, S>, p: &Probe<Self::Payload>) -> Verdict;

    /// Payload kept when the verdict passes back from the successor's record.
    fn relay(&self, own: &Self::Payload, _successor: &Self::Payload) -> Self::Payload {
        own.clone()
    }

    /// Final check before the first re-parenting to `attach`.
    fn may_attach(&self, _view: &View<'_, S>, _p: &Probe<Self::Payload>, _attach: NodeId) -> bool {
        true
    }
}

/// Register changes produced by one probe move.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkMove<P> {
    pub probe: Option<Probe<P>>,
    pub tree: Option<TreeRegs>,
    /// Set at the target when it takes its decision.
    pub decided: Option<Verdict>,
    /// Set at the initiator when its own record clears.
    pub finished: Option<Outcome>,
}

impl<P> WalkMove<P> {
    fn record(p: Probe<P>) -> Self {
        WalkMove { probe: Some(p), tree: None, decided: None, finished: None }
    }

    fn rotate(p: Probe<P>, tree: TreeRegs) -> Self {
        WalkMove { probe: Some(p), tree: Some(tree), decided: None, finished: None }
    }
}

fn clear<P>(x: NodeId, r: &Probe<P>, outcome: Outcome) -> WalkMove<P> {
    WalkMove { probe: None, tree: None, decided: None, finished: (r.init == x).then_some(outcome) }
}

fn reparent<S, W: Walker<S>>(w: &W, view: &View<'_, S>, to: NodeId) -> TreeRegs {
    TreeRegs { parent: Some(to), depth: w.tree(view.state(to)).depth + 1 }
}

/// The probe of `q`'s owner is the one `r` came from / went to.
fn matching<'a, P>(r: &Probe<P>, q: Option<&'a Probe<P>>) -> Option<&'a Probe<P>> {
    q.filter(|q| q.same(r))
}

fn in_rotation<P>(r: &Probe<P>) -> bool {
    matches!(r.phase, Phase::Rot(..))
}

/// Whether the record is still attached to a live chain ending at its initiator.
fn linked<S, W: Walker<S>>(w: &W, view: &View<'_, S>, r: &Probe<W::Payload>) -> bool {
    let net = view.net();
    let x = view.node();
    if r.init == x {
        return r.prev.is_none() && r.hops == 0;
    }
    let Some(p) = r.prev.filter(|&p| p != x && net.is_edge(x, p)) else {
        return false;
    };
    let Some(q) = matching(r, w.probe(view.state(p))) else {
        return false;
    };
    if q.next != Some(x) || q.hops + 1 != r.hops {
        return false;
    }
    if in_rotation(q) || in_rotation(r) {
        return true;
    }
    // Before any rotation the hop is still a tree edge in its recorded direction.
    if r.down {
        w.tree(view.own()).parent == Some(p)
    } else {
        w.tree(view.state(p)).parent == Some(x)
    }
}

/// Whether moving the head from `x` to `n` is a legal tree hop.
fn valid_hop<S, W: Walker<S>>(w: &W, view: &View<'_, S>, r: &Probe<W::Payload>, n: NodeId) -> bool {
    let x = view.node();
    if Some(n) == r.prev || n == x || !view.net().is_edge(x, n) {
        return false;
    }
    let down = w.tree(view.state(n)).parent == Some(x);
    let up = w.tree(view.own()).parent == Some(n);
    down || (up && !r.down)
}

fn reached<S, W: Walker<S>>(w: &W, view: &View<'_, S>, r: &Probe<W::Payload>) -> bool {
    match r.target {
        Target::Node(v) => v == view.node(),
        Target::Root => w.tree(view.own()).parent.is_none(),
    }
}

fn aborted<P: Clone>(r: &Probe<P>) -> Probe<P> {
    Probe { phase: Phase::Back(Verdict::Keep(Outcome::Aborted)), ..r.clone() }
}

/// One probe move at the viewed node, or `None` if it has nothing to do.
pub fn walk_step<S, W: Walker<S>>(w: &W, view: &View<'_, S>) -> Option<WalkMove<W::Payload>> {
    let x = view.node();
    let Some(r) = w.probe(view.own()) else {
        return accept(w, view);
    };
    if !linked(w, view, r) {
        return Some(clear(x, r, Outcome::Aborted));
    }
    let is_init = r.init == x;
    match r.phase {
        Phase::Rot(v, _) => match v {
            Verdict::Forward { .. } => {
                // Release runs backward from the far end once the rotation got there.
                let successor_left = match r.next {
                    None => true,
                    Some(n) => matching(r, w.probe(view.state(n))).is_none_or(|q| q.prev != Some(x)),
                };
                successor_left.then(|| clear(x, r, Outcome::Changed))
            }
            Verdict::Backward { .. } if is_init => Some(clear(x, r, Outcome::Changed)),
            Verdict::Backward { .. } => None,
            Verdict::Keep(_) => Some(clear(x, r, Outcome::Aborted)),
        },
        Phase::Back(v) if is_init => match v {
            Verdict::Keep(o) => Some(clear(x, r, o)),
            Verdict::Forward { attach, .. } => {
                if r.abort || !view.net().is_edge(x, attach) || !w.may_attach(view, r, attach) {
                    Some(clear(x, r, Outcome::Aborted))
                } else {
                    let p = Probe { phase: Phase::Rot(v, true), ..r.clone() };
                    Some(WalkMove::rotate(p, reparent(w, view, attach)))
                }
            }
            Verdict::Backward { .. } => Some(clear(x, r, Outcome::Aborted)),
        },
        Phase::Back(v) => {
            let p = r.prev?;
            let q = matching(r, w.probe(view.state(p)))?;
            match q.phase {
                Phase::Rot(qv, moved) if qv == v => {
                    let go = moved && v.cut() != Some(Edge::new(p, x));
                    let rec = Probe { phase: Phase::Rot(v, go), ..r.clone() };
                    Some(if go { WalkMove::rotate(rec, reparent(w, view, p)) } else { WalkMove::record(rec) })
                }
                _ => None,
            }
        }
        Phase::Dead => is_init.then(|| clear(x, r, Outcome::Aborted)),
        Phase::Walk => match r.next {
            Some(n) => walk_successor(w, view, r, n),
            None => walk_head(w, view, r),
        },
    }
}

fn walk_successor<S, W: Walker<S>>(
    w: &W,
    view: &View<'_, S>,
    r: &Probe<W::Payload>,
    n: NodeId,
) -> Option<WalkMove<W::Payload>> {
    let x = view.node();
    let net = view.net();
    if !net.is_edge(x, n) {
        return Some(WalkMove::record(aborted(r)));
    }
    match w.probe(view.state(n)) {
        Some(q) if q.same(r) && q.prev == Some(x) => match q.phase {
            Phase::Dead => {
                let port = net.port_of(x, n).unwrap_or(0);
                Some(WalkMove::record(Probe { next: None, cursor: port + 1, ..r.clone() }))
            }
            Phase::Back(v) => {
                let v = match v {
                    Verdict::Forward { .. } if r.abort => Verdict::Keep(Outcome::Aborted),
                    v => v,
                };
                let payload = w.relay(&r.payload, &q.payload);
                Some(WalkMove::record(Probe { phase: Phase::Back(v), payload, ..r.clone() }))
            }
            Phase::Rot(v @ Verdict::Backward { cut, .. }, moved) => {
                let go = moved && cut != Some(Edge::new(x, n));
                let rec = Probe { phase: Phase::Rot(v, go), ..r.clone() };
                Some(if go { WalkMove::rotate(rec, reparent(w, view, n)) } else { WalkMove::record(rec) })
            }
            _ => None,
        },
        Some(_) => Some(WalkMove::record(aborted(r))),
        None => (!valid_hop(w, view, r, n)).then(|| WalkMove::record(aborted(r))),
    }
}

fn walk_head<S, W: Walker<S>>(w: &W, view: &View<'_, S>, r: &Probe<W::Payload>) -> Option<WalkMove<W::Payload>> {
    if reached(w, view, r) {
        let v = if r.abort { Verdict::Keep(Outcome::Aborted) } else { w.decide(view, r) };
        let mv = match v {
            Verdict::Backward { attach, .. } => {
                if view.net().is_edge(view.node(), attach) && w.may_attach(view, r, attach) {
                    let rec = Probe { phase: Phase::Rot(v, true), ..r.clone() };
                    WalkMove::rotate(rec, reparent(w, view, attach))
                } else {
                    WalkMove::record(aborted(r))
                }
            }
            _ => WalkMove::record(Probe { phase: Phase::Back(v), ..r.clone() }),
        };
        return Some(WalkMove { decided: Some(v), ..mv });
    }
    if r.hops >= view.net().n() {
        return Some(WalkMove::record(aborted(r)));
    }
    let rec = match w.navigate(view, r) {
        Hop::To(n) if valid_hop(w, view, r, n) => Probe { next: Some(n), ..r.clone() },
        Hop::Dead => Probe { phase: Phase::Dead, ..r.clone() },
        Hop::To(_) | Hop::Abort => aborted(r),
    };
    Some(WalkMove::record(rec))
}

/// A free node joins the walk of a neighbor whose head points at it.
fn accept<S, W: Walker<S>>(w: &W, view: &View<'_, S>) -> Option<WalkMove<W::Payload>> {
    let x = view.node();
    let (p, q) = view
        .neighbors()
        .filter_map(|(nb, s)| w.probe(s).map(|q| (nb.node, q)))
        .filter(|(_, q)| q.phase == Phase::Walk && q.next == Some(x))
        .min_by_key(|(p, _)| *p)?;
    let down = w.tree(view.own()).parent == Some(p);
    let up = w.tree(view.state(p)).parent == Some(x) && !q.down;
    if !down && !up {
        return None;
    }
    let payload = w.extend(view, p, q);
    Some(WalkMove::record(Probe {
        init: q.init,
        target: q.target,
        prev: Some(p),
        next: None,
        hops: q.hops + 1,
        down,
        cursor: 1,
        phase: Phase::Walk,
        abort: false,
        payload,
    }))
}

/// Exploring navigation: the first tree neighbor at or after the cursor,
/// skipping the predecessor and, after a downward hop, the parent.
pub fn explore<S, W: Walker<S>>(w: &W, view: &View<'_, S>, r: &Probe<W::Payload>) -> Hop {
    let net = view.net();
    let x = view.node();
    let parent = w.tree(view.own()).parent;
    (r.cursor.max(1)..=view.degree())
        .filter_map(|k| net.neighbor_at(x, k).map(|nb| nb.node))
        .find(|&n| {
            Some(n) != r.prev && (w.tree(view.state(n)).parent == Some(x) || (parent == Some(n) && !r.down))
        })
        .map_or(Hop::Dead, Hop::To)
}

/// Garbage record for fault injection.
pub fn random_probe<P: Default>(net: &Graph, u: NodeId, rng: &mut SimRng) -> Option<Probe<P>> {
    if rng.gen_bool(0.5) {
        return None;
    }
    let n = net.n();
    let nbs = net.neighbors(u);
    let pick_nb = |rng: &mut SimRng| (!nbs.is_empty() && rng.gen_bool(0.7)).then(|| nbs[rng.gen_range(0..nbs.len())].node);
    let prev = pick_nb(rng);
    let next = pick_nb(rng);
    let attach = if nbs.is_empty() { u } else { nbs[rng.gen_range(0..nbs.len())].node };
    let cut = net.edges().nth(rng.gen_range(0..net.m().max(1))).map(|(e, _)| e);
    let verdict = match rng.gen_range(0..3) {
        0 => Verdict::Keep(Outcome::Aborted),
        1 => Verdict::Forward { cut, attach },
        _ => Verdict::Backward { cut, attach },
    };
    let phase = match rng.gen_range(0..4) {
        0 => Phase::Walk,
        1 => Phase::Dead,
        2 => Phase::Back(verdict),
        _ => Phase::Rot(verdict, rng.gen()),
    };
    Some(Probe {
        init: if rng.gen_bool(0.3) { u } else { rng.gen_range(0..n) },
        target: if rng.gen_bool(0.2) { Target::Root } else { Target::Node(rng.gen_range(0..n)) },
        prev,
        next,
        hops: rng.gen_range(0..=n),
        down: rng.gen(),
        cursor: rng.gen_range(1..=net.max_degree() + 1),
        phase,
        abort: rng.gen(),
        payload: P::default(),
    })
}
