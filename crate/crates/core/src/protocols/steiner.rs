//! Self-stabilizing online Steiner tree rooted at a designated member.
//!
//! Connected nodes keep a tree toward the root with `droot` equal to the
//! parent's plus the edge weight; anything else disconnects and the
//! disconnection flows down. Unconnected nodes keep their distance to the
//! connected set and a gradient pointer `next`. An unconnected member raises
//! `req`, the request follows the gradient, and the first node adjacent to
//! the tree connects; the nodes behind it connect in turn. Connected leaves
//! that are neither members nor waited on by a request are pruned.

use std::collections::BTreeSet;

use crate::engine::{Bound, Encoding, Event, Protocol, RegisterSpec, SimRng, Value, View};
use crate::graph::{parent_edges, NodeId};
use crate::oracles::shortest_paths;
use crate::register_access;
use crate::{EngineError, Graph};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct SteinerRegisters {
    /// External input, not touched by the protocol.
    pub member: bool,
    pub connected: bool,
    pub parent: Option<NodeId>,
    pub dtree: u64,
    pub next: Option<NodeId>,
    pub droot: u64,
    /// Smallest member whose request passes through this node.
    pub req: Option<NodeId>,
}

register_access!(SteinerRegisters { member, connected, parent, dtree, next, droot, req });

pub fn steiner_root(net: &Graph) -> NodeId {
    net.root().unwrap_or(0)
}

fn ceiling(net: &Graph) -> u64 {
    Bound::Distance.max(net).max(1)
}

fn waits_on(x: NodeId, s: &SteinerRegisters) -> bool {
    !s.connected && s.req.is_some() && s.next == Some(x)
}

/// Gradient toward the connected set: distance and next hop.
fn gradient(view: &View<'_, SteinerRegisters>) -> (u64, Option<NodeId>) {
    let inf = ceiling(view.net());
    view.neighbors()
        .map(|(nb, s)| ((s.dtree.saturating_add(nb.weight)).min(inf), nb.node))
        .min()
        .map_or((inf, None), |(d, v)| if d >= inf { (inf, None) } else { (d, Some(v)) })
}

fn disconnected(own: &SteinerRegisters) -> SteinerRegisters {
    SteinerRegisters { member: own.member, ..SteinerRegisters::default() }
}

/// A connected non-root node that lost its link to the root.
pub fn prune_incoherent_step(view: &View<'_, SteinerRegisters>) -> Option<SteinerRegisters> {
    let net = view.net();
    let x = view.node();
    let own = view.own();
    if !own.connected || x == steiner_root(net) {
        return None;
    }
    let coherent = own.parent.is_some_and(|p| {
        net.weight(x, p).is_some_and(|w| {
            let sp = view.state(p);
            sp.connected && own.droot == sp.droot.saturating_add(w) && own.droot < ceiling(net)
        })
    });
    (!coherent).then(|| disconnected(own))
}

/// The four ordered phases plus root reset and leaf pruning.
pub fn steiner_phase_step(view: &View<'_, SteinerRegisters>) -> Option<SteinerRegisters> {
    let net = view.net();
    let x = view.node();
    let own = view.own();
    if x == steiner_root(net) {
        let clean = SteinerRegisters { member: own.member, connected: true, ..SteinerRegisters::default() };
        return (*own != clean).then_some(clean);
    }
    if let Some(s) = prune_incoherent_step(view) {
        return Some(s);
    }
    if own.connected {
        let needed = own.member || view.neighbors().any(|(_, s)| s.connected && s.parent == Some(x) || waits_on(x, s));
        if !needed {
            return Some(disconnected(own));
        }
        if own.dtree != 0 || own.next.is_some() || own.req.is_some() {
            return Some(SteinerRegisters { dtree: 0, next: None, req: None, ..own.clone() });
        }
        return None;
    }
    if own.parent.is_some() || own.droot != 0 {
        return Some(SteinerRegisters { parent: None, droot: 0, ..own.clone() });
    }
    let (dtree, next) = gradient(view);
    if own.dtree != dtree || own.next != next {
        return Some(SteinerRegisters { dtree, next, ..own.clone() });
    }
    let passing = view.neighbors().filter(|(_, s)| waits_on(x, s)).filter_map(|(_, s)| s.req);
    let req = own.member.then_some(x).into_iter().chain(passing).min();
    if own.req != req {
        return Some(SteinerRegisters { req, ..own.clone() });
    }
    let (Some(_), Some(c)) = (own.req, own.next) else {
        return None;
    };
    let sc = view.state(c);
    if !sc.connected {
        return None;
    }
    let w = net.weight(x, c)?;
    Some(SteinerRegisters {
        member: own.member,
        connected: true,
        parent: Some(c),
        droot: sc.droot.saturating_add(w),
        ..SteinerRegisters::default()
    })
}

/// Toggles membership of `node`. A departing internal member stays as a relay.
pub fn member_event(cfg: &mut [SteinerRegisters], node: NodeId, join: bool) {
    if let Some(s) = cfg.get_mut(node) {
        s.member = join;
    }
}

/// Edges of the connected tree.
pub fn steiner_edges(net: &Graph, cfg: &[SteinerRegisters]) -> Option<crate::oracles::EdgeSet> {
    let parents: Vec<_> = cfg.iter().map(|s| if s.connected { s.parent } else { None }).collect();
    parent_edges(net, &parents)
}

/// Self-stabilizing Steiner tree protocol (`steiner`).
#[derive(Clone, Copy, Debug, Default)]
pub struct Steiner;

impl Steiner {
    const SCHEMA: [RegisterSpec; 7] = [
        RegisterSpec::new("member", Encoding::Bool),
        RegisterSpec::new("connected", Encoding::Bool),
        RegisterSpec::new("parent", Encoding::Node),
        RegisterSpec::new("dtree", Encoding::Int(Bound::Distance)),
        RegisterSpec::new("next", Encoding::Node),
        RegisterSpec::new("droot", Encoding::Int(Bound::Distance)),
        RegisterSpec::new("req", Encoding::Node),
    ];

    /// Clean configuration where `members` (and the root) are members.
    pub fn with_members(&self, net: &Graph, members: &[NodeId]) -> Vec<SteinerRegisters> {
        let mut cfg = self.initial_configuration(net);
        for &m in members {
            member_event(&mut cfg, m, true);
        }
        cfg
    }
}

impl Protocol for Steiner {
    type State = SteinerRegisters;

    fn name(&self) -> String {
        "steiner".into()
    }

    fn schema(&self) -> Vec<RegisterSpec> {
        Self::SCHEMA.to_vec()
    }

    fn init(&self, net: &Graph, u: NodeId) -> SteinerRegisters {
        let root = u == steiner_root(net);
        SteinerRegisters { member: root, connected: root, dtree: if root { 0 } else { ceiling(net) }, ..Default::default() }
    }

    fn activable(&self, view: &View<'_, SteinerRegisters>) -> bool {
        steiner_phase_step(view).is_some()
    }

    fn step(&self, view: &View<'_, SteinerRegisters>, _rng: &mut SimRng) -> SteinerRegisters {
        steiner_phase_step(view).unwrap_or_else(|| view.own().clone())
    }

    fn legitimate(&self, net: &Graph, cfg: &[SteinerRegisters]) -> bool {
        let root = steiner_root(net);
        if !cfg[root].connected || cfg.iter().any(|s| s.member && !s.connected || s.req.is_some()) {
            return false;
        }
        let Some(edges) = steiner_edges(net, cfg) else {
            return false;
        };
        let tree: BTreeSet<NodeId> = net.nodes().filter(|&u| cfg[u].connected).collect();
        if edges.len() + 1 != tree.len() {
            return false;
        }
        let coherent = tree.iter().all(|&u| {
            let s = &cfg[u];
            match s.parent {
                None => u == root && s.droot == 0,
                Some(p) => cfg[p].connected && net.weight(u, p).is_some_and(|w| s.droot == cfg[p].droot + w),
            }
        });
        let pruned = tree
            .iter()
            .all(|&u| u == root || cfg[u].member || tree.iter().any(|&c| cfg[c].parent == Some(u)));
        // Distances to the connected set, by a virtual source tied to every tree node.
        let dist = tree.iter().fold(vec![u64::MAX; net.n()], |mut acc, &t| {
            let (d, _) = shortest_paths(net, t);
            for u in net.nodes() {
                acc[u] = acc[u].min(d[u]);
            }
            acc
        });
        let inf = ceiling(net);
        let gradients = net.nodes().all(|u| cfg[u].connected || cfg[u].dtree == dist[u].min(inf));
        coherent && pruned && gradients
    }

    fn get(&self, s: &SteinerRegisters, register: &str) -> Option<Value> {
        s.register(register)
    }

    fn put(&self, s: &mut SteinerRegisters, register: &str, v: Value) -> Result<(), EngineError> {
        s.set_register(register, v)
    }

    fn corrupt(&self, net: &Graph, u: NodeId, s: &mut SteinerRegisters, register: &str, rng: &mut SimRng) -> Result<(), EngineError> {
        // Membership is an input, not state.
        if register == "member" {
            return Ok(());
        }
        let spec = Self::SCHEMA
            .iter()
            .find(|r| r.name == register)
            .ok_or_else(|| EngineError::UnknownRegister(register.to_string()))?;
        let v = spec.encoding.random(net, u, rng);
        self.put(s, register, v)
    }

    fn parent(&self, s: &SteinerRegisters) -> Option<Option<NodeId>> {
        Some(if s.connected { s.parent } else { None })
    }

    fn on_event(&self, _net: &Graph, cfg: &mut [SteinerRegisters], ev: &Event) {
        if let Event::Member { node, join } = ev {
            member_event(cfg, *node, *join);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run, Daemon, RunOptions, ScheduledEvent};
    use crate::Network;

    fn converge(net: &Graph, cfg: Vec<SteinerRegisters>, events: Vec<ScheduledEvent>) -> Vec<SteinerRegisters> {
        let opts = RunOptions { events, ..RunOptions::rounds(5000) };
        let rep = run(&Steiner, net, cfg, Daemon::distributed(5), &opts).unwrap();
        assert!(rep.converged);
        rep.final_config
    }

    #[test]
    fn gradient_base() {
        let net = crate::gen::path(3);
        let cfg = Steiner.initial_configuration(&net);
        let s = steiner_phase_step(&View::new(&net, 1, &cfg)).unwrap();
        assert_eq!((s.dtree, s.next), (1, Some(0)));
    }

    #[test]
    fn member_two_hops_away_connects_a_path() {
        // 0 - 1 - 2, plus a detour 2 - 3 - 0 of weight 2 per edge.
        let net = Network::new(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 2), (3, 0, 2)]).unwrap();
        let cfg = converge(&net, Steiner.with_members(&net, &[2]), vec![]);
        assert_eq!(cfg[2].parent, Some(1));
        assert_eq!(cfg[1].parent, Some(0));
        assert!(!cfg[3].connected);
        assert!(net.nodes().all(|u| steiner_phase_step(&View::new(&net, u, &cfg)).is_none()));
    }

    #[test]
    fn corrupted_root_distance_disconnects_subtree() {
        let net = crate::gen::path(3);
        let mut cfg = converge(&net, Steiner.with_members(&net, &[2]), vec![]);
        cfg[1].droot = 5;
        assert_eq!(prune_incoherent_step(&View::new(&net, 1, &cfg)).map(|s| s.connected), Some(false));
        let cfg = converge(&net, cfg, vec![]);
        assert!(cfg[2].connected);
    }

    #[test]
    fn parent_cycle_disconnects() {
        let net = crate::gen::cycle(4);
        let mut cfg = Steiner.initial_configuration(&net);
        for (u, p, d) in [(1, 2, 3), (2, 3, 4), (3, 1, 5)] {
            cfg[u] = SteinerRegisters { connected: true, parent: Some(p), droot: d, ..Default::default() };
        }
        let cfg = converge(&net, cfg, vec![]);
        assert!((1..4).all(|u| !cfg[u].connected));
    }

    #[test]
    fn leaf_leave_prunes_relay_chain() {
        let net = crate::gen::path(5);
        let cfg = converge(&net, Steiner.with_members(&net, &[2, 4]), vec![]);
        assert!(cfg.iter().all(|s| s.connected));
        let leave = ScheduledEvent { round: 0, event: Event::Member { node: 4, join: false } };
        let after = converge(&net, cfg.clone(), vec![leave]);
        assert_eq!(after.iter().filter(|s| s.connected).count(), 3);
        let inner = ScheduledEvent { round: 0, event: Event::Member { node: 2, join: false } };
        let kept = converge(&net, cfg.clone(), vec![inner]);
        assert_eq!(steiner_edges(&net, &kept), steiner_edges(&net, &cfg));
    }

    #[test]
    fn join_of_connected_node_keeps_tree() {
        let net = crate::gen::path(4);
        let cfg = converge(&net, Steiner.with_members(&net, &[3]), vec![]);
        let join = ScheduledEvent { round: 0, event: Event::Member { node: 1, join: true } };
        let after = converge(&net, cfg.clone(), vec![join]);
        assert_eq!(steiner_edges(&net, &after), steiner_edges(&net, &cfg));
    }
}
