//! Loop-free shortest-path tree rooted at the designated root.
//!
//! Every attached node keeps `dist` strictly above its parent's. Lowering a
//! distance never breaks that, so improvements are free. Raising one could,
//! so a node first publishes the value it wants in `req`; the request flows
//! down the subtree and a node only raises once all its children sit above
//! the new value. A node adopts a neighbor only when that neighbor is not
//! itself waiting to raise, which keeps the parent map acyclic once it is a
//! spanning tree. Parent cycles left by faults make `req` grow without bound
//! until it hits the distance ceiling and the cycle detaches.

use crate::engine::{Bound, Encoding, Protocol, RegisterSpec, SimRng, Value, View};
use crate::EngineError;
use crate::graph::NodeId;
use crate::oracles::shortest_paths;
use crate::register_access;
use crate::Graph;

use super::{TargetState, TreeState};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct SptRegisters {
    pub parent: Option<NodeId>,
    pub dist: u64,
    /// Distance this node is about to take; equals `dist` when settled.
    pub req: u64,
}

register_access!(SptRegisters { parent, dist, req });

pub fn spt_root(net: &Graph) -> NodeId {
    net.root().unwrap_or(0)
}

/// Ceiling on distances; reaching it means the node sits on a parent cycle.
pub fn spt_ceiling(net: &Graph) -> u64 {
    Bound::Distance.max(net).max(1)
}

fn attached(net: &Graph, v: NodeId, s: &SptRegisters) -> bool {
    v == spt_root(net) || s.parent.is_some()
}

fn detached(net: &Graph) -> SptRegisters {
    let inf = spt_ceiling(net);
    SptRegisters { parent: None, dist: inf, req: inf }
}

/// New registers for the viewed node, or `None` when no rule is enabled.
pub fn spt_step(view: &View<'_, SptRegisters>) -> Option<SptRegisters> {
    let net = view.net();
    let u = view.node();
    let own = view.own();
    let inf = spt_ceiling(net);
    if u == spt_root(net) {
        let clean = SptRegisters { parent: None, dist: 0, req: 0 };
        return (*own != clean).then_some(clean);
    }
    let has_children = view.neighbors().any(|(_, s)| s.parent == Some(u));
    let best = view
        .neighbors()
        .filter(|(nb, s)| attached(net, nb.node, s) && s.req == s.dist && s.parent != Some(u))
        .map(|(nb, s)| (s.dist.saturating_add(nb.weight), nb.node))
        .filter(|&(d, _)| d < inf)
        .min();
    let adopt = |d: u64, v: NodeId| SptRegisters { parent: Some(v), dist: d, req: d };

    let Some(p) = own.parent else {
        if own.dist != inf || own.req != inf {
            return Some(detached(net));
        }
        // Old children must leave first, otherwise one of them could be adopted.
        if has_children {
            return None;
        }
        return best.map(|(d, v)| adopt(d, v));
    };
    let Some(w) = net.weight(u, p) else {
        return Some(detached(net));
    };
    let sp = view.state(p);
    if !attached(net, p, sp) || sp.req.saturating_add(w) >= inf || own.dist >= inf || own.req >= inf {
        return Some(detached(net));
    }
    if let Some((d, v)) = best {
        if d < own.dist {
            return Some(adopt(d, v));
        }
    }
    let want = own.dist.max(sp.req + w);
    if own.req != want {
        return Some(SptRegisters { req: want, ..own.clone() });
    }
    if own.req > own.dist && view.neighbors().filter(|(_, s)| s.parent == Some(u)).all(|(_, s)| s.dist > own.req) {
        return Some(SptRegisters { dist: own.req, ..own.clone() });
    }
    None
}

/// Shortest-path tree protocol.
#[derive(Clone, Copy, Debug, Default)]
pub struct Spt;

impl Spt {
    const SCHEMA: [RegisterSpec; 3] = [
        RegisterSpec::new("parent", Encoding::Node),
        RegisterSpec::new("dist", Encoding::Int(Bound::Distance)),
        RegisterSpec::new("req", Encoding::Int(Bound::Distance)),
    ];
}

impl Protocol for Spt {
    type State = SptRegisters;

    fn name(&self) -> String {
        "spt".into()
    }

    fn schema(&self) -> Vec<RegisterSpec> {
        Self::SCHEMA.to_vec()
    }

    fn init(&self, net: &Graph, u: NodeId) -> SptRegisters {
        if u == spt_root(net) {
            SptRegisters::default()
        } else {
            detached(net)
        }
    }

    fn activable(&self, view: &View<'_, SptRegisters>) -> bool {
        spt_step(view).is_some()
    }

    fn step(&self, view: &View<'_, SptRegisters>, _rng: &mut SimRng) -> SptRegisters {
        spt_step(view).unwrap_or_else(|| view.own().clone())
    }

    fn legitimate(&self, net: &Graph, cfg: &[SptRegisters]) -> bool {
        let root = spt_root(net);
        let (dist, _) = shortest_paths(net, root);
        net.nodes().all(|u| {
            let s = &cfg[u];
            if u == root {
                return s.parent.is_none() && s.dist == 0 && s.req == 0;
            }
            match s.parent.and_then(|p| net.weight(u, p).map(|w| (p, w))) {
                Some((p, w)) => s.dist == dist[u] && s.req == s.dist && cfg[p].dist + w == s.dist,
                None => false,
            }
        })
    }

    fn get(&self, s: &SptRegisters, register: &str) -> Option<Value> {
        s.register(register)
    }

    fn put(&self, s: &mut SptRegisters, register: &str, v: Value) -> Result<(), EngineError> {
        s.set_register(register, v)
    }

    fn parent(&self, s: &SptRegisters) -> Option<Option<NodeId>> {
        Some(s.parent)
    }
}

impl TargetState for SptRegisters {
    fn target_parent(&self) -> Option<NodeId> {
        self.parent
    }
}

impl TreeState for SptRegisters {
    fn tree_parent(&self) -> Option<NodeId> {
        self.parent
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run, Daemon, RunOptions};
    use crate::Network;
    use rand::SeedableRng;

    fn step_at(net: &Graph, cfg: &[SptRegisters], u: NodeId) -> Option<SptRegisters> {
        spt_step(&View::new(net, u, cfg))
    }

    #[test]
    fn root_resets() {
        let net = Network::new(2, &[(0, 1, 3)]).unwrap();
        let cfg = vec![SptRegisters { parent: None, dist: 4, req: 4 }, Spt.init(&net, 1)];
        assert_eq!(step_at(&net, &cfg, 0), Some(SptRegisters::default()));
    }

    #[test]
    fn adopts_closer_neighbor() {
        let net = Network::new(2, &[(0, 1, 3)]).unwrap();
        let cfg = vec![SptRegisters::default(), SptRegisters { parent: None, dist: 7, req: 7 }];
        // A detached node first normalizes to the ceiling, then adopts.
        let mut cfg = cfg;
        cfg[1] = step_at(&net, &cfg, 1).unwrap();
        assert_eq!(step_at(&net, &cfg, 1), Some(SptRegisters { parent: Some(0), dist: 3, req: 3 }));
    }

    #[test]
    fn never_adopts_own_child() {
        // 0 - 1 (w 10), 1 - 2 (w 1), 0 - 2 (w 20); 2 is 1's child with a corrupted low dist.
        let net = Network::new(3, &[(0, 1, 10), (1, 2, 1), (0, 2, 20)]).unwrap();
        let cfg = vec![
            SptRegisters::default(),
            SptRegisters { parent: Some(0), dist: 30, req: 30 },
            SptRegisters { parent: Some(1), dist: 2, req: 2 },
        ];
        let next = step_at(&net, &cfg, 1).unwrap();
        assert_eq!(next.parent, Some(0));
        assert_eq!(next.dist, 10);
    }

    #[test]
    fn converges_from_clean_start() {
        let mut rng = SimRng::seed_from_u64(3);
        for _ in 0..10 {
            let net = crate::gen::random_connected(9, 6, 20, &mut rng);
            let init = Spt.initial_configuration(&net);
            let rep = run(&Spt, &net, init, Daemon::distributed(1), &RunOptions::rounds(2000)).unwrap();
            assert!(rep.converged);
        }
    }
}
