//! Hop-depth tree layer shared by the tree-rewriting protocols.
//!
//! The layer never re-optimizes an existing tree; it only repairs parent
//! pointers that are invalid or sit on a cycle. A cycle is recognized by its
//! depths growing past a ceiling, well above anything a real tree produces
//! even while depths are catching up after re-parentings.

use crate::engine::{Bound, Encoding, RegisterSpec, View};
use crate::graph::NodeId;
use crate::Graph;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct TreeRegs {
    pub parent: Option<NodeId>,
    pub depth: usize,
}

pub trait HasTree {
    fn tree(&self) -> &TreeRegs;
}

pub const DEPTH_FACTOR: u64 = 4;

pub fn depth_ceiling(net: &Graph) -> usize {
    (DEPTH_FACTOR as usize) * net.n()
}

pub fn tree_schema() -> [RegisterSpec; 2] {
    [RegisterSpec::new("parent", Encoding::Node), RegisterSpec::new("depth", Encoding::Int(Bound::Scaled(DEPTH_FACTOR)))]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rooting {
    /// One fixed root; other parentless nodes are detached and reattach.
    Designated(NodeId),
    /// Every parentless node roots its own fragment.
    Forest,
}

impl Rooting {
    pub fn is_root(&self, u: NodeId) -> bool {
        matches!(*self, Rooting::Designated(r) if r == u)
    }

    /// Whether `v` with registers `t` hangs in a tree.
    pub fn attached(&self, v: NodeId, t: &TreeRegs) -> bool {
        match *self {
            Rooting::Designated(r) => v == r || t.parent.is_some(),
            Rooting::Forest => true,
        }
    }

    fn parentless(&self, net: &Graph, u: NodeId) -> TreeRegs {
        match *self {
            Rooting::Designated(r) if r != u => TreeRegs { parent: None, depth: depth_ceiling(net) },
            _ => TreeRegs { parent: None, depth: 0 },
        }
    }
}

pub fn children<'a, S: HasTree>(view: &'a View<'_, S>) -> impl Iterator<Item = NodeId> + 'a {
    let u = view.node();
    view.neighbors().filter(move |(_, s)| s.tree().parent == Some(u)).map(|(nb, _)| nb.node)
}

/// Registers after re-parenting to `v`.
pub fn reparent<S: HasTree>(view: &View<'_, S>, v: NodeId) -> TreeRegs {
    TreeRegs { parent: Some(v), depth: view.state(v).tree().depth + 1 }
}

/// Repair move of the tree layer, if one is enabled. With `attach`, a detached
/// node without children joins the shallowest attached neighbor.
pub fn tree_step<S: HasTree>(view: &View<'_, S>, rooting: Rooting, attach: bool) -> Option<TreeRegs> {
    let net = view.net();
    let u = view.node();
    let own = view.own().tree();
    let ceil = depth_ceiling(net);
    let Some(p) = own.parent else {
        let clean = rooting.parentless(net, u);
        if *own != clean {
            return Some(clean);
        }
        if !attach || rooting.is_root(u) || rooting == Rooting::Forest || children(view).next().is_some() {
            return None;
        }
        return view
            .neighbors()
            .filter(|(nb, s)| rooting.attached(nb.node, s.tree()) && s.tree().depth + 1 < ceil)
            .min_by_key(|(nb, s)| (s.tree().depth, nb.node))
            .map(|(nb, _)| reparent(view, nb.node));
    };
    if rooting.is_root(u) || p == u || !net.is_edge(u, p) {
        return Some(rooting.parentless(net, u));
    }
    let tp = view.state(p).tree();
    if !rooting.attached(p, tp) || tp.depth + 1 >= ceil {
        return Some(rooting.parentless(net, u));
    }
    (own.depth != tp.depth + 1).then(|| TreeRegs { parent: Some(p), depth: tp.depth + 1 })
}

/// Every parent is a neighbor, depths follow parents, and the parent map is a
/// single tree (designated) or a forest.
pub fn tree_coherent(net: &Graph, rooting: Rooting, t: &[TreeRegs]) -> bool {
    // Coherent depths strictly decrease along parents, so no cycles remain.
    net.nodes().all(|u| match t[u].parent {
        None => t[u] == rooting.parentless(net, u) && (rooting.is_root(u) || rooting == Rooting::Forest),
        Some(p) => net.is_edge(u, p) && !rooting.is_root(u) && t[u].depth == t[p].depth + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct S(TreeRegs);
    impl HasTree for S {
        fn tree(&self) -> &TreeRegs {
            &self.0
        }
    }

    fn t(parent: Option<NodeId>, depth: usize) -> S {
        S(TreeRegs { parent, depth })
    }

    #[test]
    fn cycle_depths_overflow_and_detach() {
        let net = crate::gen::cycle(3);
        let mut cfg = vec![t(None, 0), t(Some(2), 1), t(Some(1), 2)];
        let rooting = Rooting::Designated(0);
        let mut detached = false;
        for _ in 0..100 {
            for u in [1, 2] {
                if let Some(next) = tree_step(&View::new(&net, u, &cfg), rooting, true) {
                    detached |= next.parent.is_none();
                    cfg[u] = S(next);
                }
            }
        }
        assert!(detached);
        let regs: Vec<_> = cfg.iter().map(|s| s.0.clone()).collect();
        assert!(tree_coherent(&net, rooting, &regs));
    }

    #[test]
    fn forest_parentless_is_root() {
        let net = crate::gen::path(2);
        let cfg = vec![t(None, 3), t(Some(0), 1)];
        assert_eq!(tree_step(&View::new(&net, 0, &cfg), Rooting::Forest, false), Some(TreeRegs { parent: None, depth: 0 }));
    }
}
