//! Depth-first token circulation over a rooted tree, labeling nodes in visit order.
//!
//! `cursor` is the port a node is currently handing the token to: 0 right
//! after the token arrives, `deg + 1` once the node is finished. A child
//! accepts the token when its parent's cursor names it and the colors differ;
//! the root flips its color to start each wave. A node that is still busy
//! although its parent does not point at it holds a stray token and drops it,
//! so surplus tokens vanish and a lost one is regenerated by the root.

use crate::engine::{Bound, Encoding, Protocol, RegisterSpec, Value, View};
use crate::EngineError;
use crate::graph::NodeId;
use crate::register_access;
use crate::Graph;

use super::{Composed, Master, TreeState};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct TokenRegs {
    pub color: bool,
    pub cursor: usize,
    pub label: usize,
    /// Largest label handed out so far in this node's subtree.
    pub counter: usize,
}

register_access!(TokenRegs { color, cursor, label, counter });

pub fn token_schema() -> [RegisterSpec; 4] {
    [
        RegisterSpec::new("color", Encoding::Bool),
        RegisterSpec::new("cursor", Encoding::Int(Bound::Degree)),
        RegisterSpec::new("label", Encoding::Int(Bound::Nodes)),
        RegisterSpec::new("counter", Encoding::Int(Bound::Nodes)),
    ]
}

/// Accessors the token layer needs from a composite state.
pub struct TokenAccess<S> {
    pub parent: fn(&S) -> Option<NodeId>,
    pub token: fn(&S) -> &TokenRegs,
}

impl<S> Clone for TokenAccess<S> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<S> Copy for TokenAccess<S> {}

impl<S> TokenAccess<S> {
    fn is_child(&self, view: &View<'_, S>, x: NodeId) -> bool {
        (self.parent)(view.state(x)) == Some(view.node())
    }

    /// First port at or after `from` leading to a child, or `deg + 1`.
    pub fn next_child(&self, view: &View<'_, S>, from: usize) -> usize {
        let net = view.net();
        let u = view.node();
        (from.max(1)..=view.degree())
            .find(|&k| net.neighbor_at(u, k).is_some_and(|nb| self.is_child(view, nb.node)))
            .unwrap_or(view.degree() + 1)
    }

    /// The token is with this node and has not moved on to a child yet.
    pub fn holds(&self, view: &View<'_, S>, root: NodeId) -> bool {
        let t = (self.token)(view.own());
        t.cursor == 0 && self.legit_pointer(view, root)
    }

    fn legit_pointer(&self, view: &View<'_, S>, root: NodeId) -> bool {
        let u = view.node();
        if u == root {
            return true;
        }
        let net = view.net();
        match (self.parent)(view.own()) {
            Some(p) if net.is_edge(u, p) => {
                let tp = (self.token)(view.state(p));
                net.port_of(p, u) == Some(tp.cursor) && tp.color == (self.token)(view.own()).color
            }
            _ => false,
        }
    }
}

/// One move of the token layer, or `None` when the node has nothing to do.
pub fn token_step<S>(view: &View<'_, S>, root: NodeId, acc: TokenAccess<S>) -> Option<TokenRegs> {
    let net = view.net();
    let u = view.node();
    let t = (acc.token)(view.own());
    let deg = view.degree();
    let busy = t.cursor <= deg;
    if u == root {
        if !busy {
            return Some(TokenRegs { color: !t.color, cursor: 0, label: 0, counter: 0 });
        }
    } else {
        if let Some(p) = (acc.parent)(view.own()).filter(|&p| net.is_edge(u, p)) {
            let tp = (acc.token)(view.state(p));
            if net.port_of(p, u) == Some(tp.cursor) && tp.color != t.color {
                let label = tp.counter + 1;
                return Some(TokenRegs { color: tp.color, cursor: 0, label, counter: label });
            }
        }
        if !busy {
            return None;
        }
        if !acc.legit_pointer(view, root) {
            return Some(TokenRegs { cursor: deg + 1, ..t.clone() });
        }
    }
    if t.cursor == 0 {
        return Some(TokenRegs { cursor: acc.next_child(view, 1), ..t.clone() });
    }
    let x = net.neighbor_at(u, t.cursor).map(|nb| nb.node)?;
    if !acc.is_child(view, x) {
        return Some(TokenRegs { cursor: acc.next_child(view, t.cursor + 1), ..t.clone() });
    }
    let tx = (acc.token)(view.state(x));
    if tx.color != t.color || tx.cursor <= net.degree(x) {
        return None;
    }
    Some(TokenRegs { cursor: acc.next_child(view, t.cursor + 1), counter: tx.counter, ..t.clone() })
}

/// Preorder labels of the tree given by `parents`, children visited by port.
pub fn dfs_preorder(net: &Graph, parents: &[Option<NodeId>], root: NodeId) -> Vec<usize> {
    let mut label = vec![usize::MAX; net.n()];
    let mut next = 0;
    let mut stack = vec![root];
    while let Some(u) = stack.pop() {
        label[u] = next;
        next += 1;
        let kids: Vec<NodeId> = net.neighbors(u).iter().map(|nb| nb.node).filter(|&c| parents[c] == Some(u)).collect();
        stack.extend(kids.into_iter().rev());
    }
    label
}

/// Single token, preorder labels, and visited nodes forming a preorder prefix.
pub fn token_legitimate(net: &Graph, parents: &[Option<NodeId>], root: NodeId, t: &[TokenRegs]) -> bool {
    if !crate::graph::is_spanning_parent_map(net, parents) || parents[root].is_some() {
        return false;
    }
    let pre = dfs_preorder(net, parents, root);
    if net.nodes().any(|u| t[u].label != pre[u]) {
        return false;
    }
    let rc = t[root].color;
    let busy = |u: NodeId| t[u].cursor <= net.degree(u);
    let mut chain = vec![false; net.n()];
    if busy(root) {
        let mut x = root;
        loop {
            chain[x] = true;
            let Some(nb) = net.neighbor_at(x, t[x].cursor) else { break };
            let y = nb.node;
            if parents[y] == Some(x) && t[y].color == rc && busy(y) {
                x = y;
            } else {
                break;
            }
        }
    }
    if net.nodes().any(|u| !chain[u] && busy(u)) {
        return false;
    }
    // Visited nodes carry the root's color and must form a preorder prefix.
    let visited = net.nodes().filter(|&u| t[u].color == rc).count();
    net.nodes().all(|u| (t[u].color == rc) == (pre[u] < visited))
}

/// Where the walk from `w` toward `v` goes next, from DFS labels alone.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Predecessor {
    Parent,
    Child(NodeId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LabelIncoherence;

/// Up while `w` is visited after `v`; otherwise down into the child whose
/// subtree can contain `v`, the one with the largest label not above `v`'s.
pub fn path_predecessor(
    w_label: usize,
    children: &[(NodeId, usize)],
    v_label: usize,
) -> Result<Predecessor, LabelIncoherence> {
    if w_label > v_label {
        return Ok(Predecessor::Parent);
    }
    children
        .iter()
        .filter(|&&(_, l)| l <= v_label)
        .max_by_key(|&&(_, l)| l)
        .map(|&(c, _)| Predecessor::Child(c))
        .ok_or(LabelIncoherence)
}

/// Token circulation over the tree built by a slave layer.
#[derive(Clone, Copy, Debug, Default)]
pub struct DfsToken;

impl<T> Master<T> for DfsToken
where
    T: Protocol,
    T::State: TreeState,
{
    type State = TokenRegs;

    fn name(&self) -> String {
        "dfs-token".into()
    }

    fn schema(&self) -> Vec<RegisterSpec> {
        token_schema().to_vec()
    }

    fn init(&self, net: &Graph, _u: NodeId) -> TokenRegs {
        TokenRegs { cursor: net.max_degree() + 1, ..TokenRegs::default() }
    }

    fn step(&self, _slave: &T, view: &View<'_, (T::State, TokenRegs)>) -> Option<TokenRegs> {
        let acc = TokenAccess { parent: |s: &(T::State, TokenRegs)| s.0.tree_parent(), token: |s| &s.1 };
        token_step(view, super::spt::spt_root(view.net()), acc)
    }

    fn legitimate(&self, _slave: &T, net: &Graph, cfg: &[(T::State, TokenRegs)]) -> bool {
        let parents: Vec<_> = cfg.iter().map(|s| s.0.tree_parent()).collect();
        let t: Vec<_> = cfg.iter().map(|s| s.1.clone()).collect();
        token_legitimate(net, &parents, super::spt::spt_root(net), &t)
    }

    fn silent(&self) -> bool {
        false
    }

    fn get(&self, s: &TokenRegs, register: &str) -> Option<Value> {
        s.register(register)
    }

    fn put(&self, s: &mut TokenRegs, register: &str, v: Value) -> Result<(), EngineError> {
        s.set_register(register, v)
    }
}

/// The `dfs-token` protocol: token circulation over the shortest-path tree.
pub fn dfs_token() -> Composed<DfsToken, super::spt::Spt> {
    super::compose_fair(DfsToken, super::spt::Spt).expect("disjoint schemas")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run, Daemon, RunOptions, SimRng};
    use rand::SeedableRng;

    #[test]
    fn predecessor_rules() {
        assert_eq!(path_predecessor(7, &[], 3), Ok(Predecessor::Parent));
        assert_eq!(path_predecessor(2, &[(4, 3), (9, 6)], 5), Ok(Predecessor::Child(4)));
        assert_eq!(path_predecessor(2, &[(4, 6), (9, 8)], 5), Err(LabelIncoherence));
        // The target itself is a valid last hop.
        assert_eq!(path_predecessor(2, &[(4, 3), (9, 5)], 5), Ok(Predecessor::Child(9)));
    }

    fn acc() -> TokenAccess<(Option<NodeId>, TokenRegs)> {
        TokenAccess { parent: |s| s.0, token: |s| &s.1 }
    }

    #[test]
    fn path_labels_in_order() {
        // r - a - b
        let net = crate::gen::path(3);
        let parents = [None, Some(0), Some(1)];
        let done = |u: NodeId| net.degree(u) + 1;
        let mut cfg: Vec<(Option<NodeId>, TokenRegs)> =
            (0..3).map(|u| (parents[u], TokenRegs { cursor: done(u), ..Default::default() })).collect();
        // Root starts a wave, then hands to a.
        for _ in 0..3 {
            let s = token_step(&View::new(&net, 0, &cfg), 0, acc()).unwrap();
            cfg[0].1 = s;
            if cfg[0].1.cursor == 1 {
                break;
            }
        }
        let a = token_step(&View::new(&net, 1, &cfg), 0, acc()).unwrap();
        assert_eq!(a.label, 1);
    }

    #[test]
    fn stale_counter_reset_at_root() {
        let net = crate::gen::path(2);
        let cfg = vec![(None, TokenRegs { color: false, cursor: 2, label: 5, counter: 9 }), (Some(0), TokenRegs::default())];
        let s = token_step(&View::new(&net, 0, &cfg), 0, acc()).unwrap();
        assert_eq!((s.label, s.counter, s.cursor), (0, 0, 0));
    }

    #[test]
    fn circulation_stabilizes() {
        let mut rng = SimRng::seed_from_u64(9);
        let proto = dfs_token();
        for seed in 0..5 {
            let net = crate::gen::random_connected(8, 4, 9, &mut rng);
            let init = proto.initial_configuration(&net);
            let rep = run(&proto, &net, init, Daemon::distributed(seed), &RunOptions::rounds(3000)).unwrap();
            assert!(rep.converged, "seed {seed}");
        }
    }
}
