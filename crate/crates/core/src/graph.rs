//! Port-numbered undirected networks with positive edge weights.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::{self, Debug, Display};
use std::hash::Hash;

use num_traits::{PrimInt, Unsigned};

use crate::error::GraphError;

pub type NodeId = usize;

/// Scalar usable as an edge weight.
pub trait Weight: PrimInt + Unsigned + Hash + Debug + Display + Default + Send + Sync + 'static {}

impl<T> Weight for T where T: PrimInt + Unsigned + Hash + Debug + Display + Default + Send + Sync + 'static {}

/// Undirected edge, endpoints stored in increasing order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge(NodeId, NodeId);

impl Edge {
    pub fn new(u: NodeId, v: NodeId) -> Self {
        if u <= v {
            Edge(u, v)
        } else {
            Edge(v, u)
        }
    }

    pub fn lo(&self) -> NodeId {
        self.0
    }

    pub fn hi(&self) -> NodeId {
        self.1
    }

    pub fn touches(&self, x: NodeId) -> bool {
        self.0 == x || self.1 == x
    }

    /// The endpoint that is not `x`. Panics if `x` is not an endpoint.
    pub fn other(&self, x: NodeId) -> NodeId {
        if self.0 == x {
            self.1
        } else if self.1 == x {
            self.0
        } else {
            panic!("{x} is not an endpoint of {self:?}")
        }
    }
}

impl Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

impl Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

/// Total order on edges: weight first, then smaller endpoint, then larger endpoint.
/// Makes the minimum spanning tree unique even with repeated weights.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct EdgeRank<W> {
    pub weight: W,
    pub lo: NodeId,
    pub hi: NodeId,
}

impl<W: Copy> EdgeRank<W> {
    pub fn edge(&self) -> Edge {
        Edge(self.lo, self.hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Neighbor<W> {
    pub node: NodeId,
    /// Local port number at the owning node, 1-based.
    pub port: usize,
    pub weight: W,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network<W = u64> {
    adj: Vec<Vec<Neighbor<W>>>,
    weights: BTreeMap<Edge, W>,
    weighted: bool,
    root: Option<NodeId>,
}

impl<W: Weight> Network<W> {
    /// Builds a connected weighted network. Ports follow the order edges are listed.
    pub fn new(n: usize, edges: &[(NodeId, NodeId, W)]) -> Result<Self, GraphError> {
        let net = Self::build(n, edges.iter().map(|&(u, v, w)| (u, v, w)), true)?;
        net.check_connected()?;
        Ok(net)
    }

    /// Builds a connected network with every weight equal to one.
    pub fn unweighted(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self, GraphError> {
        let net = Self::build(n, edges.iter().map(|&(u, v)| (u, v, W::one())), false)?;
        net.check_connected()?;
        Ok(net)
    }

    fn build(
        n: usize,
        edges: impl Iterator<Item = (NodeId, NodeId, W)>,
        weighted: bool,
    ) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut adj: Vec<Vec<Neighbor<W>>> = vec![Vec::new(); n];
        let mut weights = BTreeMap::new();
        for (u, v, w) in edges {
            if u >= n || v >= n {
                return Err(GraphError::NodeOutOfRange { node: u.max(v), n });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if w.is_zero() {
                return Err(GraphError::NonPositiveWeight(Edge::new(u, v)));
            }
            let e = Edge::new(u, v);
            if weights.insert(e, w).is_some() {
                return Err(GraphError::DuplicateEdge(e));
            }
            let pu = adj[u].len() + 1;
            adj[u].push(Neighbor { node: v, port: pu, weight: w });
            let pv = adj[v].len() + 1;
            adj[v].push(Neighbor { node: u, port: pv, weight: w });
        }
        Ok(Network { adj, weights, weighted, root: None })
    }

    fn check_connected(&self) -> Result<(), GraphError> {
        let seen = self.bfs_order(0);
        if seen.len() != self.n() {
            return Err(GraphError::Disconnected);
        }
        Ok(())
    }

    pub fn with_root(mut self, root: NodeId) -> Result<Self, GraphError> {
        if root >= self.n() {
            return Err(GraphError::NodeOutOfRange { node: root, n: self.n() });
        }
        self.root = Some(root);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.weights.len()
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn root(&self) -> Option<NodeId> {
        self.root
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.n()
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adj[u].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn neighbors(&self, u: NodeId) -> &[Neighbor<W>] {
        &self.adj[u]
    }

    pub fn is_edge(&self, u: NodeId, v: NodeId) -> bool {
        u != v && self.weights.contains_key(&Edge::new(u, v))
    }

    pub fn weight(&self, u: NodeId, v: NodeId) -> Option<W> {
        self.weights.get(&Edge::new(u, v)).copied()
    }

    pub fn edge_weight(&self, e: Edge) -> Option<W> {
        self.weights.get(&e).copied()
    }

    pub fn max_weight(&self) -> W {
        self.weights.values().copied().max().unwrap_or_else(W::one)
    }

    pub fn edges(&self) -> impl Iterator<Item = (Edge, W)> + '_ {
        self.weights.iter().map(|(&e, &w)| (e, w))
    }

    pub fn edge_set(&self) -> BTreeSet<Edge> {
        self.weights.keys().copied().collect()
    }

    /// Rank of an edge in the global tie-broken order. Panics on a non-edge.
    pub fn rank(&self, e: Edge) -> EdgeRank<W> {
        let weight = self.weights[&e];
        EdgeRank { weight, lo: e.0, hi: e.1 }
    }

    pub fn port_of(&self, u: NodeId, v: NodeId) -> Option<usize> {
        self.adj[u].iter().find(|nb| nb.node == v).map(|nb| nb.port)
    }

    pub fn neighbor_at(&self, u: NodeId, port: usize) -> Option<&Neighbor<W>> {
        port.checked_sub(1).and_then(|i| self.adj[u].get(i))
    }

    /// Replaces the weight of an existing edge.
    pub fn set_weight(&mut self, e: Edge, w: W) -> Result<(), GraphError> {
        if w.is_zero() {
            return Err(GraphError::NonPositiveWeight(e));
        }
        match self.weights.get_mut(&e) {
            Some(slot) => *slot = w,
            None => return Err(GraphError::NotAnEdge(e)),
        }
        for (a, b) in [(e.0, e.1), (e.1, e.0)] {
            for nb in self.adj[a].iter_mut() {
                if nb.node == b {
                    nb.weight = w;
                }
            }
        }
        Ok(())
    }

    fn bfs_order(&self, src: NodeId) -> Vec<NodeId> {
        let mut seen = vec![false; self.n()];
        let mut order = vec![src];
        seen[src] = true;
        let mut q = VecDeque::from([src]);
        while let Some(u) = q.pop_front() {
            for nb in &self.adj[u] {
                if !seen[nb.node] {
                    seen[nb.node] = true;
                    order.push(nb.node);
                    q.push_back(nb.node);
                }
            }
        }
        order
    }

    /// Hop distances from `src`.
    pub fn hop_distances(&self, src: NodeId) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n()];
        dist[src] = 0;
        let mut q = VecDeque::from([src]);
        while let Some(u) = q.pop_front() {
            for nb in &self.adj[u] {
                if dist[nb.node] == usize::MAX {
                    dist[nb.node] = dist[u] + 1;
                    q.push_back(nb.node);
                }
            }
        }
        dist
    }

    /// Hop diameter.
    pub fn diameter(&self) -> usize {
        self.nodes()
            .map(|u| self.hop_distances(u).into_iter().max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    /// Same topology with weights mapped through `f`.
    pub fn map_weights<V: Weight>(&self, mut f: impl FnMut(W) -> V) -> Network<V> {
        Network {
            adj: self
                .adj
                .iter()
                .map(|l| l.iter().map(|nb| Neighbor { node: nb.node, port: nb.port, weight: f(nb.weight) }).collect())
                .collect(),
            weights: self.weights.iter().map(|(&e, &w)| (e, f(w))).collect(),
            weighted: self.weighted,
            root: self.root,
        }
    }
}

/// Edge set of a parent map; `None` if some parent is not a neighbor.
pub fn parent_edges<W: Weight>(net: &Network<W>, parents: &[Option<NodeId>]) -> Option<BTreeSet<Edge>> {
    let mut out = BTreeSet::new();
    for (u, p) in parents.iter().enumerate() {
        if let Some(p) = *p {
            if !net.is_edge(u, p) {
                return None;
            }
            out.insert(Edge::new(u, p));
        }
    }
    Some(out)
}

/// True iff exactly one node has no parent, every parent is a neighbor,
/// and following parents from any node reaches the parentless node.
pub fn is_spanning_parent_map<W: Weight>(net: &Network<W>, parents: &[Option<NodeId>]) -> bool {
    let n = net.n();
    if parents.len() != n {
        return false;
    }
    let roots: Vec<_> = (0..n).filter(|&u| parents[u].is_none()).collect();
    if roots.len() != 1 {
        return false;
    }
    if parent_edges(net, parents).is_none() {
        return false;
    }
    // 0 unknown, 1 in progress, 2 reaches root
    let mut state = vec![0u8; n];
    state[roots[0]] = 2;
    for start in 0..n {
        let mut path = Vec::new();
        let mut u = start;
        while state[u] == 0 {
            state[u] = 1;
            path.push(u);
            u = parents[u].expect("only the root is parentless");
        }
        if state[u] == 1 {
            return false;
        }
        for x in path {
            state[x] = 2;
        }
    }
    true
}
