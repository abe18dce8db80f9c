//! Sequential reference algorithms on spanning structures.
//!
//! Trees are represented as edge sets. Everything here is a pure function of
//! its inputs and generic over the weight scalar.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};

use crate::error::OracleError;
use crate::graph::{Edge, EdgeRank, Network, NodeId, Weight};

pub type EdgeSet = BTreeSet<Edge>;

/// Largest network accepted by [`steiner_optimal`].
pub const STEINER_BRUTE_FORCE_CAP: usize = 14;

fn invalid(msg: impl Into<String>) -> OracleError {
    OracleError::InvalidArgument(msg.into())
}

pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), rank: vec![0; n] }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut x = x;
        while self.parent[x] != r {
            let next = self.parent[x];
            self.parent[x] = r;
            x = next;
        }
        r
    }

    /// Returns false if already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

fn adjacency(n: usize, edges: &EdgeSet) -> Vec<Vec<NodeId>> {
    let mut adj = vec![Vec::new(); n];
    for e in edges {
        adj[e.lo()].push(e.hi());
        adj[e.hi()].push(e.lo());
    }
    adj
}

pub fn tree_weight<W: Weight>(net: &Network<W>, edges: &EdgeSet) -> W {
    edges.iter().fold(W::zero(), |acc, &e| acc + net.edge_weight(e).expect("tree edge in network"))
}

pub fn degrees(n: usize, edges: &EdgeSet) -> Vec<usize> {
    let mut d = vec![0; n];
    for e in edges {
        d[e.lo()] += 1;
        d[e.hi()] += 1;
    }
    d
}

pub fn max_degree(n: usize, edges: &EdgeSet) -> usize {
    degrees(n, edges).into_iter().max().unwrap_or(0)
}

pub fn is_spanning_tree<W: Weight>(net: &Network<W>, edges: &EdgeSet) -> bool {
    let n = net.n();
    if edges.len() + 1 != n || !edges.iter().all(|e| net.is_edge(e.lo(), e.hi())) {
        return false;
    }
    let mut uf = UnionFind::new(n);
    edges.iter().all(|e| uf.union(e.lo(), e.hi()))
}

/// Node sequence of the unique path between `a` and `b` in a forest, if any.
pub fn tree_path(n: usize, edges: &EdgeSet, a: NodeId, b: NodeId) -> Option<Vec<NodeId>> {
    let adj = adjacency(n, edges);
    let mut pred = vec![usize::MAX; n];
    pred[a] = a;
    let mut q = VecDeque::from([a]);
    while let Some(u) = q.pop_front() {
        if u == b {
            break;
        }
        for &v in &adj[u] {
            if pred[v] == usize::MAX {
                pred[v] = u;
                q.push_back(v);
            }
        }
    }
    if pred[b] == usize::MAX {
        return None;
    }
    let mut path = vec![b];
    let mut x = b;
    while x != a {
        x = pred[x];
        path.push(x);
    }
    path.reverse();
    Some(path)
}

fn path_edges(path: &[NodeId]) -> impl Iterator<Item = Edge> + '_ {
    path.windows(2).map(|w| Edge::new(w[0], w[1]))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FundamentalCycle {
    pub edge: Edge,
    /// Tree path from `edge.lo()` to `edge.hi()`; the cycle closes through `edge`.
    pub path: Vec<NodeId>,
}

impl FundamentalCycle {
    pub fn tree_edges(&self) -> Vec<Edge> {
        path_edges(&self.path).collect()
    }

    pub fn contains(&self, e: Edge) -> bool {
        e == self.edge || path_edges(&self.path).any(|x| x == e)
    }
}

pub fn fundamental_cycle<W: Weight>(net: &Network<W>, tree: &EdgeSet, e: Edge) -> Result<FundamentalCycle, OracleError> {
    if tree.contains(&e) {
        return Err(invalid(format!("{e} is a tree edge")));
    }
    if !net.is_edge(e.lo(), e.hi()) {
        return Err(invalid(format!("{e} is not a network edge")));
    }
    let path = tree_path(net.n(), tree, e.lo(), e.hi()).ok_or_else(|| invalid("tree does not connect the endpoints"))?;
    Ok(FundamentalCycle { edge: e, path })
}

/// Adds `e`, removes `f`; `f` must lie on the fundamental cycle of `e`.
pub fn exchange<W: Weight>(net: &Network<W>, tree: &EdgeSet, e: Edge, f: Edge) -> Result<EdgeSet, OracleError> {
    let cycle = fundamental_cycle(net, tree, e)?;
    if f == e || !cycle.contains(f) {
        return Err(invalid(format!("{f} is not on the fundamental cycle of {e}")));
    }
    let mut out = tree.clone();
    out.remove(&f);
    out.insert(e);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cocycle {
    pub side: BTreeSet<NodeId>,
    pub edges: Vec<Edge>,
}

pub fn cocycle<W: Weight>(net: &Network<W>, side: &BTreeSet<NodeId>) -> Cocycle {
    let edges = net
        .edges()
        .map(|(e, _)| e)
        .filter(|e| side.contains(&e.lo()) != side.contains(&e.hi()))
        .collect();
    Cocycle { side: side.clone(), edges }
}

/// Minimum edge of a cut; always belongs to the minimum spanning tree.
pub fn blue_rule_edge<W: Weight>(net: &Network<W>, cocycle: &Cocycle) -> Result<Edge, OracleError> {
    cocycle
        .edges
        .iter()
        .map(|&e| net.rank(e))
        .min()
        .map(|r| r.edge())
        .ok_or_else(|| invalid("empty cocycle"))
}

/// Maximum edge of a cycle given as a closed node sequence (first node not repeated).
pub fn red_rule_edge<W: Weight>(net: &Network<W>, cycle: &[NodeId]) -> Result<Edge, OracleError> {
    let k = cycle.len();
    let distinct: BTreeSet<_> = cycle.iter().collect();
    if k < 3 || distinct.len() != k {
        return Err(invalid("not an elementary cycle"));
    }
    let mut best: Option<EdgeRank<W>> = None;
    for i in 0..k {
        let (a, b) = (cycle[i], cycle[(i + 1) % k]);
        if !net.is_edge(a, b) {
            return Err(invalid(format!("{a}-{b} is not an edge")));
        }
        let r = net.rank(Edge::new(a, b));
        best = Some(best.map_or(r, |x| x.max(r)));
    }
    Ok(best.expect("cycle has edges").edge())
}

/// All edges sorted by the tie-broken order; the order is strict.
pub fn distinct_weights<W: Weight>(net: &Network<W>) -> Vec<EdgeRank<W>> {
    let mut ranks: Vec<_> = net.edges().map(|(e, _)| net.rank(e)).collect();
    ranks.sort();
    ranks
}

/// Kruskal under the tie-broken order.
pub fn mst_reference<W: Weight>(net: &Network<W>) -> EdgeSet {
    let mut uf = UnionFind::new(net.n());
    distinct_weights(net)
        .into_iter()
        .filter(|r| uf.union(r.lo, r.hi))
        .map(|r| r.edge())
        .collect()
}

/// Minimum spanning forest of the subgraph induced by `nodes`.
pub fn induced_msf<W: Weight>(net: &Network<W>, nodes: &BTreeSet<NodeId>) -> EdgeSet {
    let mut uf = UnionFind::new(net.n());
    distinct_weights(net)
        .into_iter()
        .filter(|r| nodes.contains(&r.lo) && nodes.contains(&r.hi))
        .filter(|r| uf.union(r.lo, r.hi))
        .map(|r| r.edge())
        .collect()
}

fn bfs_tree<W: Weight>(net: &Network<W>, src: NodeId) -> EdgeSet {
    let mut seen = vec![false; net.n()];
    seen[src] = true;
    let mut q = VecDeque::from([src]);
    let mut out = EdgeSet::new();
    while let Some(u) = q.pop_front() {
        for nb in net.neighbors(u) {
            if !seen[nb.node] {
                seen[nb.node] = true;
                out.insert(Edge::new(u, nb.node));
                q.push_back(nb.node);
            }
        }
    }
    out
}

/// Local search for a low-degree spanning tree: the result's maximum degree
/// is at most one more than the optimum.
pub fn mdst_reference<W: Weight>(net: &Network<W>) -> EdgeSet {
    let mut tree = bfs_tree(net, 0);
    while mdst_phase(net, &mut tree) {}
    tree
}

/// Smallest possible maximum degree of a spanning tree, by exhaustive search.
/// Exponential; meant for the small catalog graphs.
pub fn min_max_degree_exact<W: Weight>(net: &Network<W>) -> Result<usize, OracleError> {
    let n = net.n();
    if n <= 1 {
        return Ok(0);
    }
    if !connected(net) {
        return Err(invalid("graph is not connected"));
    }
    let edges: Vec<Edge> = net.edges().map(|(e, _)| e).collect();
    (1..n).find(|&k| degree_bounded_tree(n, &edges, k)).ok_or_else(|| invalid("no spanning tree"))
}

fn connected<W: Weight>(net: &Network<W>) -> bool {
    let mut uf = UnionFind::new(net.n());
    let mut parts = net.n();
    for (e, _) in net.edges() {
        if uf.union(e.lo(), e.hi()) {
            parts -= 1;
        }
    }
    parts == 1
}

fn degree_bounded_tree(n: usize, edges: &[Edge], k: usize) -> bool {
    fn go(i: usize, taken: usize, n: usize, edges: &[Edge], k: usize, deg: &mut [usize], comp: &mut Vec<usize>) -> bool {
        if taken + 1 == n {
            return true;
        }
        if i == edges.len() || edges.len() - i < n - 1 - taken {
            return false;
        }
        let e = edges[i];
        let (a, b) = (comp[e.lo()], comp[e.hi()]);
        if a != b && deg[e.lo()] < k && deg[e.hi()] < k {
            let saved = comp.clone();
            for c in comp.iter_mut() {
                if *c == b {
                    *c = a;
                }
            }
            deg[e.lo()] += 1;
            deg[e.hi()] += 1;
            if go(i + 1, taken + 1, n, edges, k, deg, comp) {
                return true;
            }
            deg[e.lo()] -= 1;
            deg[e.hi()] -= 1;
            *comp = saved;
        }
        go(i + 1, taken, n, edges, k, deg, comp)
    }
    go(0, 0, n, edges, k, &mut vec![0; n], &mut (0..n).collect())
}

/// Whether `witness` certifies that the tree's maximum degree `k` is at most
/// one above optimal: it holds every node of degree `k` and otherwise only
/// nodes of degree `k - 1`, and no edge outside the witness joins two components of the tree with the
/// witness removed.
pub fn is_degree_witness<W: Weight>(net: &Network<W>, tree: &EdgeSet, witness: &BTreeSet<NodeId>) -> bool {
    let n = net.n();
    let deg = degrees(n, tree);
    let k = deg.iter().copied().max().unwrap_or(0);
    if witness.iter().any(|&w| w >= n || deg[w] + 1 < k) || (0..n).any(|u| deg[u] == k && !witness.contains(&u)) {
        return false;
    }
    let mut uf = UnionFind::new(n);
    for e in tree {
        if !witness.contains(&e.lo()) && !witness.contains(&e.hi()) {
            uf.union(e.lo(), e.hi());
        }
    }
    net.edges()
        .map(|(e, _)| e)
        .filter(|e| !witness.contains(&e.lo()) && !witness.contains(&e.hi()))
        .all(|e| uf.find(e.lo()) == uf.find(e.hi()))
}

/// One improvement phase. Returns true if the tree was improved.
fn mdst_phase<W: Weight>(net: &Network<W>, tree: &mut EdgeSet) -> bool {
    let n = net.n();
    let deg = degrees(n, tree);
    let k = deg.iter().copied().max().unwrap_or(0);
    if k <= 2 {
        return false;
    }
    let mut bad: Vec<bool> = deg.iter().map(|&d| d + 1 >= k).collect();
    let mut uf = UnionFind::new(n);
    for e in tree.iter() {
        if !bad[e.lo()] && !bad[e.hi()] {
            uf.union(e.lo(), e.hi());
        }
    }
    let mut reason: BTreeMap<NodeId, Edge> = BTreeMap::new();
    let non_tree: Vec<Edge> = net.edges().map(|(e, _)| e).filter(|e| !tree.contains(e)).collect();
    loop {
        let found = non_tree
            .iter()
            .copied()
            .find(|e| !bad[e.lo()] && !bad[e.hi()] && uf.find(e.lo()) != uf.find(e.hi()));
        let Some(e) = found else { return false };
        let path = tree_path(n, tree, e.lo(), e.hi()).expect("spanning tree");
        let on_path: Vec<NodeId> = path.iter().copied().filter(|&x| bad[x]).collect();
        if let Some(&w) = on_path.iter().find(|&&x| deg[x] == k) {
            let mut work = tree.clone();
            if reduce(n, &mut work, &reason, e, w, k, 0) {
                *tree = work;
                return true;
            }
            return false;
        }
        for &w in &on_path {
            bad[w] = false;
            reason.insert(w, e);
        }
        for &x in &path {
            uf.union(x, e.lo());
        }
        for &w in &on_path {
            for t in tree.iter().filter(|t| t.touches(w)) {
                let o = t.other(w);
                if !bad[o] {
                    uf.union(w, o);
                }
            }
        }
    }
}

/// Adds `e` and removes a cycle edge incident to `w`, first lowering the
/// degree of endpoints that were unblocked earlier in the phase.
fn reduce(n: usize, tree: &mut EdgeSet, reason: &BTreeMap<NodeId, Edge>, e: Edge, w: NodeId, k: usize, depth: usize) -> bool {
    if depth > n {
        return false;
    }
    for z in [e.lo(), e.hi()] {
        let dz = tree.iter().filter(|t| t.touches(z)).count();
        if dz + 1 >= k {
            let Some(&ez) = reason.get(&z) else { return false };
            if ez == e || !reduce(n, tree, reason, ez, z, k, depth + 1) {
                return false;
            }
        }
    }
    if tree.contains(&e) {
        return false;
    }
    let Some(path) = tree_path(n, tree, e.lo(), e.hi()) else { return false };
    let Some(i) = path.iter().position(|&x| x == w) else { return false };
    let f = if i > 0 { Edge::new(path[i - 1], w) } else { Edge::new(w, path[i + 1]) };
    tree.remove(&f);
    tree.insert(e);
    true
}

/// Dijkstra with deterministic tie-breaking (smaller predecessor id wins).
pub fn shortest_paths<W: Weight>(net: &Network<W>, src: NodeId) -> (Vec<W>, Vec<Option<NodeId>>) {
    let n = net.n();
    let mut dist = vec![W::max_value(); n];
    let mut pred = vec![None; n];
    dist[src] = W::zero();
    let mut heap = BinaryHeap::from([Reverse((W::zero(), src))]);
    while let Some(Reverse((d, u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for nb in net.neighbors(u) {
            let nd = d + nb.weight;
            let better = nd < dist[nb.node] || (nd == dist[nb.node] && pred[nb.node].is_some_and(|p| u < p));
            if better {
                dist[nb.node] = nd;
                pred[nb.node] = Some(u);
                heap.push(Reverse((nd, nb.node)));
            }
        }
    }
    (dist, pred)
}

/// Metric closure: all-pairs shortest path distances.
pub fn metric_closure<W: Weight>(net: &Network<W>) -> Vec<Vec<W>> {
    net.nodes().map(|u| shortest_paths(net, u).0).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SteinerVariant {
    /// Minimum spanning tree with non-member leaves pruned repeatedly.
    PrunedMst,
    /// Union of shortest paths from the first member.
    ShortestPathTree,
    /// Repeatedly attach the member closest to the current tree.
    Greedy,
}

fn check_members<W: Weight>(net: &Network<W>, members: &[NodeId]) -> Result<(), OracleError> {
    if members.is_empty() {
        return Err(invalid("member set is empty"));
    }
    if let Some(&x) = members.iter().find(|&&x| x >= net.n()) {
        return Err(invalid(format!("member {x} not in network")));
    }
    Ok(())
}

/// Removes non-member leaves until none remain.
pub fn prune_leaves(n: usize, tree: &mut EdgeSet, members: &BTreeSet<NodeId>) {
    loop {
        let deg = degrees(n, tree);
        let leaf_edges: Vec<Edge> = tree
            .iter()
            .copied()
            .filter(|e| (deg[e.lo()] == 1 && !members.contains(&e.lo())) || (deg[e.hi()] == 1 && !members.contains(&e.hi())))
            .collect();
        if leaf_edges.is_empty() {
            return;
        }
        for e in leaf_edges {
            tree.remove(&e);
        }
    }
}

/// Connects `x` to the closest node of `tree_nodes` along a shortest path.
fn attach<W: Weight>(net: &Network<W>, tree: &mut EdgeSet, tree_nodes: &mut BTreeSet<NodeId>, x: NodeId) {
    if tree_nodes.contains(&x) {
        return;
    }
    let (dist, pred) = shortest_paths(net, x);
    let target = tree_nodes
        .iter()
        .copied()
        .min_by_key(|&t| (dist[t], t))
        .expect("non-empty tree");
    let mut y = target;
    while y != x {
        let p = pred[y].expect("connected network");
        tree.insert(Edge::new(p, y));
        tree_nodes.insert(y);
        y = p;
    }
    tree_nodes.insert(x);
}

pub fn steiner_reference<W: Weight>(net: &Network<W>, members: &[NodeId], variant: SteinerVariant) -> Result<EdgeSet, OracleError> {
    check_members(net, members)?;
    let set: BTreeSet<NodeId> = members.iter().copied().collect();
    let n = net.n();
    Ok(match variant {
        SteinerVariant::PrunedMst => {
            let mut t = mst_reference(net);
            prune_leaves(n, &mut t, &set);
            t
        }
        SteinerVariant::ShortestPathTree => {
            let (_, pred) = shortest_paths(net, members[0]);
            let mut t = EdgeSet::new();
            for &x in &set {
                let mut y = x;
                while let Some(p) = pred[y] {
                    t.insert(Edge::new(p, y));
                    y = p;
                }
            }
            t
        }
        SteinerVariant::Greedy => {
            let closure = metric_closure(net);
            let mut t = EdgeSet::new();
            let mut in_tree = BTreeSet::from([members[0]]);
            let mut pending: BTreeSet<NodeId> = set.iter().copied().filter(|&x| x != members[0]).collect();
            while !pending.is_empty() {
                let &next = pending
                    .iter()
                    .min_by_key(|&&x| (in_tree.iter().map(|&t| closure[x][t]).min().expect("non-empty"), x))
                    .expect("non-empty");
                pending.remove(&next);
                attach(net, &mut t, &mut in_tree, next);
            }
            t
        }
    })
}

/// Members arrive one at a time; each joins the current tree along a shortest path.
pub fn steiner_online<W: Weight>(net: &Network<W>, arrivals: &[NodeId]) -> Result<EdgeSet, OracleError> {
    check_members(net, arrivals)?;
    let distinct: BTreeSet<_> = arrivals.iter().collect();
    if distinct.len() != arrivals.len() {
        return Err(invalid("arrivals must be distinct"));
    }
    let mut t = EdgeSet::new();
    let mut in_tree = BTreeSet::from([arrivals[0]]);
    for &x in &arrivals[1..] {
        attach(net, &mut t, &mut in_tree, x);
    }
    Ok(t)
}

/// Exact Steiner tree weight: for every set of extra nodes, the minimum
/// spanning tree of the metric closure restricted to members plus extras.
pub fn steiner_optimal<W: Weight>(net: &Network<W>, members: &[NodeId]) -> Result<W, OracleError> {
    check_members(net, members)?;
    let n = net.n();
    if n > STEINER_BRUTE_FORCE_CAP {
        return Err(OracleError::CapExceeded { n, cap: STEINER_BRUTE_FORCE_CAP });
    }
    let closure = metric_closure(net);
    let set: BTreeSet<NodeId> = members.iter().copied().collect();
    let others: Vec<NodeId> = net.nodes().filter(|x| !set.contains(x)).collect();
    let mut best = W::max_value();
    for mask in 0u32..(1u32 << others.len()) {
        let mut nodes: Vec<NodeId> = set.iter().copied().collect();
        nodes.extend(others.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &x)| x));
        best = best.min(closure_mst_weight(&closure, &nodes));
    }
    Ok(best)
}

fn closure_mst_weight<W: Weight>(closure: &[Vec<W>], nodes: &[NodeId]) -> W {
    // Prim on the dense closure.
    let k = nodes.len();
    let mut in_tree = vec![false; k];
    let mut best = vec![W::max_value(); k];
    best[0] = W::zero();
    let mut total = W::zero();
    for _ in 0..k {
        let i = (0..k).filter(|&i| !in_tree[i]).min_by_key(|&i| best[i]).expect("remaining node");
        in_tree[i] = true;
        total = total + best[i];
        for j in 0..k {
            if !in_tree[j] {
                best[j] = best[j].min(closure[nodes[i]][nodes[j]]);
            }
        }
    }
    total
}
