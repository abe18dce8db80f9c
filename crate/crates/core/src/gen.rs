//! Seeded network generators.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::NodeId;
use crate::Graph;

fn weight<R: Rng>(rng: &mut R, max_weight: u64) -> u64 {
    rng.gen_range(1..=max_weight.max(1))
}

/// Random labelled tree: each node attaches to a uniformly chosen earlier node
/// of a random permutation.
pub fn random_tree_edges<R: Rng>(n: usize, rng: &mut R) -> Vec<(NodeId, NodeId)> {
    let mut order: Vec<NodeId> = (0..n).collect();
    order.shuffle(rng);
    (1..n).map(|i| (order[rng.gen_range(0..i)], order[i])).collect()
}

/// Connected graph: a random spanning tree plus `extra` distinct random edges
/// (fewer if the graph becomes complete). Weights uniform in `1..=max_weight`.
pub fn random_connected<R: Rng>(n: usize, extra: usize, max_weight: u64, rng: &mut R) -> Graph {
    let mut pairs = random_tree_edges(n, rng);
    let mut present: std::collections::BTreeSet<(NodeId, NodeId)> =
        pairs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    let mut missing: Vec<(NodeId, NodeId)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .filter(|p| !present.contains(p))
        .collect();
    missing.shuffle(rng);
    for p in missing.into_iter().take(extra) {
        present.insert(p);
        pairs.push(p);
    }
    let edges: Vec<_> = pairs.into_iter().map(|(a, b)| (a, b, weight(rng, max_weight))).collect();
    Graph::new(n, &edges).expect("generated graph is connected")
}

pub fn random_tree<R: Rng>(n: usize, max_weight: u64, rng: &mut R) -> Graph {
    random_connected(n, 0, max_weight, rng)
}

pub fn path(n: usize) -> Graph {
    let e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::unweighted(n, &e).expect("path")
}

pub fn cycle(n: usize) -> Graph {
    let mut e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    if n > 2 {
        e.push((n - 1, 0));
    }
    Graph::unweighted(n, &e).expect("cycle")
}

pub fn star(n: usize) -> Graph {
    let e: Vec<_> = (1..n).map(|i| (0, i)).collect();
    Graph::unweighted(n, &e).expect("star")
}

pub fn complete(n: usize) -> Graph {
    let e: Vec<_> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    Graph::unweighted(n, &e).expect("complete")
}

/// Same topology with weights redrawn uniformly in `1..=max_weight`.
pub fn reweight<R: Rng>(net: &Graph, max_weight: u64, rng: &mut R) -> Graph {
    net.map_weights(|_| weight(rng, max_weight))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_are_connected_and_seeded() {
        let a = random_connected(10, 5, 50, &mut ChaCha8Rng::seed_from_u64(3));
        let b = random_connected(10, 5, 50, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
        assert_eq!(a.m(), 14);
        assert_eq!(complete(5).m(), 10);
        assert_eq!(cycle(6).m(), 6);
        assert_eq!(star(5).max_degree(), 4);
    }
}
