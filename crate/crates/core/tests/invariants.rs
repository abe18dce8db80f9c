use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use stabilab_core::engine::SimRng;
use stabilab_core::label::{heavy_light_labels, lca_of_labels};
use stabilab_core::oracles::{exchange, fundamental_cycle, is_spanning_tree, mst_reference, tree_weight};
use stabilab_core::{gen, Edge, NodeId};

/// Random rooted tree as parent pointers: node i > 0 hangs below some j < i.
fn parents_strategy() -> impl Strategy<Value = Vec<Option<NodeId>>> {
    (1usize..40).prop_flat_map(|n| {
        proptest::collection::vec(any::<prop::sample::Index>(), n - 1).prop_map(move |picks| {
            let mut p = vec![None];
            for (i, ix) in picks.iter().enumerate() {
                p.push(Some(ix.index(i + 1)));
            }
            p
        })
    })
}

fn ancestors(parents: &[Option<NodeId>], mut u: NodeId) -> Vec<NodeId> {
    let mut out = vec![u];
    while let Some(p) = parents[u] {
        out.push(p);
        u = p;
    }
    out
}

fn brute_lca(parents: &[Option<NodeId>], u: NodeId, v: NodeId) -> NodeId {
    let au: BTreeSet<NodeId> = ancestors(parents, u).into_iter().collect();
    ancestors(parents, v).into_iter().find(|x| au.contains(x)).unwrap()
}

proptest! {
    #[test]
    fn labels_answer_lca_queries(parents in parents_strategy(), a in any::<prop::sample::Index>(), b in any::<prop::sample::Index>()) {
        let n = parents.len();
        let labels = heavy_light_labels(&parents).unwrap();
        let (u, v) = (a.index(n), b.index(n));
        let lca = brute_lca(&parents, u, v);
        prop_assert_eq!(lca_of_labels(&labels[u], &labels[v]), Some(labels[lca].clone()));
        prop_assert_eq!(labels[u].depth(), ancestors(&parents, u).len() - 1);
    }

    #[test]
    fn label_has_at_most_log_n_light_edges(parents in parents_strategy()) {
        let n = parents.len();
        let labels = heavy_light_labels(&parents).unwrap();
        let bound = (usize::BITS - n.leading_zeros()) as usize;
        for l in &labels {
            prop_assert!(l.len() <= bound, "{:?} longer than {}", l, bound);
        }
    }

    #[test]
    fn labels_are_unique(parents in parents_strategy()) {
        let labels = heavy_light_labels(&parents).unwrap();
        let set: BTreeSet<_> = labels.iter().collect();
        prop_assert_eq!(set.len(), labels.len());
    }

    #[test]
    fn exchange_on_fundamental_cycle_keeps_a_spanning_tree(seed in any::<u64>(), n in 3usize..12, extra in 1usize..10) {
        let mut rng = SimRng::seed_from_u64(seed);
        let net = gen::random_connected(n, extra, 20, &mut rng);
        let tree = mst_reference(&net);
        let mst_w = tree_weight(&net, &tree);
        for (e, _) in net.edges().filter(|(e, _)| !tree.contains(e)).collect::<Vec<(Edge, u64)>>() {
            let cyc = fundamental_cycle(&net, &tree, e).unwrap();
            for f in cyc.tree_edges() {
                let t2 = exchange(&net, &tree, e, f).unwrap();
                prop_assert!(is_spanning_tree(&net, &t2));
                prop_assert!(tree_weight(&net, &t2) >= mst_w);
            }
        }
    }
}
