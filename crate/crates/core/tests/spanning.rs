use std::collections::BTreeSet;

use rand::SeedableRng;
use stabilab_core::engine::{inject_faults, parent_map, run, Daemon, Event, FaultSpec, Protocol, RunOptions, ScheduledEvent, SimRng};
use stabilab_core::oracles::{is_spanning_tree, mst_reference, shortest_paths, steiner_optimal};
use stabilab_core::protocols::mst_cyclic::tree_edges;
use stabilab_core::protocols::steiner::steiner_edges;
use stabilab_core::protocols::{MstCyclic, MstLca, Spt, Steiner};
use stabilab_core::{gen, Edge, Graph, Network};

fn corrupted<P: Protocol>(proto: &P, net: &Graph, seed: u64) -> Vec<P::State> {
    let mut rng = SimRng::seed_from_u64(seed);
    inject_faults(proto, net, &proto.initial_configuration(net), &FaultSpec::total(), &mut rng).unwrap()
}

fn final_tree<P: Protocol>(proto: &P, net: &Graph, cfg: &[P::State]) -> BTreeSet<Edge> {
    let parents = parent_map(proto, cfg).expect("tree protocol");
    tree_edges(net, &parents).expect("parent map is a tree")
}

#[test]
fn spt_distances_match_dijkstra() {
    let mut rng = SimRng::seed_from_u64(11);
    for seed in 0..8 {
        let net = gen::random_connected(9, 7, 20, &mut rng);
        let rep = run(&Spt, &net, corrupted(&Spt, &net, seed), Daemon::distributed(seed), &RunOptions::rounds(5000)).unwrap();
        assert!(rep.converged, "seed {seed}");
        let root = stabilab_core::protocols::spt::spt_root(&net);
        let (dist, _) = shortest_paths(&net, root);
        let tree = final_tree(&Spt, &net, &rep.final_config);
        assert!(is_spanning_tree(&net, &tree));
        let restricted = Network::new(net.n(), &tree.iter().map(|e| (e.lo(), e.hi(), net.edge_weight(*e).unwrap())).collect::<Vec<_>>())
            .unwrap();
        assert_eq!(shortest_paths(&restricted, root).0, dist, "seed {seed}");
    }
}

#[test]
fn both_mst_protocols_agree_with_kruskal() {
    let mut rng = SimRng::seed_from_u64(3);
    for seed in 0..5 {
        let net = gen::random_connected(8, 8, 30, &mut rng);
        let expected = mst_reference(&net);
        let cyc = run(&MstCyclic, &net, corrupted(&MstCyclic, &net, seed), Daemon::distributed(seed), &RunOptions::rounds(50_000))
            .unwrap();
        assert!(cyc.converged);
        assert_eq!(final_tree(&MstCyclic, &net, &cyc.final_config), expected);
        let lca =
            run(&MstLca, &net, corrupted(&MstLca, &net, seed), Daemon::distributed(seed), &RunOptions::rounds(50_000)).unwrap();
        assert!(lca.converged);
        assert_eq!(final_tree(&MstLca, &net, &lca.final_config), expected);
    }
}

#[test]
fn mst_follows_a_weight_change() {
    // Square with a diagonal: raising (0,1) swaps it out for (2,3).
    let net = Network::new(4, &[(0, 1, 1), (1, 2, 2), (2, 3, 5), (3, 0, 3), (0, 2, 9)]).unwrap();
    let ev = ScheduledEvent { round: 200, event: Event::Weight { edge: Edge::new(0, 1), weight: 8 } };
    let opts = RunOptions { max_rounds: 20_000, events: vec![ev], ..Default::default() };
    let rep = run(&MstCyclic, &net, MstCyclic.initial_configuration(&net), Daemon::distributed(1), &opts).unwrap();
    assert!(rep.converged);
    let tree = final_tree(&MstCyclic, &rep.net, &rep.final_config);
    assert_eq!(tree, mst_reference(&rep.net));
    assert!(tree.contains(&Edge::new(2, 3)) && !tree.contains(&Edge::new(0, 1)));
}

#[test]
fn steiner_tree_is_two_approximate_and_absorbs_a_join() {
    let mut rng = SimRng::seed_from_u64(21);
    for seed in 0..5 {
        let net = gen::random_connected(10, 8, 9, &mut rng);
        let members = [2, 5, 7];
        let init = Steiner.with_members(&net, &members);
        let join = ScheduledEvent { round: 300, event: Event::Member { node: 9, join: true } };
        let opts = RunOptions { max_rounds: 20_000, events: vec![join], ..Default::default() };
        let rep = run(&Steiner, &net, init, Daemon::distributed(seed), &opts).unwrap();
        assert!(rep.converged, "seed {seed}");
        let tree = steiner_edges(&rep.net, &rep.final_config).expect("tree");
        let all = [stabilab_core::protocols::steiner::steiner_root(&net), 2, 5, 7, 9];
        for m in all {
            assert!(tree.iter().any(|e| e.touches(m)) || tree.is_empty(), "member {m} missing");
        }
        let w: u64 = tree.iter().map(|e| rep.net.edge_weight(*e).unwrap()).sum();
        let opt = steiner_optimal(&rep.net, &all).unwrap();
        assert!(w <= 2 * opt, "seed {seed}: {w} vs opt {opt}");
    }
}
