use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stabilab_core::gen;
use stabilab_robots::naming::{ids_from_leader, symmetry_witness, Mode, NamingFaults, NamingSystem, PortGraph, Whiteboard};

proptest! {
    #[test]
    fn whiteboard_heals_after_k_writes(
        k in 1usize..8,
        junk in proptest::collection::vec((0usize..20, 1usize..5), 0..20),
        fresh in proptest::collection::vec((0usize..20, 1usize..5), 8..16),
    ) {
        let mut b = Whiteboard::new(k);
        for &(id, port) in &junk {
            b.write(id, port);
        }
        for &(id, port) in &fresh[..k] {
            b.write(id, port);
        }
        let got: Vec<_> = b.entries().copied().collect();
        prop_assert_eq!(got, fresh[..k].to_vec());
    }
}

#[test]
fn deterministic_naming_recovers_on_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for seed in 0..20 {
        let g = PortGraph::from_graph(&gen::random_tree(9, 1, &mut rng));
        let mut sys = NamingSystem::new(g, 5, Mode::Deterministic, seed).unwrap();
        sys.corrupt(NamingFaults::all());
        let rep = sys.run(10_000).unwrap();
        assert!(rep.converged, "seed {seed}: {:?}", rep.ids);
        let mut ids = rep.ids.clone();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 5);
        assert!(ids.iter().all(|&i| (1..=5).contains(&i)));
    }
}

#[test]
fn probabilistic_naming_recovers_on_cycles() {
    for seed in 0..20 {
        let g = PortGraph::from_graph(&gen::cycle(8));
        let mut sys = NamingSystem::new(g, 4, Mode::Probabilistic, seed).unwrap();
        sys.corrupt(NamingFaults::parse("ids,positions,boards").unwrap());
        assert!(sys.run(100_000).unwrap().converged, "seed {seed}");
    }
}

#[test]
fn leader_tour_gives_distinct_ids() {
    let g = PortGraph::from_graph(&gen::path(6));
    let ids = ids_from_leader(&g, &[0, 2, 2, 5], 3).unwrap();
    let mut sorted = ids.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, vec![1, 2, 3, 4]);
    assert_eq!(ids[3], 1);
}

#[test]
fn symmetric_cycle_never_breaks() {
    assert_eq!(symmetry_witness(6, 500).unwrap(), 500);
}
