use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stabilab_robots::pellicule::{bracelet_count, impossibility_check};
use stabilab_robots::ring::{
    all_snapshots, canonical_snapshot, convergence_check, corda_run, max_start, Algo, RandomAdversary, Snapshot,
};

fn rotate(positions: &[usize], n: usize, r: usize) -> Vec<usize> {
    positions.iter().map(|&p| (p + r) % n).collect()
}

fn mirror(positions: &[usize], n: usize) -> Vec<usize> {
    positions.iter().map(|&p| (n - p) % n).collect()
}

fn placement() -> impl Strategy<Value = (usize, Vec<usize>)> {
    (4usize..16).prop_flat_map(|n| {
        (Just(n), proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 1..n))
    })
}

proptest! {
    #[test]
    fn snapshot_ignores_rotation_and_reflection((n, pos) in placement(), r in 0usize..16) {
        let s = canonical_snapshot(&pos, n).unwrap();
        prop_assert_eq!(&canonical_snapshot(&rotate(&pos, n, r), n).unwrap(), &s);
        prop_assert_eq!(&canonical_snapshot(&mirror(&pos, n), n).unwrap(), &s);
        prop_assert_eq!(s.n(), n);
        prop_assert_eq!(s.k(), pos.len());
        prop_assert_eq!(canonical_snapshot(&s.positions(), n).unwrap(), s);
    }
}

#[test]
fn snapshot_enumeration_matches_burnside() {
    for n in 4..=13 {
        for k in 1..n {
            assert_eq!(all_snapshots(n, k).unwrap().len() as u128, bracelet_count(n, k), "n={n} k={k}");
        }
    }
}

#[test]
fn three_robots_converge_from_every_snapshot() {
    for n in [10, 11, 13, 14, 16] {
        let c = convergence_check(Algo::Min, n, 3).unwrap();
        assert!(c.permanent > 0 && c.worst_steps < c.snapshots, "n={n}: {c:?}");
    }
}

#[test]
fn random_runs_never_collide_and_cover_the_ring() {
    for (n, algo, init) in [(11, Algo::Min, vec![0, 4, 7]), (12, Algo::Max, max_start(12, 7).unwrap())] {
        let mut adv = RandomAdversary { rng: ChaCha8Rng::seed_from_u64(n as u64) };
        let rep = corda_run(n, algo, &init, &mut adv, 20_000).unwrap();
        assert!(!rep.collision && rep.error.is_none(), "{algo} n={n}");
        assert!(rep.visit_counts.iter().all(|row| row.iter().all(|&c| c > 0)), "{algo} n={n}");
    }
}

#[test]
fn closed_form_verdicts() {
    assert!(impossibility_check(12, 4).unwrap().impossible);
    assert!(impossibility_check(9, 3).unwrap().impossible);
    assert!(impossibility_check(9, 5).unwrap().impossible);
    assert!(!impossibility_check(10, 3).unwrap().impossible);
    assert!(!impossibility_check(12, 7).unwrap().impossible);
    assert_eq!(Snapshot { blocks: vec![3, 7] }.to_string(), "(R3,F7)");
}
