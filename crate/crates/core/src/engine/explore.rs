use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;

use rand::SeedableRng;

use super::{DaemonKind, Protocol, SimRng, View};
use crate::Graph;

pub const DEFAULT_STATE_CAP: usize = 200_000;

/// Finite transition system driven by an adversary choosing activation sets.
pub trait TransitionSystem {
    type State: Clone + Eq + Hash + Debug;

    /// Actors whose action is enabled in `s`.
    fn enabled(&self, s: &Self::State) -> Vec<usize>;

    /// Possible results of activating `activated` together. More than one
    /// result means the adversary has a further choice.
    fn successors(&self, s: &Self::State, activated: &[usize]) -> Vec<Self::State>;

    fn legitimate(&self, s: &Self::State) -> bool;
}

/// Register protocol seen as a transition system. Randomized steps are
/// resolved with a fixed seed, so only the daemon's choices branch.
pub struct RegisterSystem<'a, P: Protocol> {
    pub proto: &'a P,
    pub net: &'a Graph,
}

impl<P: Protocol> TransitionSystem for RegisterSystem<'_, P> {
    type State = Vec<P::State>;

    fn enabled(&self, s: &Self::State) -> Vec<usize> {
        self.net.nodes().filter(|&u| self.proto.activable(&View::new(self.net, u, s))).collect()
    }

    fn successors(&self, s: &Self::State, activated: &[usize]) -> Vec<Self::State> {
        let mut rng = SimRng::seed_from_u64(0);
        let mut next = s.clone();
        for &u in activated {
            next[u] = self.proto.step(&View::new(self.net, u, s), &mut rng);
        }
        vec![next]
    }

    fn legitimate(&self, s: &Self::State) -> bool {
        self.proto.legitimate(self.net, s) && (!self.proto.silent() || self.enabled(s).is_empty())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExploreOutcome {
    /// Most rounds any explored schedule needed to reach legitimacy.
    pub worst_rounds: usize,
    /// Activation sequence that avoids legitimacy for the whole depth, if one exists.
    pub witness: Option<Vec<Vec<usize>>>,
    /// The state cap was hit; results cover only part of the schedules.
    pub partial: bool,
    pub states: usize,
}

#[derive(Clone)]
enum Verdict {
    Converges(usize),
    Diverges(Vec<Vec<usize>>),
}

type Key<S> = (S, Vec<bool>, bool, usize);

struct Search<'a, T: TransitionSystem> {
    sys: &'a T,
    kind: DaemonKind,
    cap: usize,
    partial: bool,
    memo: HashMap<Key<T::State>, Verdict>,
}

impl<T: TransitionSystem> Search<'_, T> {
    fn choices(&self, enabled: &[usize]) -> Vec<Vec<usize>> {
        match self.kind {
            DaemonKind::Central => enabled.iter().map(|&u| vec![u]).collect(),
            DaemonKind::Synchronous => vec![enabled.to_vec()],
            DaemonKind::Distributed => {
                let k = enabled.len().min(16);
                (1u32..(1 << k))
                    .map(|mask| (0..k).filter(|i| mask >> i & 1 == 1).map(|i| enabled[i]).collect())
                    .collect()
            }
        }
    }

    fn visit(&mut self, s: &T::State, pending: &[bool], started: bool, depth: usize) -> Verdict {
        if self.sys.legitimate(s) {
            return Verdict::Converges(usize::from(started));
        }
        if depth == 0 {
            return Verdict::Diverges(Vec::new());
        }
        let key = (s.clone(), pending.to_vec(), started, depth);
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        if self.memo.len() >= self.cap {
            self.partial = true;
            return Verdict::Converges(0);
        }
        let enabled = self.sys.enabled(s);
        let verdict = if enabled.is_empty() {
            // Deadlocked outside legitimacy.
            Verdict::Diverges(Vec::new())
        } else {
            let mut worst = 0;
            let mut found = None;
            'outer: for act in self.choices(&enabled) {
                for next in self.sys.successors(s, &act) {
                    let next_enabled = self.sys.enabled(&next);
                    let mut p = pending.to_vec();
                    for &u in &act {
                        p[u] = false;
                    }
                    for (u, flag) in p.iter_mut().enumerate() {
                        if *flag && !next_enabled.contains(&u) {
                            *flag = false;
                        }
                    }
                    let (closed, p, st) = if p.iter().any(|&b| b) {
                        (0, p, true)
                    } else {
                        let mut fresh = vec![false; p.len()];
                        for &u in &next_enabled {
                            fresh[u] = true;
                        }
                        (1, fresh, false)
                    };
                    match self.visit(&next, &p, st, depth - 1) {
                        Verdict::Converges(r) => worst = worst.max(closed + r),
                        Verdict::Diverges(mut w) => {
                            w.insert(0, act.clone());
                            found = Some(w);
                            break 'outer;
                        }
                    }
                }
            }
            match found {
                Some(w) => Verdict::Diverges(w),
                None => Verdict::Converges(worst),
            }
        };
        self.memo.insert(key, verdict.clone());
        verdict
    }
}

/// Explores every daemon-legal schedule of `depth` steps from `init`.
pub fn exhaustive_schedules<T: TransitionSystem>(
    sys: &T,
    init: &T::State,
    kind: DaemonKind,
    depth: usize,
    cap: usize,
    actors: usize,
) -> ExploreOutcome {
    let mut search = Search { sys, kind, cap, partial: false, memo: HashMap::new() };
    let mut pending = vec![false; actors];
    for u in sys.enabled(init) {
        pending[u] = true;
    }
    let verdict = search.visit(init, &pending, false, depth);
    let states = search.memo.len();
    match verdict {
        Verdict::Converges(r) => ExploreOutcome { worst_rounds: r, witness: None, partial: search.partial, states },
        Verdict::Diverges(w) => ExploreOutcome { worst_rounds: 0, witness: Some(w), partial: search.partial, states },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Counter that only the adversary's choice of actor 0 advances.
    struct Counter;

    impl TransitionSystem for Counter {
        type State = u8;
        fn enabled(&self, s: &u8) -> Vec<usize> {
            if *s < 3 {
                vec![0, 1]
            } else {
                vec![]
            }
        }
        fn successors(&self, s: &u8, act: &[usize]) -> Vec<u8> {
            vec![if act.contains(&0) { s + 1 } else { *s }]
        }
        fn legitimate(&self, s: &u8) -> bool {
            *s >= 3
        }
    }

    #[test]
    fn central_adversary_can_starve() {
        let out = exhaustive_schedules(&Counter, &0, DaemonKind::Central, 10, DEFAULT_STATE_CAP, 2);
        let w = out.witness.expect("starving schedule");
        assert_eq!(w.len(), 10);
        assert!(w.iter().filter(|a| a.contains(&0)).count() < 3);
    }

    #[test]
    fn synchronous_converges() {
        let out = exhaustive_schedules(&Counter, &0, DaemonKind::Synchronous, 10, DEFAULT_STATE_CAP, 2);
        assert!(out.witness.is_none());
        assert_eq!(out.worst_rounds, 3);
    }

    #[test]
    fn legitimate_start() {
        let out = exhaustive_schedules(&Counter, &3, DaemonKind::Central, 5, DEFAULT_STATE_CAP, 2);
        assert_eq!(out.worst_rounds, 0);
        assert!(out.witness.is_none());
    }
}
