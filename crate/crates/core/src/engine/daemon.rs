use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};

use super::SimRng;
use crate::graph::NodeId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DaemonKind {
    Central,
    Distributed,
    Synchronous,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Fairness {
    Weak,
    Strong,
    Unfair,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Daemon {
    pub kind: DaemonKind,
    pub fairness: Fairness,
    pub seed: u64,
}

impl Daemon {
    pub fn new(kind: DaemonKind, fairness: Fairness, seed: u64) -> Self {
        Daemon { kind, fairness, seed }
    }

    /// Randomized weakly fair distributed daemon.
    pub fn distributed(seed: u64) -> Self {
        Daemon::new(DaemonKind::Distributed, Fairness::Weak, seed)
    }

    pub fn central(seed: u64) -> Self {
        Daemon::new(DaemonKind::Central, Fairness::Weak, seed)
    }

    pub fn synchronous() -> Self {
        Daemon::new(DaemonKind::Synchronous, Fairness::Weak, 0)
    }
}

impl fmt::Display for DaemonKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DaemonKind::Central => "central",
            DaemonKind::Distributed => "distributed",
            DaemonKind::Synchronous => "synchronous",
        })
    }
}

impl fmt::Display for Fairness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fairness::Weak => "weak",
            Fairness::Strong => "strong",
            Fairness::Unfair => "unfair",
        })
    }
}

impl FromStr for DaemonKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "central" => Ok(DaemonKind::Central),
            "distributed" => Ok(DaemonKind::Distributed),
            "synchronous" => Ok(DaemonKind::Synchronous),
            _ => Err(format!("unknown daemon kind `{s}`")),
        }
    }
}

impl FromStr for Fairness {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "weak" => Ok(Fairness::Weak),
            "strong" => Ok(Fairness::Strong),
            "unfair" => Ok(Fairness::Unfair),
            _ => Err(format!("unknown fairness `{s}`")),
        }
    }
}

/// Stateful daemon: seeded choices plus per-node waiting ages.
///
/// Fair daemons weight each activable node by how long it has waited and
/// force any node that has waited `2n` steps. Weak fairness forgets the wait
/// when a node stops being activable; strong fairness keeps it.
#[derive(Clone, Debug)]
pub struct Scheduler {
    daemon: Daemon,
    rng: SimRng,
    age: Vec<u64>,
}

impl Scheduler {
    pub fn new(daemon: Daemon, n: usize) -> Self {
        Scheduler { daemon, rng: SimRng::seed_from_u64(daemon.seed), age: vec![0; n] }
    }

    pub fn daemon(&self) -> Daemon {
        self.daemon
    }

    fn fair(&self) -> bool {
        self.daemon.fairness != Fairness::Unfair
    }

    fn force_threshold(&self) -> u64 {
        2 * self.age.len() as u64
    }

    fn pick_one(&mut self, candidates: &[NodeId]) -> NodeId {
        if !self.fair() {
            return candidates[self.rng.gen_range(0..candidates.len())];
        }
        let total: u64 = candidates.iter().map(|&u| 1 + self.age[u]).sum();
        let mut x = self.rng.gen_range(0..total);
        for &u in candidates {
            let w = 1 + self.age[u];
            if x < w {
                return u;
            }
            x -= w;
        }
        unreachable!("weighted pick within total")
    }

    /// Chooses the nodes to activate among `activable` (sorted) and updates ages.
    pub fn select(&mut self, activable: &[NodeId]) -> Vec<NodeId> {
        if activable.is_empty() {
            self.age_update(activable, &[]);
            return Vec::new();
        }
        let threshold = self.force_threshold();
        let overdue: Vec<NodeId> = if self.fair() {
            activable.iter().copied().filter(|&u| self.age[u] >= threshold).collect()
        } else {
            Vec::new()
        };
        let chosen = match self.daemon.kind {
            DaemonKind::Synchronous => activable.to_vec(),
            DaemonKind::Central => {
                if let Some(&oldest) = overdue.iter().max_by_key(|&&u| (self.age[u], std::cmp::Reverse(u))) {
                    vec![oldest]
                } else {
                    vec![self.pick_one(activable)]
                }
            }
            DaemonKind::Distributed => {
                let mut out = Vec::new();
                for &u in activable {
                    let include = if overdue.contains(&u) {
                        true
                    } else if self.fair() {
                        let a = self.age[u];
                        self.rng.gen_range(0..a + 2) != 0
                    } else {
                        self.rng.gen_bool(0.5)
                    };
                    if include {
                        out.push(u);
                    }
                }
                if out.is_empty() {
                    out.push(self.pick_one(activable));
                }
                out
            }
        };
        self.age_update(activable, &chosen);
        chosen
    }

    fn age_update(&mut self, activable: &[NodeId], chosen: &[NodeId]) {
        let strong = self.daemon.fairness == Fairness::Strong;
        let mut is_act = vec![false; self.age.len()];
        for &u in activable {
            is_act[u] = true;
        }
        for &u in chosen {
            is_act[u] = false;
            self.age[u] = 0;
        }
        for (u, age) in self.age.iter_mut().enumerate() {
            if is_act[u] {
                *age += 1;
            } else if !strong && !chosen.contains(&u) {
                *age = 0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_respect_cardinality() {
        let act = [0, 2, 3];
        let mut s = Scheduler::new(Daemon::synchronous(), 4);
        assert_eq!(s.select(&act), vec![0, 2, 3]);
        let mut c = Scheduler::new(Daemon::central(1), 4);
        for _ in 0..20 {
            assert_eq!(c.select(&act).len(), 1);
        }
        let mut d = Scheduler::new(Daemon::distributed(1), 4);
        for _ in 0..20 {
            let chosen = d.select(&act);
            assert!(!chosen.is_empty() && chosen.iter().all(|u| act.contains(u)));
        }
    }

    #[test]
    fn same_seed_same_choices() {
        let act = [0, 1, 2, 3, 4];
        let mut a = Scheduler::new(Daemon::distributed(9), 5);
        let mut b = Scheduler::new(Daemon::distributed(9), 5);
        for _ in 0..50 {
            assert_eq!(a.select(&act), b.select(&act));
        }
    }

    #[test]
    fn fair_central_serves_everyone() {
        let act: Vec<NodeId> = (0..6).collect();
        let mut c = Scheduler::new(Daemon::central(4), 6);
        let mut served = [false; 6];
        for _ in 0..13 {
            for u in c.select(&act) {
                served[u] = true;
            }
        }
        assert!(served.iter().all(|&b| b));
    }

    #[test]
    fn parse_names() {
        assert_eq!("central".parse::<DaemonKind>().unwrap(), DaemonKind::Central);
        assert_eq!("strong".parse::<Fairness>().unwrap(), Fairness::Strong);
        assert!("lazy".parse::<Fairness>().is_err());
    }
}
