//! Anonymous oblivious robots on an unoriented ring with exclusivity.
//!
//! Robots see the whole ring, have no sense of direction and no memory. An
//! algorithm maps snapshots to moves; the adversary activates any non-empty
//! subset of the robots the algorithm enables, and all of them act on the
//! same pre-move configuration.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::RobotError;

/// Circular run-length encoding, starting with a robot block:
/// `blocks[0]` robots, `blocks[1]` free nodes, `blocks[2]` robots, and so on.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Snapshot {
    pub blocks: Vec<usize>,
}

impl Snapshot {
    pub fn n(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn k(&self) -> usize {
        self.blocks.iter().step_by(2).sum()
    }

    /// A concrete placement with this snapshot: the blocks laid out from node 0.
    pub fn positions(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut at = 0;
        for (i, &c) in self.blocks.iter().enumerate() {
            if i % 2 == 0 {
                out.extend(at..at + c);
            }
            at += c;
        }
        out
    }
}

impl fmt::Display for Snapshot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}{c}", if i % 2 == 0 { 'R' } else { 'F' })?;
        }
        write!(f, ")")
    }
}

/// A reading of the ring from robot `start` in direction `dir` (+1 or -1),
/// where the node behind `start` is free.
#[derive(Clone, Debug)]
pub struct Orientation {
    pub start: usize,
    pub dir: isize,
    pub blocks: Vec<usize>,
    /// Robot positions in reading order.
    pub robots: Vec<usize>,
}

pub fn step(n: usize, pos: usize, dir: isize) -> usize {
    (pos as isize + dir).rem_euclid(n as isize) as usize
}

fn occupancy(positions: &[usize], n: usize) -> Result<Vec<bool>, RobotError> {
    let mut occ = vec![false; n];
    for &p in positions {
        if p >= n {
            return Err(RobotError::OutOfRange { pos: p, n });
        }
        if occ[p] {
            return Err(RobotError::DuplicatePosition(p));
        }
        occ[p] = true;
    }
    Ok(occ)
}

/// Every reading of the configuration that starts at the first robot of a block.
pub fn orientations(positions: &[usize], n: usize) -> Result<Vec<Orientation>, RobotError> {
    let occ = occupancy(positions, n)?;
    if positions.is_empty() {
        return Err(RobotError::InvalidParameters("no robots".into()));
    }
    if positions.len() == n {
        let robots = (0..n).collect();
        return Ok(vec![Orientation { start: 0, dir: 1, blocks: vec![n], robots }]);
    }
    let mut out = Vec::new();
    for &s in positions {
        for dir in [1isize, -1] {
            if occ[step(n, s, -dir)] {
                continue;
            }
            let mut blocks: Vec<usize> = Vec::new();
            let mut robots = Vec::new();
            let mut prev = None;
            for i in 0..n {
                let c = step(n, s, dir * i as isize);
                if occ[c] {
                    robots.push(c);
                }
                if prev == Some(occ[c]) {
                    *blocks.last_mut().expect("open block") += 1;
                } else {
                    blocks.push(1);
                }
                prev = Some(occ[c]);
            }
            out.push(Orientation { start: s, dir, blocks, robots });
        }
    }
    Ok(out)
}

/// Lexicographically least run-length encoding over all rotations and reflections.
pub fn canonical_snapshot(positions: &[usize], n: usize) -> Result<Snapshot, RobotError> {
    let blocks = orientations(positions, n)?
        .into_iter()
        .map(|o| o.blocks)
        .min()
        .expect("at least one orientation");
    Ok(Snapshot { blocks })
}

/// Which end of a robot block moves, relative to some orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    /// Last robot of the block, into the following free block.
    Forward,
    /// First robot of the block, into the preceding free block.
    Backward,
}

/// A single robot move, relative to the canonical layout of a snapshot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Move {
    /// Index into `Snapshot::blocks` of the robot block.
    pub block: usize,
    pub side: Side,
}

/// Robot at `from` may move to any of `targets`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enabled {
    pub from: usize,
    pub targets: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algo {
    /// Three robots, rings of at least ten nodes.
    Min,
    /// `n - 5` robots; permanent regime only.
    Max,
    /// Any robot may step into any free neighbor.
    Free,
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algo::Min => "min",
            Algo::Max => "max",
            Algo::Free => "free",
        })
    }
}

/// Robot `idx` (in reading order) moves forward (`+1`) or backward (`-1`).
type RuleMove = (usize, isize);

/// Permanent rules of the three-robot algorithm.
fn min_permanent(b: &[usize]) -> Vec<RuleMove> {
    match *b {
        [2, 2, 1, z] if z >= 4 => vec![(0, -1)],
        [1, 1, 1, 2, 1, z] if z >= 4 => vec![(1, -1)],
        [2, 3, 1, z] if z >= 4 => vec![(2, -1)],
        _ => vec![],
    }
}

/// Convergence rules of the three-robot algorithm.
fn min_transient(b: &[usize]) -> Vec<RuleMove> {
    match *b {
        [3, _] => vec![(0, -1), (2, 1)],
        [2, 1, 1, _] => vec![(2, 1)],
        // The pair and the lone robot split the free nodes evenly when y == z;
        // the lone robot then sits on the axis and either mirror move is taken.
        [2, y, 1, z] if y >= 4 && y <= z => vec![(2, -1)],
        [1, x, 1, y, 1, z] if y == z && x != y => vec![(2, -1)],
        [1, x, 1, y, 1, z] if x < y && y < z => vec![(0, 1)],
        _ => vec![],
    }
}

/// Permanent rules of the `n - 5` robot algorithm.
fn max_permanent(b: &[usize]) -> Vec<RuleMove> {
    let k: usize = b.iter().step_by(2).sum();
    match *b {
        [2, 3, m, 2] if m + 2 == k => vec![(2, -1)],
        [2, 2, 1, 1, m, 2] if m + 3 == k => vec![(2, -1)],
        [2, 1, 1, 2, m, 2] if m + 3 == k => vec![(2, -1)],
        [3, 3, m, 2] if m + 3 == k => vec![(0, -1)],
        [2, 3, m, 1, 1, 1] if m + 3 == k => vec![(k - 1, -1)],
        _ => vec![],
    }
}

/// Start of the `n - 5` robot cycle: a pair, three free nodes, the other robots, two free nodes.
pub fn max_start(n: usize, k: usize) -> Result<Vec<usize>, RobotError> {
    if k + 5 != n || k < 5 || k.is_multiple_of(2) {
        return Err(RobotError::InvalidParameters(format!("the n-5 algorithm needs odd k = n - 5 >= 5, got n={n} k={k}")));
    }
    Ok(Snapshot { blocks: vec![2, 3, k - 2, 2] }.positions())
}

fn collect(orients: &[Orientation], n: usize, rule: fn(&[usize]) -> Vec<RuleMove>) -> Vec<Enabled> {
    let mut by_robot: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for o in orients {
        for (idx, d) in rule(&o.blocks) {
            let from = o.robots[idx];
            by_robot.entry(from).or_default().insert(step(n, from, o.dir * d));
        }
    }
    by_robot.into_iter().map(|(from, t)| Enabled { from, targets: t.into_iter().collect() }).collect()
}

/// Whether the configuration sits in the algorithm's permanent regime.
pub fn is_permanent(algo: Algo, positions: &[usize], n: usize) -> Result<bool, RobotError> {
    let orients = orientations(positions, n)?;
    let rule = match algo {
        Algo::Min => min_permanent,
        Algo::Max => max_permanent,
        Algo::Free => return Ok(true),
    };
    Ok(orients.iter().any(|o| !rule(&o.blocks).is_empty()))
}

/// Robots the algorithm enables in a concrete configuration, with their targets.
pub fn enabled(algo: Algo, positions: &[usize], n: usize) -> Result<Vec<Enabled>, RobotError> {
    let orients = orientations(positions, n)?;
    let moves = match algo {
        Algo::Min => {
            let p = collect(&orients, n, min_permanent);
            if p.is_empty() {
                collect(&orients, n, min_transient)
            } else {
                p
            }
        }
        Algo::Max => {
            let p = collect(&orients, n, max_permanent);
            if p.is_empty() {
                return Err(RobotError::Unresolved(canonical_snapshot(positions, n)?.to_string()));
            }
            p
        }
        Algo::Free => free_moves(positions, n)?,
    };
    if moves.is_empty() {
        return Err(RobotError::Stuck(canonical_snapshot(positions, n)?.to_string()));
    }
    Ok(moves)
}

/// Every legal single-robot move.
pub fn free_moves(positions: &[usize], n: usize) -> Result<Vec<Enabled>, RobotError> {
    let occ = occupancy(positions, n)?;
    Ok(positions
        .iter()
        .map(|&p| {
            let mut targets: Vec<usize> = [step(n, p, 1), step(n, p, -1)].into_iter().filter(|&t| !occ[t]).collect();
            targets.dedup();
            Enabled { from: p, targets }
        })
        .filter(|e| !e.targets.is_empty())
        .collect())
}

fn relative_moves(s: &Snapshot, algo: Algo) -> Result<Vec<Move>, RobotError> {
    let n = s.n();
    let pos = s.positions();
    let starts: Vec<usize> = s.blocks.iter().scan(0, |at, &c| {
        let here = *at;
        *at += c;
        Some(here)
    }).collect();
    let mut out = Vec::new();
    for e in enabled(algo, &pos, n)? {
        for &t in &e.targets {
            let block = (0..s.blocks.len()).step_by(2).find(|&i| (starts[i]..starts[i] + s.blocks[i]).contains(&e.from));
            let block = block.expect("robot lies in a robot block");
            let side = if t == step(n, e.from, 1) { Side::Forward } else { Side::Backward };
            out.push(Move { block, side });
        }
    }
    Ok(out)
}

/// Moves the three-robot algorithm permits in `s`.
pub fn min_algo_step(s: &Snapshot) -> Result<Vec<Move>, RobotError> {
    relative_moves(s, Algo::Min)
}

/// Moves the `n - 5` robot algorithm permits in `s` (permanent regime).
pub fn max_algo_step(s: &Snapshot) -> Result<Vec<Move>, RobotError> {
    relative_moves(s, Algo::Max)
}

/// Snapshot after applying `m` to the canonical layout of `s`.
pub fn apply_move(s: &Snapshot, m: Move) -> Result<Snapshot, RobotError> {
    let n = s.n();
    let mut pos = s.positions();
    let start: usize = s.blocks[..m.block].iter().sum();
    let (from, to) = match m.side {
        Side::Forward => {
            let last = start + s.blocks[m.block] - 1;
            (last, step(n, last, 1))
        }
        Side::Backward => (start, step(n, start, -1)),
    };
    if pos.contains(&to) {
        return Err(RobotError::InvalidParameters(format!("move into occupied node {to}")));
    }
    for p in pos.iter_mut() {
        if *p == from {
            *p = to;
        }
    }
    canonical_snapshot(&pos, n)
}

/// Chooses which enabled robots act and where they go.
pub trait Adversary {
    /// `positions[r]` is robot `r`'s node. Returns `(robot, target)` pairs.
    fn choose(&mut self, positions: &[usize], enabled: &[Enabled]) -> Vec<(usize, usize)>;
}

/// Activates a random non-empty subset, each robot toward a random permitted target.
pub struct RandomAdversary<R: Rng> {
    pub rng: R,
}

impl<R: Rng> Adversary for RandomAdversary<R> {
    fn choose(&mut self, positions: &[usize], enabled: &[Enabled]) -> Vec<(usize, usize)> {
        let robot = |from: usize| positions.iter().position(|&p| p == from).expect("enabled robot exists");
        let mut picked = Vec::new();
        for e in enabled {
            if self.rng.gen_bool(0.5) {
                picked.push((robot(e.from), *e.targets.choose(&mut self.rng).expect("non-empty targets")));
            }
        }
        if picked.is_empty() {
            let e = enabled.choose(&mut self.rng).expect("something enabled");
            picked.push((robot(e.from), *e.targets.choose(&mut self.rng).expect("non-empty targets")));
        }
        picked
    }
}

/// Moves one robot back to where it just came from whenever allowed.
#[derive(Default)]
pub struct PingPong {
    last: Option<(usize, usize)>,
}

impl Adversary for PingPong {
    fn choose(&mut self, positions: &[usize], enabled: &[Enabled]) -> Vec<(usize, usize)> {
        let robot = |from: usize| positions.iter().position(|&p| p == from).expect("enabled robot exists");
        if let Some((r, back)) = self.last {
            if let Some(e) = enabled.iter().find(|e| e.from == positions[r] && e.targets.contains(&back)) {
                self.last = Some((r, e.from));
                return vec![(r, back)];
            }
        }
        let e = &enabled[0];
        let r = robot(e.from);
        self.last = Some((r, e.from));
        vec![(r, e.targets[0])]
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub collision: bool,
    /// `visit_counts[r][v]`: arrivals of robot `r` at node `v`, the start included.
    pub visit_counts: Vec<Vec<u64>>,
    /// The identity-labelled configuration sequence repeats.
    pub recurrence: bool,
    /// Positions of every robot, before the first step and after each step.
    pub trace: Vec<Vec<usize>>,
    pub error: Option<RobotError>,
}

impl RunReport {
    pub fn steps(&self) -> usize {
        self.trace.len().saturating_sub(1)
    }
}

/// Runs `steps` activations; robot identities are tracked by the harness only.
pub fn corda_run(n: usize, algo: Algo, init: &[usize], adversary: &mut dyn Adversary, steps: usize) -> Result<RunReport, RobotError> {
    if steps == 0 {
        return Err(RobotError::InvalidParameters("steps must be positive".into()));
    }
    occupancy(init, n)?;
    let k = init.len();
    let mut pos = init.to_vec();
    let mut report = RunReport { visit_counts: vec![vec![0; n]; k], ..Default::default() };
    for (r, &p) in pos.iter().enumerate() {
        report.visit_counts[r][p] += 1;
    }
    report.trace.push(pos.clone());
    let mut seen: HashSet<Vec<usize>> = HashSet::from([pos.clone()]);
    for _ in 0..steps {
        let en = match enabled(algo, &pos, n) {
            Ok(en) => en,
            Err(e) => {
                report.error = Some(e);
                break;
            }
        };
        let picks = adversary.choose(&pos, &en);
        if picks.is_empty() {
            return Err(RobotError::EmptyActivation);
        }
        for &(r, t) in &picks {
            let ok = r < k && en.iter().any(|e| e.from == pos[r] && e.targets.contains(&t));
            if !ok {
                return Err(RobotError::IllegalActivation { robot: r, target: t });
            }
        }
        let targets: HashSet<usize> = picks.iter().map(|&(_, t)| t).collect();
        let movers: HashSet<usize> = picks.iter().map(|&(r, _)| r).collect();
        if targets.len() != picks.len() || movers.len() != picks.len() {
            report.collision = true;
            break;
        }
        for &(r, t) in &picks {
            pos[r] = t;
            report.visit_counts[r][t] += 1;
        }
        report.trace.push(pos.clone());
        if !seen.insert(pos.clone()) {
            report.recurrence = true;
        }
    }
    Ok(report)
}

/// Every robot visits every node in every `window`-step segment, the run has
/// no collision, and the labelled configuration sequence recurs.
pub fn exploration_verified(report: &RunReport, window: usize, n: usize) -> bool {
    if report.collision || report.error.is_some() || !report.recurrence || window == 0 || report.steps() < 2 * window {
        return false;
    }
    let k = report.trace[0].len();
    (0..=report.steps() - window).all(|t| {
        let seg = &report.trace[t..=t + window];
        (0..k).all(|r| {
            let mut hit = vec![false; n];
            for c in seg {
                hit[c[r]] = true;
            }
            hit.into_iter().all(|h| h)
        })
    })
}

/// Successor snapshots of `s` over every activation the adversary may choose.
pub fn successors(algo: Algo, s: &Snapshot) -> Result<BTreeSet<Snapshot>, RobotError> {
    let n = s.n();
    let pos = s.positions();
    let en = enabled(algo, &pos, n)?;
    let mut out = BTreeSet::new();
    for mask in 1u32..(1 << en.len()) {
        let chosen: Vec<&Enabled> = (0..en.len()).filter(|i| mask >> i & 1 == 1).map(|i| &en[i]).collect();
        // Every combination of targets for the chosen robots.
        let combos: usize = chosen.iter().map(|e| e.targets.len()).product();
        for c in 0..combos {
            let mut rest = c;
            let mut next = pos.clone();
            let mut targets = HashSet::new();
            for e in &chosen {
                let t = e.targets[rest % e.targets.len()];
                rest /= e.targets.len();
                targets.insert(t);
                for p in next.iter_mut() {
                    if *p == e.from {
                        *p = t;
                    }
                }
            }
            if targets.len() != chosen.len() {
                return Err(RobotError::InvalidParameters(format!("collision reachable from {s}")));
            }
            out.insert(canonical_snapshot(&next, n)?);
        }
    }
    Ok(out)
}

/// All canonical snapshots of `k` robots on `n` nodes.
pub fn all_snapshots(n: usize, k: usize) -> Result<BTreeSet<Snapshot>, RobotError> {
    if k == 0 || k > n {
        return Err(RobotError::InvalidParameters(format!("k={k} robots on n={n} nodes")));
    }
    let mut out = BTreeSet::new();
    let mut pos: Vec<usize> = (0..k).collect();
    loop {
        out.insert(canonical_snapshot(&pos, n)?);
        // Next k-combination in lexicographic order.
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if pos[i] < n - k + i {
                break;
            }
        }
        pos[i] += 1;
        for j in i + 1..k {
            pos[j] = pos[j - 1] + 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergence {
    pub snapshots: usize,
    pub permanent: usize,
    /// Longest adversarial path from any snapshot into the permanent regime.
    pub worst_steps: usize,
}

/// Exhaustive check that every snapshot reaches the permanent regime under
/// every adversary, and that the permanent regime is closed.
pub fn convergence_check(algo: Algo, n: usize, k: usize) -> Result<Convergence, RobotError> {
    let all = all_snapshots(n, k)?;
    let mut succ: HashMap<Snapshot, BTreeSet<Snapshot>> = HashMap::new();
    let mut perm = HashSet::new();
    for s in &all {
        succ.insert(s.clone(), successors(algo, s)?);
        if is_permanent(algo, &s.positions(), n)? {
            perm.insert(s.clone());
        }
    }
    for p in &perm {
        if let Some(out) = succ[p].iter().find(|t| !perm.contains(*t)) {
            return Err(RobotError::Unresolved(format!("permanent {p} leads to {out}")));
        }
    }
    // Longest path to the permanent set; a cycle among transient snapshots is a failure.
    fn depth(
        s: &Snapshot,
        succ: &HashMap<Snapshot, BTreeSet<Snapshot>>,
        perm: &HashSet<Snapshot>,
        memo: &mut HashMap<Snapshot, Option<usize>>,
    ) -> Result<usize, RobotError> {
        if perm.contains(s) {
            return Ok(0);
        }
        match memo.get(s) {
            Some(Some(d)) => return Ok(*d),
            Some(None) => return Err(RobotError::Unresolved(format!("adversary can loop through {s}"))),
            None => {}
        }
        memo.insert(s.clone(), None);
        let mut best = 0;
        for t in &succ[s] {
            best = best.max(1 + depth(t, succ, perm, memo)?);
        }
        memo.insert(s.clone(), Some(best));
        Ok(best)
    }
    let mut memo = HashMap::new();
    let mut worst = 0;
    for s in &all {
        worst = worst.max(depth(s, &succ, &perm, &mut memo)?);
    }
    Ok(Convergence { snapshots: all.len(), permanent: perm.len(), worst_steps: worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn snap(b: &[usize]) -> Snapshot {
        canonical_snapshot(&Snapshot { blocks: b.to_vec() }.positions(), b.iter().sum()).unwrap()
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(canonical_snapshot(&[0, 1], 5).unwrap().blocks, vec![2, 3]);
        assert_eq!(canonical_snapshot(&[0, 2, 4], 9).unwrap().blocks, vec![1, 1, 1, 1, 1, 4]);
        let a = canonical_snapshot(&[0, 1, 5], 11).unwrap();
        let mirrored: Vec<usize> = [0, 1, 5].iter().map(|&p| (11 - p) % 11).collect();
        assert_eq!(a, canonical_snapshot(&mirrored, 11).unwrap());
        assert_eq!(canonical_snapshot(&[1, 1], 5), Err(RobotError::DuplicatePosition(1)));
    }

    #[test]
    fn permanent_table_examples() {
        let s = snap(&[2, 2, 1, 5]);
        let next: Vec<Snapshot> = min_algo_step(&s).unwrap().into_iter().map(|m| apply_move(&s, m).unwrap()).collect();
        assert_eq!(next, vec![snap(&[1, 1, 1, 2, 1, 4])]);
        let s = snap(&[1, 1, 1, 2, 1, 4]);
        let next: Vec<Snapshot> = min_algo_step(&s).unwrap().into_iter().map(|m| apply_move(&s, m).unwrap()).collect();
        assert_eq!(next, vec![snap(&[2, 3, 1, 4])]);
    }

    #[test]
    fn three_in_a_row_with_one_or_two_activations() {
        let s = snap(&[3, 7]);
        let succ = successors(Algo::Min, &s).unwrap();
        assert!(succ.contains(&snap(&[2, 1, 1, 6])));
        assert!(succ.contains(&snap(&[1, 1, 1, 1, 1, 5])));
        assert_eq!(succ.len(), 2);
    }

    #[test]
    fn permanent_regime_rotates_the_formation() {
        for n in (10..=30).filter(|n| n % 3 != 0) {
            let start = vec![0, 1, 4];
            let mut pos = start.clone();
            let mut patterns = BTreeSet::new();
            for _ in 0..3 {
                let en = enabled(Algo::Min, &pos, n).unwrap();
                assert_eq!(en.len(), 1);
                assert_eq!(en[0].targets.len(), 1);
                let (from, to) = (en[0].from, en[0].targets[0]);
                for p in pos.iter_mut() {
                    if *p == from {
                        *p = to;
                    }
                }
                patterns.insert(canonical_snapshot(&pos, n).unwrap());
            }
            assert_eq!(patterns.len(), 3);
            let mut shifted: Vec<usize> = start.iter().map(|&p| step(n, p, -1)).collect();
            shifted.sort();
            pos.sort();
            assert_eq!(pos, shifted, "n={n}");
        }
    }

    #[test]
    fn max_cycle_closes() {
        let n = 12;
        let s = snap(&[2, 3, 5, 2]);
        let first = apply_move(&s, max_algo_step(&s).unwrap()[0]).unwrap();
        assert_eq!(first, snap(&[2, 2, 1, 1, 4, 2]));
        let mut cur = s.clone();
        for _ in 0..5 {
            let ms = max_algo_step(&cur).unwrap();
            assert_eq!(ms.len(), 1);
            cur = apply_move(&cur, ms[0]).unwrap();
        }
        assert_eq!(cur, s);
        assert_eq!(n, cur.n());
    }

    #[test]
    fn single_robot_ping_pong_misses_nodes() {
        let rep = corda_run(6, Algo::Free, &[0], &mut PingPong::default(), 100).unwrap();
        assert!(rep.visit_counts[0].contains(&0));
        assert!(!exploration_verified(&rep, 18, 6));
    }

    #[test]
    fn illegal_activation_is_rejected() {
        struct Cheat;
        impl Adversary for Cheat {
            fn choose(&mut self, _: &[usize], _: &[Enabled]) -> Vec<(usize, usize)> {
                vec![(1, 2)]
            }
        }
        let r = corda_run(10, Algo::Min, &[0, 1, 4], &mut Cheat, 5);
        assert!(matches!(r, Err(RobotError::IllegalActivation { .. })));
    }

    #[test]
    fn three_robots_explore_from_the_permanent_regime() {
        let n = 10;
        let mut adv = RandomAdversary { rng: ChaCha8Rng::seed_from_u64(1) };
        let rep = corda_run(n, Algo::Min, &[0, 1, 4], &mut adv, 3 * n * 3 * 3).unwrap();
        assert!(!rep.collision);
        assert!(rep.visit_counts.iter().all(|v| v.iter().all(|&c| c >= 1)));
        assert!(exploration_verified(&rep, 3 * n, n));
    }

    #[test]
    fn converges_from_every_snapshot() {
        for n in [10, 11, 13, 14] {
            let c = convergence_check(Algo::Min, n, 3).unwrap();
            assert!(c.permanent == 3, "n={n}: {c:?}");
        }
    }
}
