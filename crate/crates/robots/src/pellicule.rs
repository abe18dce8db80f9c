//! Snapshot graphs ("pellicules") and the search behind the ring impossibility results.
//!
//! A move class is a single-robot move up to the symmetries of the ring: an
//! algorithm cannot tell apart two moves that some rotation or reflection of
//! the configuration exchanges, so choosing one enables the whole class.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use crate::ring::{all_snapshots, canonical_snapshot, step, Snapshot};
use crate::RobotError;

/// Configuration plus one move `(from, to)`, normalized over the dihedral group.
pub type ClassKey = (Vec<usize>, usize, usize);

fn transform(n: usize, p: usize, rot: usize, refl: bool) -> usize {
    let q = if refl { (n - p) % n } else { p };
    (q + rot) % n
}

/// Canonical key of the move `from -> to` in `positions`.
pub fn class_key(positions: &[usize], n: usize, from: usize, to: usize) -> ClassKey {
    let mut best: Option<ClassKey> = None;
    for rot in 0..n {
        for refl in [false, true] {
            let mut ps: Vec<usize> = positions.iter().map(|&p| transform(n, p, rot, refl)).collect();
            ps.sort_unstable();
            let key = (ps, transform(n, from, rot, refl), transform(n, to, rot, refl));
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }
        }
    }
    best.expect("n > 0")
}

/// Every legal single-robot move in `positions`, grouped by class.
pub fn move_classes(positions: &[usize], n: usize) -> BTreeMap<ClassKey, Vec<(usize, usize)>> {
    let occ: HashSet<usize> = positions.iter().copied().collect();
    let mut out: BTreeMap<ClassKey, Vec<(usize, usize)>> = BTreeMap::new();
    for &p in positions {
        for d in [1isize, -1] {
            let t = step(n, p, d);
            if !occ.contains(&t) && !out.values().flatten().any(|&m| m == (p, t)) {
                out.entry(class_key(positions, n, p, t)).or_default().push((p, t));
            }
        }
    }
    out
}

fn moved(positions: &[usize], from: usize, to: usize) -> Vec<usize> {
    positions.iter().map(|&p| if p == from { to } else { p }).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub class: ClassKey,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pellicule {
    pub n: usize,
    pub k: usize,
    pub vertices: Vec<Snapshot>,
    /// One arc per move class.
    pub arcs: Vec<Arc>,
}

pub const DEFAULT_CAP: usize = 10_000;

/// Every canonical snapshot with every single-robot move between them.
pub fn build_pellicule(n: usize, k: usize, cap: usize) -> Result<Pellicule, RobotError> {
    let total = binomial(n, k);
    if total > cap as u128 {
        return Err(RobotError::CapExceeded { count: total.min(usize::MAX as u128) as usize, cap });
    }
    let vertices: Vec<Snapshot> = all_snapshots(n, k)?.into_iter().collect();
    let index: HashMap<&Snapshot, usize> = vertices.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut arcs = Vec::new();
    for (i, s) in vertices.iter().enumerate() {
        let pos = s.positions();
        for (class, ms) in move_classes(&pos, n) {
            let (f, t) = ms[0];
            let to = index[&canonical_snapshot(&moved(&pos, f, t), n)?];
            arcs.push(Arc { from: i, to, class });
        }
    }
    Ok(Pellicule { n, k, vertices, arcs })
}

impl Pellicule {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph pellicule {\n");
        for v in &self.vertices {
            let _ = writeln!(s, "  \"{v}\";");
        }
        for a in &self.arcs {
            let _ = writeln!(s, "  \"{}\" -> \"{}\";", self.vertices[a.from], self.vertices[a.to]);
        }
        s.push_str("}\n");
        s
    }

    fn classes_at(&self, v: usize) -> BTreeSet<&ClassKey> {
        self.arcs.iter().filter(|a| a.from == v).map(|a| &a.class).collect()
    }

    fn restricted(&self, keep_v: &[bool], keep_a: &[bool]) -> Pellicule {
        let mut remap = vec![usize::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if keep_v[i] {
                remap[i] = vertices.len();
                vertices.push(v.clone());
            }
        }
        let arcs = self
            .arcs
            .iter()
            .zip(keep_a)
            .filter(|(a, &k)| k && keep_v[a.from] && keep_v[a.to])
            .map(|(a, _)| Arc { from: remap[a.from], to: remap[a.to], class: a.class.clone() })
            .collect();
        Pellicule { n: self.n, k: self.k, vertices, arcs }
    }
}

/// Removes, to a fixpoint, moves the adversary can turn into a collision,
/// moves after which it can bounce the moved robot back forever, and
/// snapshots left without moves.
///
/// A move `u -> v` into snapshot `S'` is a bounce when every class still
/// available at `S'` (the move's own class, when `S' = S`) contains `v -> u`.
pub fn reduce_pellicule(p: &Pellicule) -> Pellicule {
    let n = p.n;
    let mut keep_v = vec![true; p.vertices.len()];
    let mut keep_a = vec![true; p.arcs.len()];
    loop {
        let mut changed = false;
        for (ai, a) in p.arcs.iter().enumerate() {
            if !keep_a[ai] {
                continue;
            }
            if !keep_v[a.from] || !keep_v[a.to] {
                keep_a[ai] = false;
                changed = true;
                continue;
            }
            let pos = p.vertices[a.from].positions();
            let classes = move_classes(&pos, n);
            let (u, v) = classes[&a.class][0];
            let next = moved(&pos, u, v);
            let next_classes = move_classes(&next, n);
            let back = |key: &ClassKey| next_classes.get(key).is_some_and(|ms| ms.contains(&(v, u)));
            let mut targets: Vec<usize> = classes[&a.class].iter().map(|m| m.1).collect();
            targets.sort_unstable();
            let collides = targets.windows(2).any(|w| w[0] == w[1]);
            let bounce = collides || if a.to == a.from {
                back(&a.class)
            } else {
                let avail: Vec<&ClassKey> = p
                    .arcs
                    .iter()
                    .zip(&keep_a)
                    .filter(|(b, &k)| k && b.from == a.to && keep_v[b.to])
                    .map(|(b, _)| &b.class)
                    .collect();
                !avail.is_empty() && avail.into_iter().all(back)
            };
            if bounce {
                keep_a[ai] = false;
                changed = true;
            }
        }
        for v in 0..p.vertices.len() {
            if keep_v[v] && !p.arcs.iter().zip(&keep_a).any(|(a, &k)| k && a.from == v && keep_v[a.to]) {
                keep_v[v] = false;
                changed = true;
            }
        }
        if !changed {
            return p.restricted(&keep_v, &keep_a);
        }
    }
}

/// Same vertex count and, under some bijection, the same arc multiset.
pub fn isomorphic(a: &Pellicule, b: &Pellicule) -> bool {
    if a.vertices.len() != b.vertices.len() || a.arcs.len() != b.arcs.len() {
        return false;
    }
    let count = |p: &Pellicule, map: &[usize]| {
        let mut m: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for arc in &p.arcs {
            *m.entry((map[arc.from], map[arc.to])).or_default() += 1;
        }
        m
    };
    let id: Vec<usize> = (0..b.vertices.len()).collect();
    let target = count(b, &id);
    let mut perm: Vec<usize> = (0..a.vertices.len()).collect();
    permutations(&mut perm, 0, &mut |p| count(a, p) == target)
}

/// Contracts snapshots with exactly one incoming and one outgoing arc (the
/// algorithm has no choice there) and drops parallel arcs.
pub fn contract_transit(p: &Pellicule) -> Pellicule {
    let mut arcs: Vec<(usize, usize)> = p.arcs.iter().map(|a| (a.from, a.to)).collect();
    let mut alive = vec![true; p.vertices.len()];
    loop {
        let pick = (0..p.vertices.len()).find(|&v| {
            alive[v]
                && arcs.iter().filter(|a| a.1 == v).count() == 1
                && arcs.iter().filter(|a| a.0 == v).count() == 1
                && !arcs.contains(&(v, v))
        });
        let Some(v) = pick else { break };
        let pred = arcs.iter().find(|a| a.1 == v).unwrap().0;
        let succ = arcs.iter().find(|a| a.0 == v).unwrap().1;
        arcs.retain(|a| a.0 != v && a.1 != v);
        arcs.push((pred, succ));
        alive[v] = false;
    }
    arcs.sort_unstable();
    arcs.dedup();
    let mut remap = vec![usize::MAX; p.vertices.len()];
    let mut vertices = Vec::new();
    for (i, s) in p.vertices.iter().enumerate() {
        if alive[i] {
            remap[i] = vertices.len();
            vertices.push(s.clone());
        }
    }
    let arcs = arcs
        .into_iter()
        .map(|(f, t)| Arc { from: remap[f], to: remap[t], class: (Vec::new(), 0, 0) })
        .collect();
    Pellicule { n: p.n, k: p.k, vertices, arcs }
}

fn permutations(v: &mut Vec<usize>, i: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    if i == v.len() {
        return f(v);
    }
    for j in i..v.len() {
        v.swap(i, j);
        if permutations(v, i + 1, f) {
            v.swap(i, j);
            return true;
        }
        v.swap(i, j);
    }
    false
}

/// How a deterministic strategy fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Counterexample {
    /// Robot `robot` can be kept away from `node` forever.
    NeverVisited { robot: usize, node: usize, start: Vec<usize> },
    Collision { at: Vec<usize> },
    /// An activation leaves the reduced snapshot set.
    Escapes { at: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    /// A strategy under which every robot visits every node infinitely often.
    Witness(Vec<ClassKey>),
    /// Every strategy fails; one counterexample per strategy tried.
    NoStrategy { strategies: usize, example: Option<Counterexample> },
    TooLarge { strategies: u128 },
}

/// Exhaustive search over strategies choosing one move class per snapshot.
pub fn strategy_search(reduced: &Pellicule, max_strategies: u128) -> Result<SearchOutcome, RobotError> {
    let n = reduced.n;
    let choices: Vec<Vec<ClassKey>> =
        (0..reduced.vertices.len()).map(|v| reduced.classes_at(v).into_iter().cloned().collect()).collect();
    let total: u128 = choices.iter().map(|c| c.len() as u128).product();
    if reduced.is_empty() {
        return Ok(SearchOutcome::NoStrategy { strategies: 0, example: None });
    }
    if total > max_strategies {
        return Ok(SearchOutcome::TooLarge { strategies: total });
    }
    let index: HashMap<&Snapshot, usize> = reduced.vertices.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let configs = labelled_configs(reduced)?;
    let mut example = None;
    for code in 0..total as usize {
        let mut rest = code;
        let strategy: Vec<ClassKey> = choices
            .iter()
            .map(|c| {
                let k = c[rest % c.len()].clone();
                rest /= c.len();
                k
            })
            .collect();
        match check_strategy(n, &strategy, &index, &configs)? {
            None => return Ok(SearchOutcome::Witness(strategy)),
            Some(c) => {
                if example.is_none() {
                    example = Some(c);
                }
            }
        }
    }
    Ok(SearchOutcome::NoStrategy { strategies: total as usize, example })
}

/// Robot-labelled placements whose snapshot lies in the pellicule.
fn labelled_configs(p: &Pellicule) -> Result<Vec<Vec<usize>>, RobotError> {
    let n = p.n;
    let keep: HashSet<&Snapshot> = p.vertices.iter().collect();
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in 0..n {
            if !cur.contains(&v) {
                cur.push(v);
                rec(n, k, cur, out);
                cur.pop();
            }
        }
    }
    rec(n, p.k, &mut cur, &mut out);
    let mut kept = Vec::new();
    for c in out {
        if keep.contains(&canonical_snapshot(&c, n)?) {
            kept.push(c);
        }
    }
    Ok(kept)
}

fn check_strategy(
    n: usize,
    strategy: &[ClassKey],
    index: &HashMap<&Snapshot, usize>,
    configs: &[Vec<usize>],
) -> Result<Option<Counterexample>, RobotError> {
    let id: HashMap<&Vec<usize>, usize> = configs.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let mut succ: Vec<Vec<usize>> = Vec::with_capacity(configs.len());
    for c in configs {
        let s = canonical_snapshot(c, n)?;
        let classes = move_classes(c, n);
        let moves = classes.get(&strategy[index[&s]]).cloned().unwrap_or_default();
        let mut out = Vec::new();
        // Every non-empty subset of the enabled moves, one target per robot.
        for mask in 1u32..(1 << moves.len()) {
            let chosen: Vec<(usize, usize)> = (0..moves.len()).filter(|i| mask >> i & 1 == 1).map(|i| moves[i]).collect();
            let froms: HashSet<usize> = chosen.iter().map(|m| m.0).collect();
            if froms.len() != chosen.len() {
                continue;
            }
            let tos: HashSet<usize> = chosen.iter().map(|m| m.1).collect();
            if tos.len() != chosen.len() {
                return Ok(Some(Counterexample::Collision { at: c.clone() }));
            }
            let next: Vec<usize> = c.iter().map(|&p| chosen.iter().find(|m| m.0 == p).map_or(p, |m| m.1)).collect();
            match id.get(&next) {
                Some(&j) => out.push(j),
                None => return Ok(Some(Counterexample::Escapes { at: c.clone() })),
            }
        }
        succ.push(out);
    }
    let k = configs.first().map_or(0, |c| c.len());
    for robot in 0..k {
        for node in 0..n {
            let allowed: Vec<bool> = configs.iter().map(|c| c[robot] != node).collect();
            if let Some(start) = find_cycle(&succ, &allowed) {
                return Ok(Some(Counterexample::NeverVisited { robot, node, start: configs[start].clone() }));
            }
        }
    }
    Ok(None)
}

/// A vertex on a cycle of the subgraph induced by `allowed`.
fn find_cycle(succ: &[Vec<usize>], allowed: &[bool]) -> Option<usize> {
    // 0 unvisited, 1 on stack, 2 done.
    let mut state = vec![0u8; succ.len()];
    for s in 0..succ.len() {
        if !allowed[s] || state[s] != 0 {
            continue;
        }
        let mut stack = vec![(s, 0usize)];
        state[s] = 1;
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            if *i < succ[v].len() {
                let w = succ[v][*i];
                *i += 1;
                if !allowed[w] {
                    continue;
                }
                match state[w] {
                    0 => {
                        state[w] = 1;
                        stack.push((w, 0));
                    }
                    1 => return Some(w),
                    _ => {}
                }
            } else {
                state[v] = 2;
                stack.pop();
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reason {
    SingleRobot,
    EvenRobots,
    /// `n - 4 <= k <= n`.
    TooCrowded,
    DividesRing,
    Search(SearchOutcome),
    /// A known algorithm explores perpetually.
    Constructive(&'static str),
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub impossible: bool,
    pub reason: Reason,
}

pub const SEARCH_CAP: u128 = 1 << 20;

/// Closed-form rules first, then strategy search on the reduced pellicule.
pub fn impossibility_check(n: usize, k: usize) -> Result<Verdict, RobotError> {
    if k == 0 || k > n {
        return Err(RobotError::InvalidParameters(format!("k={k} robots on n={n} nodes")));
    }
    let rule = |reason| Ok(Verdict { impossible: true, reason });
    if k == 1 {
        return rule(Reason::SingleRobot);
    }
    if k.is_multiple_of(2) {
        return rule(Reason::EvenRobots);
    }
    if k + 4 >= n {
        return rule(Reason::TooCrowded);
    }
    if n.is_multiple_of(k) {
        return rule(Reason::DividesRing);
    }
    if k == 3 && n >= 10 {
        return Ok(Verdict { impossible: false, reason: Reason::Constructive("three-robot algorithm") });
    }
    if k + 5 == n && k > 3 {
        return Ok(Verdict { impossible: false, reason: Reason::Constructive("n-5 robot algorithm") });
    }
    let p = match build_pellicule(n, k, DEFAULT_CAP) {
        Ok(p) => p,
        Err(RobotError::CapExceeded { .. }) => return Ok(Verdict { impossible: false, reason: Reason::Undecided }),
        Err(e) => return Err(e),
    };
    let out = strategy_search(&reduce_pellicule(&p), SEARCH_CAP)?;
    let impossible = matches!(out, SearchOutcome::NoStrategy { .. });
    Ok(Verdict { impossible, reason: Reason::Search(out) })
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn totient(mut x: usize) -> usize {
    let mut out = x;
    let mut p = 2;
    while p * p <= x {
        if x.is_multiple_of(p) {
            while x.is_multiple_of(p) {
                x /= p;
            }
            out -= out / p;
        }
        p += 1;
    }
    if x > 1 {
        out -= out / x;
    }
    out
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Number of binary bracelets of length `n` with `k` ones, by Burnside's lemma.
pub fn bracelet_count(n: usize, k: usize) -> u128 {
    if n == 0 || k > n {
        return 0;
    }
    let g = gcd(n, k);
    let rotations: u128 = (1..=g).filter(|d| g.is_multiple_of(*d)).map(|d| totient(d) as u128 * binomial(n / d, k / d)).sum();
    let reflections: u128 = if n % 2 == 1 {
        n as u128 * binomial((n - 1) / 2, k / 2)
    } else {
        let h = n / 2;
        let through_edges = if k.is_multiple_of(2) { binomial(h, k / 2) } else { 0 };
        let through_nodes = if k.is_multiple_of(2) {
            binomial(h - 1, k / 2) + if k >= 2 { binomial(h - 1, k / 2 - 1) } else { 0 }
        } else {
            2 * binomial(h - 1, (k - 1) / 2)
        };
        h as u128 * (through_edges + through_nodes)
    };
    (rotations + reflections) / (2 * n as u128)
}
