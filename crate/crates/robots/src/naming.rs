//! Mobile robots with local vision and per-node whiteboards.
//!
//! Deterministic naming runs on trees: robots follow an Euler tour, leave
//! `(id, exit port)` trails on whiteboards, chase any robot whose trail
//! contradicts their own, and rename when they meet a namesake. The
//! probabilistic variant works on any graph with random walks and random
//! redraws.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stabilab_core::Graph;

use crate::RobotError;

pub type NodeId = usize;

/// Port-numbered graph; port `p` of node `u` is `adj[u][p - 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PortGraph {
    adj: Vec<Vec<NodeId>>,
}

impl PortGraph {
    pub fn from_graph(g: &Graph) -> Self {
        let adj = g.nodes().map(|u| g.neighbors(u).iter().map(|nb| nb.node).collect()).collect();
        PortGraph { adj }
    }

    /// Cycle where port 1 always leads clockwise and port 2 counter-clockwise.
    pub fn symmetric_cycle(n: usize) -> Result<Self, RobotError> {
        if n < 3 {
            return Err(RobotError::InvalidParameters(format!("cycle needs 3 nodes, got {n}")));
        }
        Ok(PortGraph { adj: (0..n).map(|u| vec![(u + 1) % n, (u + n - 1) % n]).collect() })
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adj[u].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_tree(&self) -> bool {
        let edges: usize = self.adj.iter().map(Vec::len).sum::<usize>() / 2;
        edges + 1 == self.n()
    }

    pub fn neighbor(&self, u: NodeId, port: usize) -> Result<NodeId, RobotError> {
        let degree = self.degree(u);
        if port == 0 || port > degree {
            return Err(RobotError::BadPort { port, degree });
        }
        Ok(self.adj[u][port - 1])
    }

    /// Port at `u` leading to `v`.
    pub fn port_to(&self, u: NodeId, v: NodeId) -> Option<usize> {
        self.adj[u].iter().position(|&w| w == v).map(|i| i + 1)
    }
}

/// Rotor rule: leave through the port after the one you came in by.
pub fn euler_next_port(degree: usize, arrival: usize) -> Result<usize, RobotError> {
    if arrival == 0 || arrival > degree {
        return Err(RobotError::BadPort { port: arrival, degree });
    }
    Ok(arrival % degree + 1)
}

/// FIFO of `(robot id, port)` pairs holding at most `capacity` entries.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Whiteboard {
    entries: VecDeque<(usize, usize)>,
    capacity: usize,
}

impl Whiteboard {
    pub fn new(capacity: usize) -> Self {
        Whiteboard { entries: VecDeque::with_capacity(capacity), capacity }
    }

    pub fn write(&mut self, id: usize, port: usize) {
        self.entries.push_back((id, port));
        while self.entries.len() > self.capacity {
            self.entries.pop_front();
        }
    }

    pub fn contains(&self, id: usize) -> bool {
        self.entries.iter().any(|e| e.0 == id)
    }

    /// Most recent port recorded for `id`.
    pub fn last_port(&self, id: usize) -> Option<usize> {
        self.entries.iter().rev().find(|e| e.0 == id).map(|e| e.1)
    }

    pub fn entries(&self) -> impl Iterator<Item = &(usize, usize)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Storage needed for `k` robots and maximum degree `delta`.
    pub fn bits(k: usize, delta: usize) -> usize {
        k * (ceil_log2(k) + ceil_log2(delta))
    }
}

fn ceil_log2(x: usize) -> usize {
    if x <= 1 {
        0
    } else {
        (usize::BITS - (x - 1).leading_zeros()) as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MobileRobot {
    pub id: usize,
    pub pos: NodeId,
    pub arrival_port: usize,
    pub leader: bool,
    pub beaten: bool,
    /// Harness-only arrival stamp for FIFO activation.
    pub arrived_at: u64,
}

/// What a deterministic step decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    Absent,
    Rename,
    Chase,
    Continue,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetStep {
    pub rule: Rule,
    pub id: usize,
    /// Entry to append to the board, if any.
    pub write: Option<(usize, usize)>,
    pub exit_port: usize,
}

/// One deterministic naming decision for a robot standing on `board`.
pub fn det_naming_step(
    robot: &MobileRobot,
    degree: usize,
    board: &Whiteboard,
    colocated_ids: &[usize],
    k: usize,
) -> Result<DetStep, RobotError> {
    let next = euler_next_port(degree, robot.arrival_port)?;
    if colocated_ids.contains(&robot.id) {
        let id = (1..=k)
            .find(|i| !board.contains(*i))
            .or_else(|| (1..=k).find(|i| !colocated_ids.contains(i)))
            .unwrap_or(robot.id);
        return Ok(DetStep { rule: Rule::Rename, id, write: Some((id, next)), exit_port: next });
    }
    match board.last_port(robot.id) {
        None => Ok(DetStep { rule: Rule::Absent, id: robot.id, write: Some((robot.id, next)), exit_port: next }),
        Some(p) if p != robot.arrival_port && p >= 1 && p <= degree => {
            Ok(DetStep { rule: Rule::Chase, id: robot.id, write: None, exit_port: p })
        }
        Some(_) => Ok(DetStep { rule: Rule::Continue, id: robot.id, write: Some((robot.id, next)), exit_port: next }),
    }
}

/// New id after meeting robots with `colocated_ids`, redrawn only on a clash.
pub fn prob_naming_id<R: Rng>(id: usize, colocated_ids: &[usize], k: usize, rng: &mut R) -> usize {
    if colocated_ids.contains(&id) {
        rng.gen_range(1..=k)
    } else {
        id
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Deterministic,
    Probabilistic,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NamingFaults {
    pub ids: bool,
    pub positions: bool,
    pub boards: bool,
    pub ports: bool,
    pub roles: bool,
}

impl NamingFaults {
    pub fn all() -> Self {
        NamingFaults { ids: true, positions: true, boards: true, ports: true, roles: true }
    }

    /// Comma-separated subset of `ids,positions,boards,ports,roles`, or `all` / `none`.
    pub fn parse(spec: &str) -> Result<Self, RobotError> {
        let mut f = NamingFaults::default();
        for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match part {
                "all" => f = NamingFaults::all(),
                "none" => {}
                "ids" => f.ids = true,
                "positions" => f.positions = true,
                "boards" => f.boards = true,
                "ports" => f.ports = true,
                "roles" => f.roles = true,
                other => return Err(RobotError::InvalidParameters(format!("unknown fault kind {other:?}"))),
            }
        }
        Ok(f)
    }
}

#[derive(Clone, Debug)]
pub struct NamingSystem {
    pub graph: PortGraph,
    pub k: usize,
    pub boards: Vec<Whiteboard>,
    pub robots: Vec<MobileRobot>,
    pub mode: Mode,
    rng: ChaCha8Rng,
    steps: u64,
    rounds: u64,
    acted: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamingReport {
    pub converged: bool,
    pub rounds: u64,
    pub steps: u64,
    pub ids: Vec<usize>,
}

impl NamingSystem {
    /// Robots with ids `1..=k` spread over the first nodes, empty boards.
    pub fn new(graph: PortGraph, k: usize, mode: Mode, seed: u64) -> Result<Self, RobotError> {
        if k == 0 {
            return Err(RobotError::InvalidParameters("k must be positive".into()));
        }
        if mode == Mode::Deterministic && !graph.is_tree() {
            return Err(RobotError::InvalidParameters("deterministic naming needs a tree".into()));
        }
        if graph.adj.iter().any(Vec::is_empty) {
            return Err(RobotError::InvalidParameters("every node needs a neighbor".into()));
        }
        let n = graph.n();
        let boards = vec![Whiteboard::new(k); n];
        let robots = (0..k)
            .map(|i| MobileRobot { id: i + 1, pos: i % n, arrival_port: 1, leader: false, beaten: false, arrived_at: 0 })
            .collect();
        Ok(NamingSystem {
            graph,
            k,
            boards,
            robots,
            mode,
            rng: ChaCha8Rng::seed_from_u64(seed),
            steps: 0,
            rounds: 0,
            acted: vec![false; k],
        })
    }

    /// Arbitrary state within the model: ids stay in `1..=k`, ports in range.
    pub fn corrupt(&mut self, faults: NamingFaults) {
        let n = self.graph.n();
        let k = self.k;
        for r in &mut self.robots {
            if faults.ids {
                r.id = self.rng.gen_range(1..=k);
            }
            if faults.positions {
                r.pos = self.rng.gen_range(0..n);
            }
            if faults.ports || faults.positions {
                r.arrival_port = self.rng.gen_range(1..=self.graph.degree(r.pos));
            }
            if faults.roles {
                r.leader = self.rng.gen();
                r.beaten = self.rng.gen();
            }
        }
        if faults.boards {
            for u in 0..n {
                let mut b = Whiteboard::new(k);
                for _ in 0..self.rng.gen_range(0..=k) {
                    b.write(self.rng.gen_range(1..=k), self.rng.gen_range(1..=self.graph.degree(u)));
                }
                self.boards[u] = b;
            }
        }
    }

    pub fn ids_distinct(&self) -> bool {
        let mut ids: Vec<usize> = self.robots.iter().map(|r| r.id).collect();
        ids.sort_unstable();
        ids.windows(2).all(|w| w[0] != w[1])
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn occupied(&self) -> Vec<NodeId> {
        let mut nodes: Vec<NodeId> = self.robots.iter().map(|r| r.pos).collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    /// Robot the algorithm activates at `u`: a namesake of someone present, else the earliest arrival.
    fn chosen_at(&self, u: NodeId) -> Option<usize> {
        let here: Vec<usize> = (0..self.robots.len()).filter(|&i| self.robots[i].pos == u).collect();
        let dup = here
            .iter()
            .copied()
            .filter(|&i| here.iter().any(|&j| j != i && self.robots[j].id == self.robots[i].id))
            .max_by_key(|&i| (self.robots[i].arrived_at, i));
        dup.or_else(|| here.iter().copied().min_by_key(|&i| (self.robots[i].arrived_at, i)))
    }

    fn colocated_ids(&self, i: usize) -> Vec<usize> {
        let pos = self.robots[i].pos;
        (0..self.robots.len()).filter(|&j| j != i && self.robots[j].pos == pos).map(|j| self.robots[j].id).collect()
    }

    fn random_nodes(&mut self) -> Vec<NodeId> {
        let occ = self.occupied();
        let mut chosen: Vec<NodeId> = occ.iter().copied().filter(|_| self.rng.gen_bool(0.5)).collect();
        if chosen.is_empty() {
            chosen.push(*occ.choose(&mut self.rng).expect("k > 0"));
        }
        chosen
    }

    /// One step on the given nodes; moves are computed from the pre-step state.
    pub fn step_nodes(&mut self, nodes: &[NodeId]) -> Result<(), RobotError> {
        self.steps += 1;
        let mut plans: Vec<(usize, usize, NodeId, usize)> = Vec::new(); // robot, new id, target, exit port
        let mut writes: Vec<(NodeId, usize, usize)> = Vec::new();
        let mut actors: Vec<usize> = Vec::new();
        for &u in nodes {
            match self.mode {
                Mode::Deterministic => {
                    if let Some(i) = self.chosen_at(u) {
                        actors.push(i);
                    }
                }
                Mode::Probabilistic => actors.extend((0..self.robots.len()).filter(|&i| self.robots[i].pos == u)),
            }
        }
        for &i in &actors {
            let r = &self.robots[i];
            let deg = self.graph.degree(r.pos);
            let colocated = self.colocated_ids(i);
            match self.mode {
                Mode::Deterministic => {
                    let d = det_naming_step(r, deg, &self.boards[r.pos], &colocated, self.k)?;
                    if let Some((id, p)) = d.write {
                        writes.push((r.pos, id, p));
                    }
                    plans.push((i, d.id, self.graph.neighbor(r.pos, d.exit_port)?, d.exit_port));
                }
                Mode::Probabilistic => {
                    let id = prob_naming_id(r.id, &colocated, self.k, &mut self.rng);
                    let port = self.rng.gen_range(1..=deg);
                    plans.push((i, id, self.graph.neighbor(r.pos, port)?, port));
                }
            }
        }
        // Semi-bidirectional edges: of two opposite crossings, the lower node's robot goes first.
        let blocked: Vec<bool> = plans
            .iter()
            .map(|&(i, _, to, _)| {
                let from = self.robots[i].pos;
                self.mode == Mode::Deterministic
                    && from > to
                    && plans.iter().any(|&(j, _, to2, _)| self.robots[j].pos == to && to2 == from)
            })
            .collect();
        for (u, id, p) in writes {
            self.boards[u].write(id, p);
        }
        let stamp = self.steps;
        for (&(i, id, to, _), &b) in plans.iter().zip(&blocked) {
            self.acted[i] = true;
            if b {
                continue;
            }
            let from = self.robots[i].pos;
            let arrival = self.graph.port_to(to, from).expect("undirected graph");
            let r = &mut self.robots[i];
            r.id = id;
            r.pos = to;
            r.arrival_port = arrival;
            r.arrived_at = stamp;
        }
        self.update_roles();
        if self.acted.iter().all(|&a| a) {
            self.rounds += 1;
            self.acted.iter_mut().for_each(|a| *a = false);
        }
        Ok(())
    }

    /// Step under the randomized weakly fair adversary.
    pub fn step(&mut self) -> Result<(), RobotError> {
        let nodes = self.random_nodes();
        self.step_nodes(&nodes)
    }

    /// Steps until ids are distinct or `max_rounds` rounds have passed.
    pub fn run(&mut self, max_rounds: u64) -> Result<NamingReport, RobotError> {
        while !self.ids_distinct() && self.rounds < max_rounds {
            self.step()?;
        }
        Ok(self.report())
    }

    pub fn report(&self) -> NamingReport {
        NamingReport {
            converged: self.ids_distinct(),
            rounds: self.rounds,
            steps: self.steps,
            ids: self.robots.iter().map(|r| r.id).collect(),
        }
    }

    fn update_roles(&mut self) {
        for r in &mut self.robots {
            if r.arrived_at == self.steps {
                r.leader = r.id == self.k;
                r.beaten = !r.leader;
            }
        }
    }

    /// Exactly one robot holds the leader bit and it has the largest id.
    pub fn leader_elected(&self) -> bool {
        let max = self.robots.iter().map(|r| r.id).max().unwrap_or(0);
        self.robots.iter().filter(|r| r.leader).count() == 1
            && self.robots.iter().all(|r| r.leader == (r.id == max) && r.beaten == !r.leader)
    }
}

/// Runs naming, then keeps stepping until the largest id is the only leader.
/// Returns the rounds spent after ids became distinct.
pub fn election_from_ids(sys: &mut NamingSystem, max_rounds: u64) -> Result<Option<u64>, RobotError> {
    if !sys.run(max_rounds)?.converged {
        return Ok(None);
    }
    let start = sys.rounds();
    while !sys.leader_elected() {
        if sys.rounds() - start > max_rounds {
            return Ok(None);
        }
        sys.step()?;
    }
    Ok(Some(sys.rounds() - start))
}

/// The leader tours the tree; every robot it meets joins and takes the group size as id.
pub fn ids_from_leader(graph: &PortGraph, positions: &[NodeId], leader: usize) -> Result<Vec<usize>, RobotError> {
    if leader >= positions.len() {
        return Err(RobotError::InvalidParameters(format!("no robot {leader}")));
    }
    if !graph.is_tree() {
        return Err(RobotError::InvalidParameters("leader tour needs a tree".into()));
    }
    let mut ids = vec![0usize; positions.len()];
    let mut group = 1;
    ids[leader] = 1;
    let mut pos = positions[leader];
    let mut arrival = graph.degree(pos);
    for _ in 0..=2 * graph.n() {
        for (i, &p) in positions.iter().enumerate() {
            if p == pos && ids[i] == 0 {
                group += 1;
                ids[i] = group;
            }
        }
        let port = euler_next_port(graph.degree(pos), arrival)?;
        let next = graph.neighbor(pos, port)?;
        arrival = graph.port_to(next, pos).expect("undirected graph");
        pos = next;
    }
    Ok(ids)
}

/// `k = n` robots with one id on a symmetric cycle: under the synchronous
/// schedule every robot and every board stays identical. Returns the number
/// of steps symmetry survived (`steps` when never broken).
pub fn symmetry_witness(n: usize, steps: u64) -> Result<u64, RobotError> {
    let graph = PortGraph::symmetric_cycle(n)?;
    let k = n;
    let mut sys = NamingSystem {
        boards: vec![Whiteboard::new(k); n],
        robots: (0..n)
            .map(|u| MobileRobot { id: 1, pos: u, arrival_port: 2, leader: false, beaten: false, arrived_at: 0 })
            .collect(),
        graph,
        k,
        mode: Mode::Deterministic,
        rng: ChaCha8Rng::seed_from_u64(0),
        steps: 0,
        rounds: 0,
        acted: vec![false; k],
    };
    let all: Vec<NodeId> = (0..n).collect();
    for t in 0..steps {
        sys.step_nodes(&all)?;
        let r0 = &sys.robots[0];
        let same_robots = sys.robots.iter().all(|r| r.id == r0.id && r.arrival_port == r0.arrival_port);
        let same_boards = sys.boards.iter().all(|b| b == &sys.boards[0]);
        let one_each = sys.occupied().len() == n;
        if !(same_robots && same_boards && one_each) {
            return Ok(t);
        }
    }
    Ok(steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use stabilab_core::gen;

    fn robot(id: usize, arrival_port: usize) -> MobileRobot {
        MobileRobot { id, pos: 0, arrival_port, leader: false, beaten: false, arrived_at: 0 }
    }

    #[test]
    fn rotor_wraps_and_bounces() {
        assert_eq!(euler_next_port(1, 1).unwrap(), 1);
        assert_eq!(euler_next_port(3, 3).unwrap(), 1);
        assert!(euler_next_port(3, 4).is_err());
    }

    #[test]
    fn euler_period_is_twice_the_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..=10 {
            let g = PortGraph::from_graph(&gen::random_tree(n, 1, &mut rng));
            let (start, arr) = (0, 1);
            let (mut pos, mut arrival) = (start, arr);
            let mut t = 0;
            loop {
                let port = euler_next_port(g.degree(pos), arrival).unwrap();
                let next = g.neighbor(pos, port).unwrap();
                arrival = g.port_to(next, pos).unwrap();
                pos = next;
                t += 1;
                if (pos, arrival) == (start, arr) {
                    break;
                }
            }
            assert_eq!(t, 2 * (n - 1), "n={n}");
        }
    }

    #[test]
    fn absent_id_is_written() {
        let d = det_naming_step(&robot(3, 1), 2, &Whiteboard::new(3), &[], 3).unwrap();
        assert_eq!(d, DetStep { rule: Rule::Absent, id: 3, write: Some((3, 2)), exit_port: 2 });
    }

    #[test]
    fn namesake_takes_smallest_free_id() {
        let mut b = Whiteboard::new(3);
        b.write(1, 1);
        b.write(2, 1);
        let d = det_naming_step(&robot(2, 1), 2, &b, &[2], 3).unwrap();
        assert_eq!((d.rule, d.id), (Rule::Rename, 3));
    }

    #[test]
    fn stale_trail_is_chased() {
        let mut b = Whiteboard::new(3);
        b.write(2, 1);
        let d = det_naming_step(&robot(2, 3), 3, &b, &[], 3).unwrap();
        assert_eq!((d.rule, d.exit_port, d.write), (Rule::Chase, 1, None));
    }

    #[test]
    fn board_evicts_oldest() {
        let mut b = Whiteboard::new(2);
        b.write(1, 1);
        b.write(2, 1);
        b.write(2, 2);
        assert!(!b.contains(1));
        assert_eq!(b.last_port(2), Some(2));
        assert_eq!(Whiteboard::bits(4, 3), 4 * (2 + 2));
    }

    #[test]
    fn path_naming_converges() {
        let g = PortGraph::from_graph(&gen::path(6));
        for seed in 0..20 {
            let mut sys = NamingSystem::new(g.clone(), 4, Mode::Deterministic, seed).unwrap();
            sys.corrupt(NamingFaults::all());
            let rep = sys.run(10_000).unwrap();
            assert!(rep.converged, "seed {seed}: {rep:?}");
        }
    }

    #[test]
    fn random_walk_naming_converges_on_a_cycle() {
        let g = PortGraph::from_graph(&gen::cycle(6));
        let mut sys = NamingSystem::new(g, 3, Mode::Probabilistic, 9).unwrap();
        sys.corrupt(NamingFaults::all());
        assert!(sys.run(100_000).unwrap().converged);
    }

    #[test]
    fn leader_is_the_largest_id() {
        let g = PortGraph::from_graph(&gen::path(5));
        let mut sys = NamingSystem::new(g, 3, Mode::Deterministic, 1).unwrap();
        sys.corrupt(NamingFaults::all());
        assert!(election_from_ids(&mut sys, 10_000).unwrap().is_some());
        assert!(sys.leader_elected());
    }

    #[test]
    fn leader_numbers_the_others() {
        let g = PortGraph::from_graph(&gen::path(5));
        assert_eq!(ids_from_leader(&g, &[2], 0).unwrap(), vec![1]);
        let mut ids = ids_from_leader(&g, &[4, 0, 2], 1).unwrap();
        assert_eq!(ids[1], 1);
        ids.sort_unstable();
        assert_eq!(ids, vec![1, 2, 3]);
    }

    #[test]
    fn synchronous_cycle_stays_symmetric() {
        assert_eq!(symmetry_witness(5, 100).unwrap(), 100);
    }
}
