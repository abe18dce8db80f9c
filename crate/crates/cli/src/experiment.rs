//! Protocol x daemon x fault runs and their CSV rows.
//!
//! CSV columns: `seed,protocol,n,m,daemon,fairness,rounds,steps,converged,max_bits_per_node,quality`.
//! `quality` depends on the protocol: tree weight over the MST weight for
//! `mst-cyclic`/`mst-lca`, tree degree minus the optimum for `mdst` (n <= 12),
//! tree weight over the optimal Steiner weight for `steiner`, empty otherwise.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use stabilab_core::engine::{
    inject_faults, parent_map, run, Daemon, DaemonKind, Event, Fairness, FaultSpec, Protocol, Report, RunOptions,
    ScheduledEvent, SimRng,
};
use stabilab_core::oracles::{self, EdgeSet};
use stabilab_core::protocols::mst_cyclic::tree_edges;
use stabilab_core::protocols::steiner::{steiner_edges, SteinerRegisters};
use stabilab_core::protocols::{bfs_sc, dfs_token, Mdst, MstCyclic, MstLca, Spt, Steiner};
use stabilab_core::{EngineError, Graph, NodeId};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProtocolKind {
    Spt,
    DfsToken,
    BfsSc,
    MstCyclic,
    MstLca,
    Mdst,
    Steiner,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 7] = [
        ProtocolKind::Spt,
        ProtocolKind::DfsToken,
        ProtocolKind::BfsSc,
        ProtocolKind::MstCyclic,
        ProtocolKind::MstLca,
        ProtocolKind::Mdst,
        ProtocolKind::Steiner,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Spt => "spt",
            ProtocolKind::DfsToken => "dfs-token",
            ProtocolKind::BfsSc => "bfs-sc",
            ProtocolKind::MstCyclic => "mst-cyclic",
            ProtocolKind::MstLca => "mst-lca",
            ProtocolKind::Mdst => "mdst",
            ProtocolKind::Steiner => "steiner",
        }
    }

    fn is_mst(self) -> bool {
        matches!(self, ProtocolKind::MstCyclic | ProtocolKind::MstLca)
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProtocolKind::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| SpecError::UnknownProtocol(s.to_string()))
    }
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("unknown protocol `{0}`")]
    UnknownProtocol(String),
    #[error("{protocol} needs a weighted graph")]
    NeedsWeights { protocol: ProtocolKind },
    #[error("{protocol} does not accept {what}")]
    Unsupported { protocol: ProtocolKind, what: &'static str },
    #[error("member {node} is not a node of the graph")]
    BadMember { node: NodeId },
    #[error("no seeds given")]
    NoSeeds,
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub protocol: ProtocolKind,
    pub graph: Graph,
    pub daemon: DaemonKind,
    pub fairness: Fairness,
    /// `None` starts from the clean initial configuration.
    pub faults: Option<FaultSpec>,
    pub events: Vec<ScheduledEvent>,
    /// Steiner members present from the start.
    pub members: Vec<NodeId>,
    pub seeds: Vec<u64>,
    pub max_rounds: usize,
    pub record_trace: bool,
}

impl ExperimentSpec {
    pub fn new(protocol: ProtocolKind, graph: Graph) -> Self {
        ExperimentSpec {
            protocol,
            graph,
            daemon: DaemonKind::Distributed,
            fairness: Fairness::Weak,
            faults: Some(FaultSpec::total()),
            events: Vec::new(),
            members: Vec::new(),
            seeds: vec![0],
            max_rounds: 100_000,
            record_trace: false,
        }
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let p = self.protocol;
        if self.seeds.is_empty() {
            return Err(SpecError::NoSeeds);
        }
        if p.is_mst() && !self.graph.is_weighted() {
            return Err(SpecError::NeedsWeights { protocol: p });
        }
        for ev in &self.events {
            match ev.event {
                Event::Weight { .. } if !p.is_mst() => {
                    return Err(SpecError::Unsupported { protocol: p, what: "weight events" })
                }
                Event::Member { .. } if p != ProtocolKind::Steiner => {
                    return Err(SpecError::Unsupported { protocol: p, what: "membership events" })
                }
                _ => {}
            }
        }
        if !self.members.is_empty() && p != ProtocolKind::Steiner {
            return Err(SpecError::Unsupported { protocol: p, what: "members" });
        }
        if let Some(&node) = self.members.iter().find(|&&m| m >= self.graph.n()) {
            return Err(SpecError::BadMember { node });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub seed: u64,
    pub protocol: ProtocolKind,
    pub n: usize,
    pub m: usize,
    pub daemon: DaemonKind,
    pub fairness: Fairness,
    pub rounds: usize,
    pub steps: usize,
    pub converged: bool,
    pub max_bits_per_node: usize,
    pub quality: Option<f64>,
    /// Exported trace, empty unless requested.
    pub trace: String,
    /// Final tree, for protocols that build one.
    pub tree: Option<EdgeSet>,
}

impl Row {
    /// The run converged and its structure meets the protocol's guarantee.
    pub fn holds(&self) -> bool {
        if !self.converged {
            return false;
        }
        match (self.protocol, self.quality) {
            (p, Some(q)) if p.is_mst() => q == 1.0,
            (ProtocolKind::Mdst, Some(q)) => q <= 1.0,
            _ => true,
        }
    }
}

pub const CSV_HEADER: [&str; 11] =
    ["seed", "protocol", "n", "m", "daemon", "fairness", "rounds", "steps", "converged", "max_bits_per_node", "quality"];

pub fn rows_to_csv(rows: &[Row]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.seed.to_string(),
            r.protocol.to_string(),
            r.n.to_string(),
            r.m.to_string(),
            r.daemon.to_string(),
            r.fairness.to_string(),
            r.rounds.to_string(),
            r.steps.to_string(),
            r.converged.to_string(),
            r.max_bits_per_node.to_string(),
            r.quality.map(|q| format!("{q:.6}")).unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 fields")
}

/// One row per seed.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<Row>, SpecError> {
    spec.validate()?;
    spec.seeds
        .iter()
        .map(|&seed| match spec.protocol {
            ProtocolKind::Spt => {
                one(spec, seed, &Spt, Spt.initial_configuration(&spec.graph), |net, cfg| (None, spanning_tree(&Spt, net, cfg)))
            }
            ProtocolKind::DfsToken => {
                let p = dfs_token();
                one(spec, seed, &p, p.initial_configuration(&spec.graph), |net, cfg| (None, spanning_tree(&p, net, cfg)))
            }
            ProtocolKind::BfsSc => {
                let p = bfs_sc();
                one(spec, seed, &p, p.initial_configuration(&spec.graph), |net, cfg| (None, spanning_tree(&p, net, cfg)))
            }
            ProtocolKind::MstCyclic => {
                one(spec, seed, &MstCyclic, MstCyclic.initial_configuration(&spec.graph), |net, cfg| mst_quality(&MstCyclic, net, cfg))
            }
            ProtocolKind::MstLca => {
                one(spec, seed, &MstLca, MstLca.initial_configuration(&spec.graph), |net, cfg| mst_quality(&MstLca, net, cfg))
            }
            ProtocolKind::Mdst => {
                let p = Mdst::relaxed();
                one(spec, seed, &p, p.initial_configuration(&spec.graph), |net, cfg| mdst_quality(&p, net, cfg))
            }
            ProtocolKind::Steiner => {
                let init = Steiner.with_members(&spec.graph, &spec.members);
                one(spec, seed, &Steiner, init, steiner_quality)
            }
        })
        .collect()
}

type Quality = (Option<f64>, Option<EdgeSet>);

fn one<P: Protocol>(
    spec: &ExperimentSpec,
    seed: u64,
    proto: &P,
    clean: Vec<P::State>,
    quality: impl Fn(&Graph, &[P::State]) -> Quality,
) -> Result<Row, SpecError> {
    let mut rng = SimRng::seed_from_u64(seed);
    let init = match &spec.faults {
        Some(f) => inject_faults(proto, &spec.graph, &clean, f, &mut rng)?,
        None => clean,
    };
    let opts = RunOptions {
        events: spec.events.clone(),
        record_trace: spec.record_trace,
        ..RunOptions::rounds(spec.max_rounds)
    };
    let rep: Report<P::State> = run(proto, &spec.graph, init, Daemon::new(spec.daemon, spec.fairness, seed), &opts)?;
    let (q, tree) = quality(&rep.net, &rep.final_config);
    Ok(Row {
        seed,
        protocol: spec.protocol,
        n: spec.graph.n(),
        m: spec.graph.m(),
        daemon: spec.daemon,
        fairness: spec.fairness,
        rounds: rep.rounds,
        steps: rep.steps,
        converged: rep.converged,
        max_bits_per_node: rep.max_bits,
        quality: q,
        trace: if spec.record_trace { rep.trace.export() } else { String::new() },
        tree,
    })
}

fn spanning_tree<P: Protocol>(proto: &P, net: &Graph, cfg: &[P::State]) -> Option<EdgeSet> {
    tree_edges(net, &parent_map(proto, cfg)?)
}

fn mst_quality<P: Protocol>(proto: &P, net: &Graph, cfg: &[P::State]) -> Quality {
    let tree = spanning_tree(proto, net, cfg);
    let best = oracles::tree_weight(net, &oracles::mst_reference(net));
    let q = tree.as_ref().map(|t| oracles::tree_weight(net, t) as f64 / best as f64);
    (q, tree)
}

const MDST_EXACT_LIMIT: usize = 12;

fn mdst_quality<P: Protocol>(proto: &P, net: &Graph, cfg: &[P::State]) -> Quality {
    let tree = spanning_tree(proto, net, cfg);
    let q = match &tree {
        Some(t) if net.n() <= MDST_EXACT_LIMIT => oracles::min_max_degree_exact(net)
            .ok()
            .map(|opt| oracles::max_degree(net.n(), t) as f64 - opt as f64),
        _ => None,
    };
    (q, tree)
}

fn steiner_quality(net: &Graph, cfg: &[SteinerRegisters]) -> Quality {
    let tree = steiner_edges(net, cfg);
    let root = net.root().unwrap_or(0);
    let mut members: Vec<NodeId> = vec![root];
    members.extend((0..cfg.len()).filter(|&u| cfg[u].member && u != root));
    let q = match (&tree, oracles::steiner_optimal(net, &members)) {
        (Some(t), Ok(opt)) if opt > 0 => Some(oracles::tree_weight(net, t) as f64 / opt as f64),
        _ => None,
    };
    (q, tree)
}
