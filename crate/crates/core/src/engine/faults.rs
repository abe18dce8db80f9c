use std::str::FromStr;

use super::{Protocol, SimRng, Value};
use crate::error::EngineError;
use crate::graph::NodeId;
use crate::Graph;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Selection<T> {
    All,
    Only(Vec<T>),
}

impl<T: PartialEq> Selection<T> {
    pub fn contains(&self, x: &T) -> bool {
        match self {
            Selection::All => true,
            Selection::Only(v) => v.contains(x),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FaultMode {
    /// Uniform value from each register's domain.
    Random,
    /// Values written in order, cycling through the list.
    Values(Vec<Value>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaultSpec {
    pub nodes: Selection<NodeId>,
    pub registers: Selection<String>,
    pub mode: FaultMode,
}

impl FaultSpec {
    /// Random corruption of every register at every node.
    pub fn total() -> Self {
        FaultSpec { nodes: Selection::All, registers: Selection::All, mode: FaultMode::Random }
    }

    pub fn none() -> Self {
        FaultSpec { nodes: Selection::Only(Vec::new()), registers: Selection::All, mode: FaultMode::Random }
    }
}

/// Parses `nodes=all|0,3;registers=all|parent,dist`. Only random mode is expressible.
impl FromStr for FaultSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut spec = FaultSpec::total();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, val) = part.split_once('=').ok_or_else(|| format!("expected key=value, got `{part}`"))?;
            match key.trim() {
                "nodes" => {
                    spec.nodes = if val.trim() == "all" {
                        Selection::All
                    } else {
                        let ids = val
                            .split(',')
                            .filter(|x| !x.trim().is_empty())
                            .map(|x| x.trim().parse::<NodeId>().map_err(|e| format!("bad node `{x}`: {e}")))
                            .collect::<Result<Vec<_>, _>>()?;
                        Selection::Only(ids)
                    }
                }
                "registers" => {
                    spec.registers = if val.trim() == "all" {
                        Selection::All
                    } else {
                        Selection::Only(val.split(',').map(|x| x.trim().to_string()).collect())
                    }
                }
                other => return Err(format!("unknown fault key `{other}`")),
            }
        }
        Ok(spec)
    }
}

/// Overwrites the selected registers with values from their domains.
pub fn inject_faults<P: Protocol>(
    proto: &P,
    net: &Graph,
    cfg: &[P::State],
    spec: &FaultSpec,
    rng: &mut SimRng,
) -> Result<Vec<P::State>, EngineError> {
    if cfg.len() != net.n() {
        return Err(EngineError::SizeMismatch { expected: net.n(), found: cfg.len() });
    }
    let schema = proto.schema();
    if let Selection::Only(names) = &spec.registers {
        for r in names {
            if !schema.iter().any(|s| s.name == r) {
                return Err(EngineError::UnknownRegister(r.clone()));
            }
        }
    }
    if let Selection::Only(nodes) = &spec.nodes {
        for &u in nodes {
            if u >= net.n() {
                return Err(crate::GraphError::NodeOutOfRange { node: u, n: net.n() }.into());
            }
        }
    }
    let mut out = cfg.to_vec();
    let mut written = 0usize;
    for u in net.nodes() {
        if !spec.nodes.contains(&u) {
            continue;
        }
        for r in &schema {
            if !spec.registers.contains(&r.name.to_string()) {
                continue;
            }
            match &spec.mode {
                FaultMode::Random => proto.corrupt(net, u, &mut out[u], r.name, rng)?,
                FaultMode::Values(vals) => {
                    if vals.is_empty() {
                        continue;
                    }
                    proto.set(net, &mut out[u], r.name, vals[written % vals.len()].clone())?;
                    written += 1;
                }
            }
        }
    }
    Ok(out)
}
