use thiserror::Error;

use crate::graph::{Edge, NodeId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("network has no nodes")]
    Empty,
    #[error("node {node} out of range for n={n}")]
    NodeOutOfRange { node: NodeId, n: usize },
    #[error("self loop at node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge {0}")]
    DuplicateEdge(Edge),
    #[error("edge {0} must have a positive weight")]
    NonPositiveWeight(Edge),
    #[error("{0} is not an edge of the network")]
    NotAnEdge(Edge),
    #[error("network is not connected")]
    Disconnected,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("instance too large for exhaustive search (n={n}, cap={cap})")]
    CapExceeded { n: usize, cap: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("configuration has {found} nodes, network has {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("value {value} outside the domain of register `{register}`")]
    OutOfDomain { register: String, value: String },
    #[error("register `{0}` declared by both composed layers")]
    SchemaCollision(String),
    #[error("protocol requires a designated root")]
    MissingRoot,
    #[error("protocol requires {0}")]
    Unsupported(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: GraphError },
    #[error(transparent)]
    Graph(#[from] GraphError),
}
