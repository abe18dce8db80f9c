//! Simulation kernel and spanning-tree protocols for self-stabilizing
//! algorithms in the shared-register model.
//!
//! The combinatorial layer ([`graph`], [`oracles`]) is generic over the edge
//! weight scalar; the protocols run on [`Graph`], which uses `u64` weights.

pub mod engine;
pub mod error;
pub mod gen;
pub mod graph;
pub mod io;
pub mod label;
pub mod oracles;
pub mod protocols;

pub use error::{EngineError, GraphError, OracleError, ParseError};
pub use graph::{Edge, EdgeRank, Network, NodeId, Weight};

/// Network with 64-bit integer weights, used by every protocol.
pub type Graph = Network<u64>;
/// Tie-broken edge rank under `u64` weights.
pub type Rank = EdgeRank<u64>;
