//! Self-stabilizing protocols on the register engine.

pub mod compose;
pub mod mdst;
pub mod mst_cyclic;
pub mod mst_lca;
pub mod spt;
pub mod steiner;
pub mod token;
pub mod tree;
pub mod walk;

pub use compose::{bfs_sc, compose_fair, BfsSc, Composed, ConstantSlave, Master, MstOracleSlave, TargetState, TreeState};
pub use mdst::Mdst;
pub use mst_cyclic::MstCyclic;
pub use mst_lca::MstLca;
pub use spt::Spt;
pub use steiner::Steiner;
pub use token::{dfs_token, DfsToken};

use crate::engine::Protocol;
use crate::Graph;

/// Protocols whose parent map must stay a spanning tree once one has formed.
pub trait Formation: Protocol {
    /// The configuration holds a settled spanning tree with no exchange in flight.
    fn formed(&self, net: &Graph, cfg: &[Self::State]) -> bool;
}
