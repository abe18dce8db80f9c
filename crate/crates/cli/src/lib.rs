//! Batch experiment harness behind the `stabilab` binary.

pub mod dot;
pub mod experiment;

pub use experiment::{run_experiment, rows_to_csv, ExperimentSpec, ProtocolKind, Row, SpecError};
