//! Mobile robot models: oblivious robots exploring a ring, and robots with
//! whiteboards naming themselves on a network.

mod error;
pub mod naming;
pub mod pellicule;
pub mod ring;

pub use error::RobotError;
