use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RobotError {
    #[error("position {0} appears twice")]
    DuplicatePosition(usize),
    #[error("position {pos} out of range for a ring of {n} nodes")]
    OutOfRange { pos: usize, n: usize },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("no rule matches snapshot {0}")]
    Stuck(String),
    #[error("snapshot {0} is outside the permanent regime")]
    Unresolved(String),
    #[error("adversary activated a move the algorithm does not permit: robot {robot} to node {target}")]
    IllegalActivation { robot: usize, target: usize },
    #[error("adversary activated no robot")]
    EmptyActivation,
    #[error("{count} snapshots exceed the cap of {cap}")]
    CapExceeded { count: usize, cap: usize },
    #[error("port {port} out of range for degree {degree}")]
    BadPort { port: usize, degree: usize },
}
