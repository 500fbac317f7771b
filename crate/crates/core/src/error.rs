use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("singular node geometry: condition number {condition:.3e} (nodes collinear or coincident)")]
    SingularGeometry { condition: f64 },

    #[error("outlier filtering would leave {remaining} nodes (minimum {minimum})")]
    TooFewNodes { remaining: usize, minimum: usize },

    #[error("load cases span only {rank} of 6 wrench directions")]
    RankDeficientLoads { rank: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("no convergence after {iterations} iterations (scaled residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular configuration: condition number {condition:.3e}")]
    SingularConfiguration { condition: f64 },

    #[error("singular jacobian")]
    SingularJacobian,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("point ({x:.3}, {y:.3}, {z:.3}) is not reachable")]
    Unreachable { x: f64, y: f64, z: f64 },

    #[error("no feasible box: even the smallest candidate fails at every translation")]
    NoFeasibleBox,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
