use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph must have at least one vertex")]
    Empty,
    #[error("graph exceeds the 32-bit vertex/edge id range")]
    TooLarge,
    #[error("edge {edge} is a self-loop at vertex {vertex}")]
    SelfLoop { edge: usize, vertex: u32 },
    #[error("edge {edge} = ({u}, {v}) has an endpoint outside 0..{n}")]
    OutOfRange {
        edge: usize,
        u: u32,
        v: u32,
        n: usize,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DemandError {
    #[error("demand is not balanced: sum = {sum}, tolerance = {tolerance}")]
    Unbalanced { sum: f64, tolerance: f64 },
    #[error("non-finite value {value} at vertex {vertex}")]
    NonFinite { vertex: u32, value: f64 },
    #[error("vertex {vertex} is outside the graph (n = {n})")]
    VertexOutOfRange { vertex: u32, n: usize },
    #[error("scaled demand {value} at vertex {vertex} is not integral")]
    NotIntegral { vertex: u32, value: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MwuError {
    #[error("alpha = {0} must lie in (0, 1/4]")]
    AlphaOutOfRange(f64),
    #[error("index count must be at least 1")]
    NoIndices,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("iteration {iteration}: gain {gain} at index {index} exceeds the width bound 2")]
    GainTooLarge {
        iteration: usize,
        index: u64,
        gain: f64,
    },
    #[error("iteration {iteration}: <g, w~> = {dot} exceeds tolerance {tolerance}")]
    PositiveCorrelation {
        iteration: usize,
        dot: f64,
        tolerance: f64,
    },
    #[error("iteration {iteration}: index {index} outside 0..{count}")]
    IndexOutOfRange {
        iteration: usize,
        index: u64,
        count: u64,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("eps = {0} must lie in (0, 1)")]
    EpsOutOfRange(f64),
    #[error("number of commodities must be at least 1")]
    NoCommodities,
    #[error(transparent)]
    Demand(#[from] DemandError),
    #[error("weight engine contract violated: {0}")]
    Mwu(#[from] MwuError),
    #[error("iteration {0}: termination fired but no sweep cut certifies infeasibility")]
    SweepFailed(usize),
    #[error("iteration {0}: termination fired but the potential certificate does not verify")]
    CertificateRejected(usize),
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Instance(#[from] FormatError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}
