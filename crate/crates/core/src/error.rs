use thiserror::Error;

/// Errors raised across the library.
///
/// Vertex indices carried in variants are 0-based library indices, except
/// for edge-list parsing, which reports the labels found in the input.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("edge list is empty")]
    EmptyGraph,
    #[error("invalid vertex label {0}: labels are positive integers")]
    InvalidLabel(i64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("source and sink must differ (both are {0})")]
    SameVertex(usize),
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("linear solve failed: {0}")]
    SolverFailure(String),
    #[error("enumeration limited to {max} vertices, graph has {n}")]
    TooLarge { n: usize, max: usize },
    #[error("operation requires N = {expected}, got N = {got}")]
    WrongN { expected: String, got: usize },
    #[error("unsupported spin dimension N = {0}")]
    UnsupportedN(usize),
    #[error("invalid binary tree depth {0}")]
    InvalidDepth(usize),
    #[error("inverse temperature must be positive, got {0}")]
    NonpositiveBeta(f64),
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("eigenvalue iteration did not converge within {0} iterations")]
    ConvergenceFailure(usize),
    #[error("no Gaussian-domination verdict supplied for the audit")]
    MissingVerdict,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("configuration error: {0}")]
    Config(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
