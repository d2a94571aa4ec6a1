use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised anywhere in the sampling, decomposition and embedding pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("mesh is empty or has fewer than 3 vertices")]
    EmptyMesh,
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("invalid point cloud: {0}")]
    InvalidCloud(String),
    #[error("degenerate edge ({0}, {1}) has zero length")]
    DegenerateEdge(usize, usize),
    #[error("graph is disconnected ({components} components)")]
    DisconnectedGraph { components: usize },
    #[error("vertex {target} is unreachable from source {source_vertex}")]
    Unreachable { source_vertex: usize, target: usize },
    #[error("face {0} has zero area")]
    ZeroAreaFace(usize),
    #[error("vertex {0} belongs to no face")]
    IsolatedVertex(usize),
    #[error("index {index} out of range for {len} vertices")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("linear system is singular or not positive definite")]
    SingularSystem,
    #[error("solver failed: relative residual {residual:e} exceeds {target:e}")]
    SolverFailure { residual: f64, target: f64 },
    #[error("no usable eigenvalues in the sampled block")]
    RankDeficient,
    #[error("sampled block is ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),
    #[error("matrix of size {p} exceeds the dense cap {cap}")]
    TooLarge { p: usize, cap: usize },
    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    NonSymmetric(f64),
    #[error("degenerate embedding: {0}")]
    DegenerateEmbedding(String),
    #[error("reference has zero norm")]
    ZeroReference,
    #[error("pair ({0}, {1}) has zero true distance")]
    ZeroDistancePair(usize, usize),
    #[error("metric mismatch: expected {expected}, found {found}")]
    MetricMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("unknown {kind} '{name}'")]
    UnknownStrategy { kind: &'static str, name: String },
    #[error("eigendecomposition did not converge")]
    Eigen,
    #[error("bad matrix file: {0}")]
    MatrixFormat(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

impl Error {
    /// Process exit code: 2 I/O, 3 bad input data, 4 numerical degeneracy,
    /// 5 solver failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            Error::RankDeficient
            | Error::IllConditioned(_)
            | Error::DegenerateEmbedding(_)
            | Error::Eigen => 4,
            Error::SingularSystem | Error::SolverFailure { .. } => 5,
            _ => 3,
        }
    }
}
