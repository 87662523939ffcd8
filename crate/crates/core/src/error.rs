use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid vertex pair ({i}, {j}) for a graph on {n} vertices")]
    InvalidPair { i: usize, j: usize, n: usize },

    #[error("edge index {index} out of range for N = {len}")]
    EdgeIndex { index: usize, len: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid statistic: {0}")]
    InvalidStatistic(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("statistic `{0}` is not a pure subgraph count")]
    UnsupportedStatistic(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("geometric random walk diverges: lambda = {lambda} but spectral radius of the product graph is {radius}")]
    Divergence { lambda: f64, radius: f64 },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("statistic evaluated to {0}, which is negative beyond rounding tolerance")]
    NegativeStatistic(f64),

    #[error("test function is undefined on a graph one toggle away from the input")]
    IncompleteFunction,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("covariance is rank deficient in coordinates {0:?}")]
    RankDeficient(Vec<usize>),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
