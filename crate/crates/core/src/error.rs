use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the solvers, oracles and front-ends.
///
/// Each variant maps onto one of the process exit codes used by the CLI
/// (see [`Error::exit_code`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("search guard exceeded: N = {n} is above the limit {max} for K = {k}")]
    GuardExceeded { n: usize, max: usize, k: usize },

    #[error("rank-deficient argument: numerical rank {rank} with {cols} columns")]
    RankDeficient { rank: usize, cols: usize },

    #[error("degenerate solution: {0}")]
    Degenerate(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("replay mismatch: {0}")]
    Mismatch(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// 2 for malformed input, 3 for contract violations, 4 for numerical trouble.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::Parse(_) | Error::Io { .. } => 2,
            Error::Precondition(_) | Error::GuardExceeded { .. } => 3,
            Error::RankDeficient { .. }
            | Error::Degenerate(_)
            | Error::Numerical(_)
            | Error::Mismatch(_) => 4,
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
