use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value in {what} at node {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("mean curvature {h} outside the admissible window |H| <= {limit}")]
    HOutOfRange { h: f64, limit: f64 },

    #[error("hemisphere (H = -1/r) has an unbounded boundary gradient and is not a height-field target")]
    SingularBoundary,

    #[error("Newton iteration did not converge (last residual {last:e} after {} iterations)", history.len())]
    NonConvergence { history: Vec<f64>, last: f64 },

    #[error("boundary data must vanish for this operation (g != 0 at boundary node {0})")]
    NonZeroBoundary(usize),

    #[error("input mismatch: {0}")]
    Mismatch(String),

    #[error("unknown check '{0}'")]
    UnknownCheck(String),

    #[error("config error at {key}: {msg}")]
    Config { key: String, msg: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("empty sweep")]
    EmptySweep,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            msg: msg.into(),
        }
    }

    /// Process exit status associated with this failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::HOutOfRange { .. } | Error::SingularBoundary => exit_code::H_OUT_OF_RANGE,
            Error::NonConvergence { .. } => exit_code::NON_CONVERGENCE,
            Error::Io(_) | Error::Parse { .. } | Error::Json(_) => exit_code::IO,
            _ => exit_code::CONFIG,
        }
    }
}

pub mod exit_code {
    pub const SUCCESS: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const H_OUT_OF_RANGE: i32 = 3;
    pub const NON_CONVERGENCE: i32 = 4;
    pub const CHECK_FAILED: i32 = 5;
    pub const IO: i32 = 6;
}
