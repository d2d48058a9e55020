use thiserror::Error;

/// Errors raised by basis construction, operator assembly, the eigensolver,
/// the integrator and the run harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigensolver did not converge for `{label}` operator of dimension {dim}")]
    NonConvergence { label: String, dim: usize },

    #[error("dense eigendecomposition is limited to dimension {limit}, got {dim}")]
    TooLarge { dim: usize, limit: usize },

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("integrator step size underflow at t = {time}")]
    StepUnderflow { time: f64 },

    #[error("norm drift {drift:e} exceeds tolerance at t = {time}")]
    NormDrift { drift: f64, time: f64 },

    #[error("no avoided crossing: minimal splitting {min_splitting} exceeds {threshold}")]
    NoCrossing { min_splitting: f64, threshold: f64 },

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Domain(_) | Error::Io(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
