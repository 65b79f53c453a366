use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed potential spec: {0}")]
    MalformedSpec(String),

    #[error("malformed envelope: {0}")]
    Envelope(String),

    #[error("parameter error in {stage}: {msg}")]
    Parameter { stage: &'static str, msg: String },

    #[error("insufficient domain: {0}")]
    InsufficientDomain(String),

    #[error("numeric failure on [{lo}, {hi}]: {msg}")]
    Numeric { lo: f64, hi: f64, msg: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported dimension n = {0} (only n = 1 or n >= 3)")]
    UnsupportedDimension(usize),

    #[error("grid too coarse: spacing {spacing:.3e} exceeds {limit:.3e}; use at least {suggested_points} points")]
    Resolution { spacing: f64, limit: f64, suggested_points: usize },

    #[error("solver error: {0}")]
    Solver(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },
}

impl Error {
    pub(crate) fn param(stage: &'static str, msg: impl Into<String>) -> Self {
        Error::Parameter { stage, msg: msg.into() }
    }

    /// Re-tags a parameter error with the stage that surfaced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            Error::Parameter { msg, .. } => Error::Parameter { stage, msg },
            other => Error::Parameter { stage, msg: other.to_string() },
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
