use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("partition function undefined at β=∞ in this normalization")]
    ZeroTemperature,

    #[error("path diverged; reduce dt")]
    StepDiverged,

    #[error("path diverged; reduce dt (path {path}, step {step})")]
    Diverged { path: u64, step: usize },

    #[error("grid too coarse: derivative changes by {relative_change:.3} between h and 2h")]
    GridTooCoarse { relative_change: f64 },

    #[error("grids do not share the same lattice")]
    GridMismatch,

    #[error("density must be positive, got {value} at ({x}, {x_tilde})")]
    NonPositiveDensity { x: f64, x_tilde: f64, value: f64 },

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("invalid histogram: {0}")]
    InvalidHistogram(String),

    #[error("degenerate bins: {0}")]
    DegenerateBins(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
