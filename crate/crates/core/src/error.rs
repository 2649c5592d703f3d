use thiserror::Error;

/// Errors raised by the construction and measurement routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric parameter violates the precondition of the operation.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A construction step could not be completed with the given inputs.
    #[error("construction failed: {0}")]
    Construction(String),

    /// The proximity graph of a sewn space is not connected.
    #[error(
        "graph is disconnected: smallest component has {size} node(s), \
         including node {representative}"
    )]
    Disconnected { size: usize, representative: usize },

    /// A probe radius is too small for the sample to resolve the ball.
    #[error("radius {radius} holds only {count} sample point(s); at least {required} are needed")]
    BelowResolution {
        radius: f64,
        count: usize,
        required: usize,
    },

    /// A tunnel whose revolution hypersurface fails to have positive scalar curvature.
    #[error("tunnel has non-positive scalar curvature (minimum {0:e})")]
    NonPositiveScalar(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad user input rather than a failed construction.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. } | Error::BelowResolution { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
