use thiserror::Error;

/// Errors produced by the core numerics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input parameter is outside its allowed domain.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// The symmetric eigensolver did not converge on a sector block.
    #[error("eigensolver did not converge in sector n_up={n_up} (dimension {dim})")]
    Eigensolver { n_up: usize, dim: usize },

    /// A two-site state violates positivity or the correlator bounds.
    #[error("invalid two-site state (dx={dx}, dz={dz}): {reason}")]
    State { dx: f64, dz: f64, reason: String },

    /// A grid point of a sweep failed; wraps the underlying error.
    #[error("sweep failed at {param}={value}: {source}")]
    SweepPoint {
        param: &'static str,
        value: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
