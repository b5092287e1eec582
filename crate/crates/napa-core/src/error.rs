//! Crate-wide error type.
//!
//! Every fallible operation returns [`Result`]. Validation failures carry
//! the name of the violated invariant and the offending values so that
//! scenario authors can fix inputs without reading solver code.

use thiserror::Error;

/// Errors produced by the numerical and modeling layers.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A scenario file failed schema parsing.
    #[error("scenario parse error: {0}")]
    ScenarioParse(String),

    /// A scenario violates a model invariant. The message names the
    /// invariant and the offending values.
    #[error("scenario invariant violated ({invariant}): {detail}")]
    ScenarioInvariant { invariant: String, detail: String },

    /// A linear system or formula denominator is (near-)singular.
    #[error("near-singular computation: {0}")]
    NearSingular(String),

    /// Measured/derived data is inconsistent with the asymptotic model
    /// (negative radicand, wrong sign, non-intersecting circles, ...).
    #[error("inconsistent data: {0}")]
    InconsistentData(String),

    /// A requested feature is documented as out of scope.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// I/O error with context.
    #[error("i/o error ({context}): {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Shorthand for [`Error::InvalidArgument`].
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Shorthand for [`Error::ScenarioInvariant`].
    pub fn invariant(invariant: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::ScenarioInvariant {
            invariant: invariant.into(),
            detail: detail.into(),
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
