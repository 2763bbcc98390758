//! Crate-wide error type.

/// Errors surfaced by the numerical operations in this crate.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A parameter is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An evaluation would overflow the function's finite domain.
    #[error("domain overflow: {0}")]
    DomainOverflow(String),

    /// An integral failed its finiteness hypothesis (or did not stabilize).
    #[error("divergent integral: {0}")]
    Divergent(String),

    /// The N-function lacks the metadata required by the requested bound.
    #[error("missing capability: {0}")]
    MissingCapability(String),

    /// Evaluation at a point where the closed form is singular.
    #[error("singular endpoint: {0}")]
    SingularEndpoint(String),
}

pub type Result<T> = std::result::Result<T, Error>;
