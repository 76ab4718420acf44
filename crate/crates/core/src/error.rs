use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite coefficient {0}")]
    NonFinite(String),

    #[error("coefficient magnitude {magnitude:e} exceeds the representable range")]
    CoefficientOverflow { magnitude: f64 },

    #[error("invalid factor: {0}")]
    InvalidFactor(String),

    #[error("a Hénon chain needs at least one factor")]
    EmptyChain,

    #[error("expansion of degree {degree} exceeds the cap of {cap}")]
    ExpansionTooLarge { degree: usize, cap: usize },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("filtration self-check failed: {0}")]
    SelfCheckFailed(String),

    #[error("term supports differ: {0}")]
    DegreeMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error{}: {message}", factor.map(|i| format!(" in factor {i}")).unwrap_or_default())]
    Validation {
        factor: Option<usize>,
        message: String,
    },
}

impl Error {
    /// Whether the error stems from bad user input rather than a failure inside the engine.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::NonFinite(_)
                | Error::InvalidFactor(_)
                | Error::EmptyChain
                | Error::PreconditionViolated(_)
                | Error::Parse(_)
                | Error::Validation { .. }
        )
    }
}
