use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the operation's domain (negative sqrt, short sequence, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A value could not be constructed because it violates a type invariant.
    #[error("invalid value: {0}")]
    Invalid(String),

    /// The certified value sits within its error bound of a half-integer; the
    /// caller has to re-evaluate with more digits.
    #[error("precision insufficient at {digits} digits: {context}")]
    PrecisionInsufficient { digits: u32, context: String },

    #[error("ill-conditioned system: {0}")]
    IllConditioned(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::PrecisionInsufficient { .. } | Error::IllConditioned(_)
        )
    }
}
