use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside an operation's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A generator or engine produced a value that failed its own validation.
    #[error("internal consistency error: {0}")]
    Consistency(String),
    #[error("certificate parse error: {0}")]
    CertificateParse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
