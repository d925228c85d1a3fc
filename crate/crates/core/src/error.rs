use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed element: {0}")]
    Representation(String),
    #[error("resource budget exceeded: {0}")]
    Resource(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("certificate failed: {0}")]
    Certificate(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
