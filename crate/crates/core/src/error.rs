use thiserror::Error;

/// Errors raised by the catalogue model, ingestion and read primitives.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("source unreadable: {0}")]
    SourceUnreadable(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("unknown feature {0:?}")]
    UnknownFeature(String),
    #[error("index {index} out of range for {len} records")]
    OutOfRange { index: i64, len: usize },
}
