use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("linear solve failed for species {species}: {reason}")]
    SingularSystem { species: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
