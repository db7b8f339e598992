use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("width mismatch: expected {expected} bits, got {actual}")]
    WidthMismatch { expected: u32, actual: u32 },

    #[error("value {value} does not fit in {bits} bits")]
    OutOfRange { value: u64, bits: u32 },

    #[error("invalid distribution: {0}")]
    InvalidDist(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("enumeration too large: {what} needs 2^{log2_cost} steps (limit 2^{limit})")]
    TooLarge {
        what: String,
        log2_cost: u32,
        limit: u32,
    },

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("construction failed: {0}")]
    Construction(String),
}

impl Error {
    pub(crate) fn too_large(what: impl Into<String>, log2_cost: u32, limit: u32) -> Self {
        Error::TooLarge {
            what: what.into(),
            log2_cost,
            limit,
        }
    }
}
