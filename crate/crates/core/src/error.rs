use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("eigenvalue iteration did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no root bracketed: {0}")]
    NoRoot(String),

    #[error("constellation has {0} codewords, at least 2 are required")]
    TooFewCodewords(usize),

    #[error("constellation has {size} codewords, exhaustive pair scan is limited to {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("operation not supported for family {0}")]
    UnsupportedFamily(String),

    #[error("codeword index {index} out of range for constellation of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("closed-form distance {closed_form} disagrees with determinant route {determinant} on pair ({i}, {j})")]
    CrossCheck {
        i: usize,
        j: usize,
        closed_form: f64,
        determinant: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
