use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("input rows are linearly dependent")]
    DependentRows,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("instance too large for exhaustive enumeration: {0}")]
    TooLarge(String),

    #[error("rows {0} and {1} do not commute")]
    NonCommuting(usize, usize),

    #[error("code parameters mismatch: expected [[{expected_n},{expected_k}]], built [[{n},{k}]]")]
    ExpectMismatch {
        expected_n: usize,
        expected_k: usize,
        n: usize,
        k: usize,
    },

    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("estimate does not satisfy the measured syndrome")]
    InconsistentEstimate,

    #[error("empty candidate set")]
    NoCandidates,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
