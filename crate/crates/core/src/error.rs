use thiserror::Error;

/// Everything that can go wrong in the core library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("degenerate state: |1 + alpha + gamma| = {0:e}")]
    DegenerateState(f64),

    #[error("singular state: determinant {0:e} below threshold")]
    SingularState(f64),

    #[error("covariance matrix is not pure (momentum block mismatch {0:e})")]
    NotPure(f64),

    #[error("covariance matrix is not exchange symmetric (mismatch {0:e})")]
    NotSymmetric(f64),

    #[error("degenerate evolution denominator |D| = {0:e}")]
    DegenerateEvolution(f64),

    #[error("singular local transform denominator |D| = {0:e}")]
    SingularTransform(f64),

    #[error("STMS restoration diverged after t = {last_good_t}")]
    SolverDiverged { last_good_t: f64 },

    #[error("squeezing strength overflow: |lambda'| = {0}")]
    StrengthOverflow(f64),

    #[error("position grid too small: doubling changed entropy by {0:e}")]
    GridTooSmall(f64),

    #[error("negative eigenvalue {0:e} in reduced density matrix")]
    NegativeEigenvalue(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
