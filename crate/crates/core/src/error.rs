use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("SVD did not converge after {iterations} sweeps; superdiagonal {superdiagonal} still {value:e}")]
    SvdNoConvergence {
        iterations: usize,
        superdiagonal: usize,
        value: f64,
    },

    #[error("rank deficiency at column {column}")]
    RankDeficient { column: usize },

    /// Lanczos bidiagonalization found an (numerically) invariant subspace.
    #[error("bidiagonalization breakdown at step {step}: {which} = {value:e}")]
    Breakdown {
        step: usize,
        which: &'static str,
        value: f64,
    },

    #[error("oracle refused: condition estimate {estimate:e} exceeds {limit:e}")]
    Conditioning { estimate: f64, limit: f64 },

    #[error("Fourier coefficient u_{index}^T b is zero")]
    ZeroCoefficient { index: usize },

    #[error("repeated singular values at indices {0} and {1}")]
    RepeatedSingularValues(usize, usize),

    #[error("config error: {0}")]
    Config(String),

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
