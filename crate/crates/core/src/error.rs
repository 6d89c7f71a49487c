use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian: |m - m†| = {deviation:.3e} at ({row}, {col})")]
    NotHermitian {
        deviation: f64,
        row: usize,
        col: usize,
    },

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("operator leaves the symmetric family: residual {residual:.3e} at entry ({row}, {col})")]
    OutsideFamily {
        residual: f64,
        row: usize,
        col: usize,
    },

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config: {0}")]
    Config(#[from] toml::de::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
