use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("singular pivot at index {index}")]
    SingularPivot { index: usize },
    #[error("rank-deficient system (estimated rank {rank} of {n})")]
    RankDeficient { rank: usize, n: usize },
    #[error("residual {residual:.3e} exceeds bound {bound:.3e}")]
    Residual { residual: f64, bound: f64 },
    #[error("singular stack system: {0}")]
    SingularStack(String),
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("invalid mesh: {0}")]
    Mesh(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
