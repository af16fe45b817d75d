use thiserror::Error;

pub type Result<T, E = MseError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum MseError {
    #[error("invalid list system: {0}")]
    InvalidSystem(String),

    #[error("unknown list `{0}`")]
    UnknownList(String),

    #[error("unknown dataset `{0}` (expected one of uk6, uk5, uk4, ned6, ned5, no8, no5, kosovo)")]
    UnknownDataset(String),

    #[error("csv line {line}: {msg}")]
    Csv { line: usize, msg: String },

    #[error("no observations")]
    NoObservations,

    #[error("model has {spec_k} lists but the table has {table_k}")]
    DimensionMismatch { spec_k: usize, table_k: usize },

    #[error("design is rank deficient (rank {rank} < {params} parameters)")]
    RankDeficient { rank: usize, params: usize },

    #[error("fit did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{k} lists exceeds the exhaustive-search limit of {limit}; consolidate lists first")]
    TooManyLists { k: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl MseError {
    /// True for problems with the input data rather than the numerics.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            MseError::InvalidSystem(_)
                | MseError::UnknownList(_)
                | MseError::UnknownDataset(_)
                | MseError::Csv { .. }
                | MseError::NoObservations
                | MseError::DimensionMismatch { .. }
                | MseError::Io(_)
                | MseError::Json(_)
        )
    }
}
