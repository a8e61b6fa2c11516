use thiserror::Error;

/// Unified error type for the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("schema: {0}")]
    Schema(String),

    #[error("ingest: {0}")]
    Ingest(String),

    #[error("index: {0}")]
    Index(String),

    #[error("config: {0}")]
    Config(String),

    #[error("oracle guard: {0}")]
    OracleGuard(String),

    #[error("join is empty")]
    EmptyJoin,

    /// A requested rank fell outside the uncovered range; this signals a
    /// measure/sample mismatch rather than bad user input.
    #[error("rank {rank} outside uncovered range {lo}..={hi}")]
    RankOutOfRange { rank: i128, lo: i128, hi: i128 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
