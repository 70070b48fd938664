use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid numerology parameters: {0}")]
    Param(String),
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("subband allocation failed: {0}")]
    Allocation(String),
    #[error("payload mismatch: {0}")]
    Payload(String),
    #[error("unsupported size: {0}")]
    Size(String),
    #[error("framing error: {0}")]
    Framing(String),
    #[error("length mismatch: expected {expected}, got {actual}")]
    Length { expected: usize, actual: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid power delay profile: {0}")]
    Profile(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("trial failed at snr {snr_db} dB, index {trial}: {source}")]
    Trial {
        snr_db: f64,
        trial: u64,
        #[source]
        source: Box<Error>,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
