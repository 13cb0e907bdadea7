use std::path::PathBuf;

/// Errors produced by the simulator.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid network configuration: {0}")]
    InvalidNetwork(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid payoff parameters: {0}")]
    InvalidPayoff(String),

    #[error("invalid interference configuration: {0}")]
    InvalidInterference(String),

    #[error("invalid update rule: {0}")]
    InvalidUpdateRule(String),

    #[error("invalid run configuration: {0}")]
    InvalidRun(String),

    #[error("configuration mismatch: {0}")]
    Mismatch(String),

    #[error("malformed sweep table: {0}")]
    Table(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
