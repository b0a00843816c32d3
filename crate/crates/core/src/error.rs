use std::path::PathBuf;

/// Errors raised anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("measurement branch has vanishing probability ({probability:e})")]
    ZeroProbability { probability: f64 },

    #[error("heralding impossible: photon-present probability {probability:e}")]
    HeraldImpossible { probability: f64 },

    #[error("step-halving check failed: relative change {change:e} exceeds tolerance {tolerance:e}")]
    Tolerance { change: f64, tolerance: f64 },

    #[error("register too large: {emitted} emitted qubits exceeds the limit of {limit}")]
    RegisterTooLarge { emitted: usize, limit: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
