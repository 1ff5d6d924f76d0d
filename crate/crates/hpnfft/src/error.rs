use thiserror::Error;

/// Errors produced by transforms, the decomposition layer, and the Ewald
/// application.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid bandwidth {0}: every component must be even and >= 2")]
    InvalidBandwidth(usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid point data: {0}")]
    InvalidPoint(String),
    #[error("reference vector has zero norm; relative error is undefined")]
    UndefinedReference,
    #[error("invalid window parameter: {0}")]
    InvalidWindow(String),
    #[error("window weight {0:e} is below 1e-300; dividing by it would blow up")]
    DegenerateWindow(f64),
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("communication with rank {peer} failed: {reason}")]
    Communication { peer: usize, reason: String },
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("invalid cutoff: {0}")]
    InvalidCutoff(String),
    #[error("k-vector ({0}) is outside the transform bandwidth")]
    BandwidthExceeded(String),
    #[error("invalid crystal size {0}: must be >= 1")]
    InvalidSize(usize),
    #[error("format error at byte {offset}: {reason}")]
    Format { offset: u64, reason: String },
    #[error("resource limit exceeded: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;
