use thiserror::Error;

/// Errors produced by trajectory parsing, graph construction, and the
/// analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("frame {frame} outside dataset range [{min}, {max}]")]
    FrameOutOfRange { frame: u64, min: u64, max: u64 },

    #[error("agent {0:?} not present in frame graph")]
    AgentNotPresent(String),

    #[error("series of length {len} shorter than smoothing window {window}")]
    SeriesTooShort { len: usize, window: usize },

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
