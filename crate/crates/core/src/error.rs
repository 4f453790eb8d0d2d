use std::path::PathBuf;

use thiserror::Error;

use crate::dyadic::Dyadic;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid bit character {found:?} at position {pos}")]
pub struct ParseBitsError {
    pub pos: usize,
    pub found: char,
}

/// Problems found while loading or validating a roster or run config.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

impl ConfigError {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KcError {
    #[error("request set is not bounded: the first {prefix_len} requests already weigh {weight}")]
    Overweight { prefix_len: usize, weight: Dyadic },
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("trace is empty (no header line)")]
    MissingHeader,
    #[error("unsupported trace schema {found:?}, expected {expected:?}")]
    Schema { found: String, expected: String },
    #[error("trace was produced from config {trace_hash}, but the supplied config hashes to {config_hash}")]
    ConfigMismatch {
        trace_hash: String,
        config_hash: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A configured cap was reached in a place where continuing would be wrong.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cap `{cap}` exceeded at stage {stage}: {detail}")]
pub struct CapError {
    pub cap: &'static str,
    pub stage: u64,
    pub detail: String,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Kc(#[from] KcError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Cap(#[from] CapError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
