use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RtaError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integration produced a non-finite {component} (step {dt} s)")]
    Integration { component: &'static str, dt: f64 },

    #[error("invalid configuration at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("no safe initial condition after {attempts} attempts; most often binding constraint: {binding}")]
    Sampling { attempts: usize, binding: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error on {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl RtaError {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        RtaError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RtaError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, RtaError>;
