use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Library(#[from] rkhs_purity::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "invalid_config",
            CliError::Io(_) => "io",
            CliError::Library(e) => e.kind(),
        }
    }

    pub fn to_object(&self) -> ErrorObject {
        ErrorObject { kind: self.kind().to_string(), message: self.to_string() }
    }
}

/// Machine-readable error attached to reports with exit code 2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorObject {
    pub kind: String,
    pub message: String,
}
