use comdml_core::Error as CoreError;
use thiserror::Error;

/// Exit status for configuration problems (parse, validation, bad flags).
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for failures while running an experiment.
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("config parse error: {0}")]
    Parse(String),

    #[error("invalid config: {field}: {constraint}")]
    Validation { field: String, constraint: String },

    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Parse(_) | Self::Validation { .. } => EXIT_CONFIG,
            Self::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Config(msg) => Self::Validation {
                field: "config".into(),
                constraint: msg,
            },
            other => Self::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Runtime(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Runtime(format!("csv error: {e}"))
    }
}
