use std::fmt;

use serde_json::json;
use spherewidth_core::Error as CoreError;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable input or parameters outside a precondition.
    Config(String),
    /// A computation failed on valid input.
    Numerical(CoreError),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    /// Diagnostic object written to stderr.
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            CliError::Config(msg) => json!({ "error": "invalid_config", "message": msg }),
            CliError::Io(e) => json!({ "error": "io", "message": e.to_string() }),
            CliError::Numerical(e) => json!({
                "error": "numerical_failure",
                "kind": numerical_kind(e),
                "message": e.to_string(),
            }),
        }
    }
}

fn numerical_kind(e: &CoreError) -> &'static str {
    match e {
        CoreError::Domain(_) => "domain",
        CoreError::Overflow(_) => "overflow",
        CoreError::NotPositiveDefinite { .. } => "not_positive_definite",
        CoreError::Range { .. } => "range",
        CoreError::Dimension { .. } => "dimension",
        CoreError::Quadrature { .. } => "quadrature",
        CoreError::Eigensolver(_) => "eigensolver",
        CoreError::Degenerate(_) => "degenerate",
        CoreError::NonFinite(_) => "non_finite",
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Domain(msg) => CliError::Config(msg),
            CoreError::Range { .. } | CoreError::Dimension { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Numerical(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Config(format!("CSV: {e}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "invalid configuration: {msg}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;
