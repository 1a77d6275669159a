use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A component's weighted data cannot support a parameter update.
    #[error("degenerate component: {0}")]
    Degenerate(String),

    #[error("all {restarts} restarts failed for k = {k}: {last}")]
    AllRestartsFailed { k: usize, restarts: usize, last: String },

    #[error("every order in 1..={k_max} failed to fit")]
    NoOrderFitted { k_max: usize },

    #[error("unknown scenario `{name}` (available: {})", available.join(", "))]
    UnknownScenario { name: String, available: Vec<String> },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(#[from] toml::de::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True when the failure is numerical rather than a problem with the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Degenerate(_) | Error::AllRestartsFailed { .. } | Error::NoOrderFitted { .. }
        )
    }
}
