use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("synthesis error: {0}")]
    Synthesis(tcq_core::Error),

    #[error("integration error: {0}")]
    Integration(String),

    #[error(transparent)]
    Core(#[from] tcq_core::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(tcq_core::Error::Config(_) | tcq_core::Error::InvalidParameter { .. }) => 2,
            CliError::Synthesis(_) => 3,
            CliError::Integration(_) => 4,
            _ => 1,
        }
    }
}

/// Errors raised while checking inputs, before any file is written.
pub fn invalid(e: tcq_core::Error) -> CliError {
    CliError::Config(e.to_string())
}
