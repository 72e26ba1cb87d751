use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("model error: {0}")]
    Model(#[from] sslr_core::Error),

    #[error("golden check failed:\n  {}", .0.join("\n  "))]
    Golden(Vec<String>),

    #[error("output error: {0}")]
    Io(String),

    #[error("plot error: {0}")]
    Plot(String),
}

impl CliError {
    pub(crate) fn config_model(e: sslr_core::Error) -> Self {
        CliError::Config(e.to_string())
    }

    pub(crate) fn io(e: impl std::fmt::Display) -> Self {
        CliError::Io(e.to_string())
    }

    /// Process exit status.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Model(_) | CliError::Io(_) | CliError::Plot(_) => 2,
            CliError::Golden(_) => 3,
        }
    }
}
