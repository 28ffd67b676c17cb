use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or configuration; exit code 2.
    #[error("configuration error: {0}")]
    Config(String),
    /// A module of the simulator rejected the request or failed.
    #[error("{module}: {source}")]
    Physics { module: &'static str, source: pushgate_core::Error },
    /// A check or verification criterion failed.
    #[error("check failed: {0}")]
    Check(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Physics { source: pushgate_core::Error::Input(_), .. } => 2,
            _ => 1,
        }
    }
}

/// Tag a core error with the module it came from.
pub fn tag(module: &'static str) -> impl Fn(pushgate_core::Error) -> CliError {
    move |source| CliError::Physics { module, source }
}
