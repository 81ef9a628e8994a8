use three_halves_core::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const NUMERIC: i32 = 3;
    pub const CONSTRAINT: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    /// An engine error tagged with the module that raised it.
    #[error("{module}: {source}")]
    Engine { module: &'static str, source: Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => exit::CONFIG,
            CliError::Engine { source, .. } => match source {
                Error::InvalidArgument(_)
                | Error::Inadmissible(_)
                | Error::Domain { .. }
                | Error::Contour(_)
                | Error::DeltaRegime { .. } => exit::CONSTRAINT,
                _ => exit::NUMERIC,
            },
        }
    }
}

/// Tags engine errors with their module.
pub trait Context<T> {
    fn in_module(self, module: &'static str) -> Result<T, CliError>;
}

impl<T> Context<T> for Result<T, Error> {
    fn in_module(self, module: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Engine { module, source })
    }
}
