use bihar_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] Error),
    #[error("output error: {0}")]
    Io(String),
}

impl CliError {
    /// 2 for anything the user can fix in the config, 3 for failures raised
    /// while evaluating a valid configuration.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Core(e) => match e {
                Error::Config(_) | Error::Unsupported(_) | Error::Capability(_) | Error::UnsupportedOrder { .. } => 2,
                Error::Domain(_) | Error::Numeric(_) | Error::Geometry(_) => 3,
            },
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
