use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Missing, malformed or invalid scenario file.
    #[error("config error: {0}")]
    Config(String),

    /// Bad command-line input other than the config, e.g. a data file.
    #[error("input error: {0}")]
    Input(String),

    #[error(transparent)]
    Numerical(#[from] cavqed_core::Error),

    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Numerical(_) | CliError::Output(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
