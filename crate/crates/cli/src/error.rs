use std::fmt;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config keys or parameter values. Exit status 2.
    Config(String),
    /// Unreadable or malformed input data. Exit status 3.
    Input(String),
    /// Failure writing results. Exit status 1.
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Input(_) => ExitCode::from(3),
            CliError::Output(_) => ExitCode::from(1),
        }
    }

    /// Classifies a library error raised while reading or generating input.
    pub fn from_input(err: gridbet::Error) -> Self {
        match err {
            gridbet::Error::Domain(_) | gridbet::Error::Capacity { .. } => CliError::Config(err.to_string()),
            _ => CliError::Input(err.to_string()),
        }
    }

    pub fn output(err: impl fmt::Display) -> Self {
        CliError::Output(err.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Output(m) => write!(f, "output error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}
