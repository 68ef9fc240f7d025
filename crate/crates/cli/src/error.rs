use std::fmt;

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or invalid input files. Exit code 1.
    Input(String),
    /// A computed identity or tolerance check failed. Exit code 2.
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Verification(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Verification(m) => write!(f, "verification failure: {m}"),
        }
    }
}

impl From<szego::Error> for CliError {
    fn from(e: szego::Error) -> Self {
        use szego::Error::*;
        match e {
            InvalidProfile(_) | InvalidHamiltonian(_) | InvalidArgument(_) | Parse(_) | NotPsd { .. } | DefectMismatch(_) => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Verification(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
