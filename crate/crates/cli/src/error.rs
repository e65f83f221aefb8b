use std::fmt;

use gaussot::Error;

/// Failures, each tied to a stable exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input, bad flags, unwritable output.
    Input(String),
    /// The computation itself failed.
    Numerical(String),
    /// `verify` ran and at least one check failed.
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ChecksFailed(_) => 1,
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::ChecksFailed(n) => write!(f, "{n} verification check(s) failed"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) | Error::UnsupportedDimension { .. } => CliError::Input(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}
