use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("malformed input: {0}")]
    Parse(String),

    #[error("io: {0}")]
    Io(String),

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The report has already been written; only the exit code remains.
    #[error("property violation in {0}")]
    Violation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Inconsistent(_) => 3,
            CliError::Infeasible(_) => 4,
            CliError::Violation(_) => 5,
        }
    }
}

impl From<dirinfo_core::Error> for CliError {
    fn from(e: dirinfo_core::Error) -> Self {
        match e {
            dirinfo_core::Error::InfeasibleConstraint { .. } => CliError::Infeasible(e.to_string()),
            other => CliError::Parse(other.to_string()),
        }
    }
}
