use paneitz_core::error::LabError;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    SpecSyntax(String),

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("invalid arguments: {0}")]
    InvalidArgs(String),

    #[error("{0}")]
    Io(String),

    #[error(transparent)]
    Lab(#[from] LabError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lab(LabError::SolverFailure { .. }) => EXIT_SOLVER,
            _ => EXIT_INVALID,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
