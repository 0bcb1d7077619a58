use beats_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("backends disagree: max deviation {0:e} exceeds 1e-2")]
    Disagreement(f64),

    #[error("{0} check(s) failed")]
    Selftest(usize),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Disagreement(_) | CliError::Selftest(_) => 4,
            CliError::Io { .. } => 5,
            CliError::Core(e) => match e {
                CoreError::CountMismatch { .. }
                | CoreError::NonConvergence { .. }
                | CoreError::BoundaryPole { .. }
                | CoreError::IncompleteExpansion => 2,
                CoreError::DegeneratePole { .. } => 3,
                CoreError::NormViolation { .. } | CoreError::InsufficientHistory { .. } => 4,
                CoreError::Io(_) => 5,
                _ => 1,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
