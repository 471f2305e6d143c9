use pidspace_core::Error as CoreError;

/// Failures of the command line and service, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    /// Invalid configuration, schema violation or bad input values.
    #[error("config: {0}")]
    Config(String),
    /// Numerical failure (root finding, degenerate polynomial).
    #[error("numerics: {0}")]
    Numerics(String),
    /// A precondition of the requested operation does not hold.
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("io: {0}")]
    Io(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 2,
            AppError::Numerics(_) => 3,
            AppError::Precondition(_) => 4,
            AppError::Io(_) => 1,
        }
    }
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::RootsNotConverged { .. }
            | CoreError::NoRoots
            | CoreError::PoleOnUnitCircle { .. }
            | CoreError::DegenerateCharPoly => AppError::Numerics(msg),
            CoreError::Unstable(_) => AppError::Precondition(msg),
            _ => AppError::Config(msg),
        }
    }
}

impl From<serde_json::Error> for AppError {
    fn from(e: serde_json::Error) -> Self {
        AppError::Config(e.to_string())
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e.to_string())
    }
}

impl From<csv::Error> for AppError {
    fn from(e: csv::Error) -> Self {
        AppError::Io(e.to_string())
    }
}

pub type AppResult<T> = Result<T, AppError>;
