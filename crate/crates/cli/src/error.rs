use thiserror::Error;

/// Exit status for configuration problems.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for solver failures.
pub const EXIT_SOLVER: i32 = 3;
/// Exit status when enantiodetection cannot identify its peaks.
pub const EXIT_DETECTION: i32 = 4;
/// Exit status for I/O and other failures.
pub const EXIT_OTHER: i32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("solver error: {0}")]
    Solver(esp_core::Error),

    #[error("detection failed: {0}")]
    Detection(esp_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Solver(_) => EXIT_SOLVER,
            CliError::Detection(_) => EXIT_DETECTION,
            CliError::Io(_) | CliError::Output(_) => EXIT_OTHER,
        }
    }
}

impl From<esp_core::Error> for CliError {
    fn from(e: esp_core::Error) -> Self {
        use esp_core::Error as E;
        match e {
            E::InvalidParams { .. }
            | E::DegenerateCoupling
            | E::UnsupportedPhase(_)
            | E::InvalidSweep(_)
            | E::InvalidMixture(_) => CliError::Config(e.to_string()),
            E::PeaksNotFound { .. } | E::AmbiguousPeaks { .. } | E::Undefined | E::GridMismatch => {
                CliError::Detection(e)
            }
            _ => CliError::Solver(e),
        }
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
