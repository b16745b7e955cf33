use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParams { name: &'static str, reason: String },

    #[error("dressed basis undefined: the c-a and c-b couplings must not both vanish")]
    DegenerateCoupling,

    #[error("dark-state analytics need phi_L in {{0, pi}}, got {0}")]
    UnsupportedPhase(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("superoperator side {side} exceeds the cap of {cap}")]
    CapExceeded { side: usize, cap: usize },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("stable integration needs dt = {required:e} us, below the 1e-9 us floor")]
    StepSizeUnderflow { required: f64 },

    #[error("steady state is not unique: {null_dim} singular values below threshold")]
    NonUniqueSteadyState { null_dim: usize },

    #[error("no convergence to a steady state within {t_max} us")]
    NoConvergence { t_max: f64 },

    #[error("kappa = 0 steady state depends on the initial state; an initial state is required")]
    InitialStateRequired,

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("curves are sampled on different grids")]
    GridMismatch,

    #[error("invalid mixture: {0}")]
    InvalidMixture(String),

    #[error("expected two separated peaks, found {found}")]
    PeaksNotFound { found: usize },

    #[error("ambiguous peaks: third maximum {third} is within 5% of second {second}")]
    AmbiguousPeaks { second: f64, third: f64 },

    #[error("purity undefined when both populations are zero")]
    Undefined,
}
