use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type. Variants that indicate a truncation or capacity
/// problem (as opposed to bad input) are grouped by [`Error::is_truncation`]
/// so the CLI can map them to a dedicated exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("basis would have {requested} states, exceeding the capacity limit of {limit}")]
    CapacityExceeded { requested: u128, limit: usize },

    #[error("mode index {mode} out of range for a basis with {mode_count} modes")]
    ModeOutOfRange { mode: usize, mode_count: usize },

    #[error("mode weights must be strictly positive, got {value} at index {index}")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("operator is not Hermitian: max |A - A^H| = {deviation:.3e}")]
    NotHermitian { deviation: f64 },

    #[error("operands live on different bases")]
    BasisMismatch,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("eigensolver failed: {0}")]
    EigenFailure(String),

    #[error("numerical check failed: {0}")]
    NumericalCheck(String),

    #[error("truncated state tail {tail:.3e} exceeds the hard limit {limit:.1e}")]
    TruncationTail { tail: f64, limit: f64 },

    #[error(
        "LO displacement infeasible at this cutoff: max |beta|^2 = {beta_sq:.3} > N_max/4 = {budget:.3}"
    )]
    CutoffInfeasible { beta_sq: f64, budget: f64 },

    #[error("LO modes are not in vacuum: excited probability mass {mass:.3e} exceeds 1e-10")]
    LoModesNotVacuum { mass: f64 },

    #[error("invalid state spec: {0}")]
    InvalidStateSpec(String),

    #[error("invalid quadrature spec: {0}")]
    InvalidQuadratureSpec(String),

    #[error("LO amplitudes are undefined at delta = 0 (the ideal limit has no LO)")]
    DeltaZeroNoLo,

    #[error("evaluation grid must be strictly increasing")]
    GridNotIncreasing,

    #[error("scenario validation: {0}")]
    ScenarioValidation(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by the finite Fock cutoff rather than by
    /// invalid input.
    pub fn is_truncation(&self) -> bool {
        matches!(
            self,
            Error::CapacityExceeded { .. }
                | Error::TruncationTail { .. }
                | Error::CutoffInfeasible { .. }
        )
    }
}
