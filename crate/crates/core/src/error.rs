use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state has zero norm (norm = {0:e})")]
    ZeroState(f64),
    #[error("Fock cutoff {cutoff} too small: {reason}")]
    CutoffTooSmall { cutoff: usize, reason: String },
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),
    #[error("outcome {0} is not a grid point")]
    OffGrid(f64),
    #[error("measurement outcome has probability {0:e}")]
    ZeroProbability(f64),
    #[error("potential is singular at separation {0:e}")]
    SingularPotential(f64),
    #[error("time step {dt:e} too large for maximum rate {rate:e} (dt*rate must be <= 0.05)")]
    StepTooLarge { dt: f64, rate: f64 },
    #[error("positivity lost at t = {time}: smallest eigenvalue {eigenvalue:e}")]
    PositivityLost { time: f64, eigenvalue: f64 },
    #[error("ensemble needs at least two records, got {0}")]
    EmptyEnsemble(usize),
    #[error("coherence vanished (|<sigma_->| = {0:e})")]
    CoherenceVanished(f64),
    #[error("{name} must be positive, got {value}")]
    NonPositiveInput { name: &'static str, value: f64 },
    #[error("exclusion map needs at least one curve")]
    EmptyCurveSet,
    #[error("invalid label: {0}")]
    BadLabel(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("boundary violation: {0}")]
    Boundary(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("benchmark data: {0}")]
    Benchmark(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveInput { name, value })
    }
}
