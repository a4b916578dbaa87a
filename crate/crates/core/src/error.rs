use thiserror::Error;

/// Errors raised by field algebra, grid operators and solvers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("operation requires a {expected} law, got {got}")]
    WrongFamily { expected: &'static str, got: String },

    #[error("boost speed {speed} is not below c = {c}")]
    SuperluminalBoost { speed: f64, c: f64 },

    #[error("invalid constants: {0}")]
    InvalidConstants(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("expression error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("need at least {needed} time samples, got {got}")]
    TooFewTimeSamples { needed: usize, got: usize },

    #[error("incomplete history: missing {0}")]
    IncompleteHistory(&'static str),

    #[error("boost velocity component {axis} is not on the momentum lattice (n = {ratio})")]
    NonPeriodicPhase { axis: usize, ratio: f64 },

    #[error("current density is not solenoidal: max |div j| = {0:e}")]
    NonSolenoidalCurrent(f64),

    #[error("current density has nonzero mean {0:?}; no periodic magnetic field exists")]
    NonZeroMeanCurrent([f64; 3]),

    #[error("charge density has nonzero mean {0:e}")]
    NonNeutralCharge(f64),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
        best: Option<Box<crate::discrete::VectorField>>,
    },

    #[error("linearization is singular: damping exhausted at residual {0:e}")]
    SingularLinearization(f64),

    #[error("norm drifted to {0}")]
    NormDrift(f64),

    #[error("wavefunction blew up: max |psi| = {0:e}")]
    BlowUp(f64),

    #[error("bad parameters: {0}")]
    BadParams(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
