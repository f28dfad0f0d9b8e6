use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("circulant embedding has negative eigenvalue {value:e} at index {index}")]
    NegativeEigenvalue { index: usize, value: f64 },

    #[error("empty interval [{0}, {1}]")]
    EmptyInterval(usize, usize),

    #[error("interval [{start}, {end}] is not inside a grid of {steps} steps")]
    OffGrid { start: usize, end: usize, steps: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error(
        "threshold chi = {chi} is below the single-step control value {value:e} on step [{step}, {next}]; refine the grid",
        next = step + 1
    )]
    ThresholdTooSmall { step: usize, value: f64, chi: f64 },

    #[error("basis mismatch between operands")]
    BasisMismatch,

    #[error("pointwise map returned a non-finite value at collocation point {0}")]
    NonFinite(usize),

    #[error("interval of {0} steps is not dyadic")]
    NotDyadic(usize),

    #[error("requested {levels} dyadic levels but the interval only resolves {available}")]
    InsufficientResolution { levels: usize, available: usize },

    #[error(
        "Picard iteration did not contract on steps [{start}, {end}] after {iterations} iterations (last difference {difference:e})"
    )]
    NonContraction {
        start: usize,
        end: usize,
        iterations: usize,
        difference: f64,
    },

    #[error("solution norm {norm:e} exceeded the ceiling {ceiling:e} at step {step}")]
    BlowUp { step: usize, norm: f64, ceiling: f64 },

    #[error("assumption violated: {}", .0.join("; "))]
    Assumption(Vec<String>),

    #[error("mode collapse in window {window}: |R[{mode},{mode}]| = {value:e}; reduce the mode count")]
    ModeCollapse { window: usize, mode: usize, value: f64 },

    #[error("the estimated spectrum has no negative exponent")]
    NoNegativeExponents,

    #[error("{0} replicates requested; at least 100 are required")]
    TooFewReplicates(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by the configuration rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::NotPowerOfTwo(_)
                | Error::Assumption(_)
                | Error::TooFewReplicates(_)
                | Error::Parse(_)
                | Error::OffGrid { .. }
                | Error::GridMismatch(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
