use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("empty collection: {0}")]
    EmptyCollection(&'static str),

    #[error("field variant has no analytic negative gradient ray")]
    UnsupportedField,

    #[error("invalid weight {value} at index {index}")]
    InvalidWeight { index: usize, value: f64 },

    #[error("weights sum to {sum}, not 1 within 1e-9")]
    NotNormalized { sum: f64 },

    #[error("measure has empty support")]
    EmptyMeasure,

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("push-forward map produced a non-finite coordinate at atom {0}")]
    MapRange(usize),

    #[error("transport simplex exceeded {0} iterations")]
    SolverStalled(usize),

    #[error("instance too large for exhaustive enumeration ({n}x{m})")]
    InstanceTooLarge { n: usize, m: usize },

    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),

    #[error("sphere sampling at radius {radius} produced no certified candidate")]
    SphereSamplingFailed { radius: f64 },

    #[error("sequence element {index} lies within {sigma} of the base measure")]
    SequenceTooClose { index: usize, sigma: f64 },

    #[error("no usable pairs: every pair is at distance <= 1e-10")]
    NoUsablePairs,

    #[error("descent stalled at step {step} (best gap {best_gap})")]
    DescentStalled { step: usize, best_gap: f64 },

    #[error("ray {index} failed its calibration probe: {reason}")]
    InvalidRay { index: usize, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
