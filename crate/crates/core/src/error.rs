use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{n_sites} sites requested but the matrix-size limit is {max_sites} sites (dimension 2^{max_sites})")]
    TooManySites { n_sites: usize, max_sites: usize },

    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("site {site} out of range for a chain of {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square with a power-of-two dimension ({rows}x{cols})")]
    BadShape { rows: usize, cols: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("not a density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("quadrature did not reach tolerance {requested:e} (achieved error estimate {achieved:e})")]
    QuadratureNonConvergence { achieved: f64, requested: f64 },

    #[error("tail estimate {tail:e} for t_max = {t_max} exceeds tolerance {tol:e}; increase t_max")]
    TailTooLarge { tail: f64, tol: f64, t_max: f64 },

    #[error("step {step} too large: step * max rate = {product:.4} exceeds {limit}")]
    StepTooLarge { step: f64, product: f64, limit: f64 },

    #[error("negative time {0}: the dephasing semigroup is only defined for t >= 0")]
    NegativeTime(f64),

    #[error("diagonal pair ({0}, {0}) does not decohere")]
    DiagonalPair(usize),

    #[error("distance {distance:e} still above tolerance at the horizon t = {horizon}")]
    HorizonExceeded { horizon: f64, distance: f64 },

    #[error("distance {distance:e} exceeds the slowest-mode envelope {bound:e} at t = {t}")]
    EnvelopeViolated { t: f64, distance: f64, bound: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNonConvergence { .. }
                | Error::TailTooLarge { .. }
                | Error::HorizonExceeded { .. }
                | Error::EnvelopeViolated { .. }
        )
    }
}
