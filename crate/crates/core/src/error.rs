use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("grid is not strictly increasing at node {index}")]
    NonMonotoneGrid { index: usize },

    #[error("region of interest contains no grid nodes")]
    EmptyRegionOfInterest,

    #[error("log grid needs {required} points per direction, above the cap {cap}")]
    LogGridTooLarge { required: usize, cap: usize },

    #[error("singular matrix: zero pivot at row {row}")]
    SingularMatrix { row: usize },

    #[error("series not converged after {cap} terms")]
    SeriesNotConverged { cap: usize },

    #[error("{scheme} needs the previous iterate V^(n-2)")]
    MissingHistory { scheme: &'static str },

    #[error("query point ({s1}, {s2}) lies outside the computational domain")]
    OutOfDomain { s1: f64, s2: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by the numerics rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularMatrix { .. }
                | Error::SeriesNotConverged { .. }
                | Error::LogGridTooLarge { .. }
                | Error::NonMonotoneGrid { .. }
        )
    }
}
