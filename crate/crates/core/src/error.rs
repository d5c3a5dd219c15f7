use thiserror::Error;

/// Errors raised by path algebra, simulation, integration and solving.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Exact interval integration needs a piecewise-constant density.
    #[error("unsupported density: exact integration requires a constant or piecewise-constant density")]
    UnsupportedDensity,

    /// Vector dimensions or matrix shapes disagree.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Integrand is not anchored at the left endpoint of its constancy cells.
    #[error("predictability violation: {0}")]
    PredictabilityViolation(String),

    /// The requested combination of integrand and driver has no implementation.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A configuration value (mode name, parameter) is not recognised.
    #[error("configuration error: {0}")]
    Config(String),

    /// The mild solver produced a non-finite state.
    #[error("divergence: non-finite state in cell {cell}")]
    Divergence { cell: usize },

    /// Picard iteration did not reach the tolerance.
    #[error("fixed point not reached after {} iterations (last residual {:?})", residuals.len(), residuals.last())]
    FixedPointFailure { residuals: Vec<f64> },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
