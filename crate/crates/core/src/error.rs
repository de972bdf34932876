use thiserror::Error;

/// Errors raised by the spectral toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed input: wrong lengths, violated index constraints, bad parameters.
    #[error("invalid input: {0}")]
    Input(String),
    /// The operation is not defined on this argument (e.g. `∂x⁻¹` of a field with nonzero mean).
    #[error("domain error: {0}")]
    Domain(String),
    /// Solver or sweep configuration outside its admissible range.
    #[error("configuration error: {0}")]
    Config(String),
    /// The time integrator produced non-finite values.
    #[error("blow-up detected after t = {last_good_time}")]
    BlowUp { last_good_time: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
