use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation received an argument outside its domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Bracket expansion for the coupling solve exhausted its schedule without
    /// finding a sign change of f(g) - 1/2.
    #[error(
        "no sign change of f(g) - 1/2 on [{g_lo:e}, {g_hi:e}] rad/s \
         (endpoint values {f_lo:e} and {f_hi:e})"
    )]
    BracketFailure { g_lo: f64, g_hi: f64, f_lo: f64, f_hi: f64 },

    /// Adaptive quadrature hit its panel budget before the error bound fell
    /// under the requested tolerance. Carries the best estimate so callers can
    /// decide whether it is still usable.
    #[error(
        "quadrature stalled: estimate {estimate:e} with error bound {error_bound:e} \
         exceeds target {target:e} after {panels} panels"
    )]
    QuadratureStalled { estimate: f64, error_bound: f64, target: f64, panels: usize },

    /// A sweep failed at a specific grid time; wraps the underlying failure.
    #[error("at t = {t:e} s: {source}")]
    AtTime { t: f64, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Attach the grid time at which a pointwise evaluation failed.
    pub fn at_time(self, t: f64) -> Error {
        Error::AtTime { t, source: Box::new(self) }
    }
}
