//! Plumbing for the `cavity-rabi` binary: scenario files, calibration and
//! file emission, and the built-in acceptance self-test. It lives in a
//! library so the integration tests drive exactly the code paths the binary
//! uses.

pub mod report;
pub mod scenario;
pub mod selftest;

use std::fmt;

/// Top-level failure classification, mapped one-to-one onto exit codes:
/// bad input exits 1, a numerical breakdown exits 2.
#[derive(Debug)]
pub enum CliError {
    /// Unusable flags, config file, overlay data, or parameter domain.
    Validation(String),
    /// Calibration or quadrature failure on valid input.
    Numerical(cavity_rabi::Error),
    /// One or more self-test checks did not pass.
    SelftestFailed { failed: usize },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) | CliError::SelftestFailed { .. } => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "{msg}"),
            CliError::Numerical(e) => write!(f, "{e}"),
            CliError::SelftestFailed { failed } => {
                write!(f, "self-test failed: {failed} check(s) did not pass")
            }
        }
    }
}

impl std::error::Error for CliError {}

impl From<cavity_rabi::Error> for CliError {
    fn from(e: cavity_rabi::Error) -> Self {
        match e {
            // Domain violations are input problems; everything else means the
            // numerics gave up on input that passed validation.
            cavity_rabi::Error::InvalidInput(msg) => CliError::Validation(msg),
            other => CliError::Numerical(other),
        }
    }
}
