//! Collapse and revival of quantum Rabi oscillations for a two-level atom
//! exchanging a photon with a lossy resonant cavity.
//!
//! The cavity line has a finite width Γ = ω₀/Q′, so the atom couples to a
//! Lorentzian continuum of modes rather than one sharp oscillator. The upper
//! level's transition probability becomes a photon-number series
//!
//!   P(t) = A(0)·Σₙ (4/π)·(n+1)·pₙ·Iₙ(t),
//!
//! with pₙ the Poisson weights of the injected coherent field and Iₙ a damped
//! line integral over the broadened n-photon Rabi line at ωₙ = 2√(n+1)·g′.
//! Beats between the incommensurate ωₙ collapse the oscillation; their partial
//! rephasing revives it; the linewidth damps every revival.
//!
//! The crate splits into:
//!
//! * [`model`] — closed-form pieces: system constants, loss chain
//!   (escape probability → partial and net quality factors → linewidth),
//!   Poisson drive statistics, detuned Rabi kernel, Lorentzian line shape;
//! * [`quad`] — the adaptive Gauss-Kronrod evaluation of Iₙ(t) with rigorous
//!   truncation and oscillation-remainder bounds;
//! * [`calibrate`] — fixing g′ from the long-time normalization P(∞) = 1/2,
//!   plus collapse/revival time estimates;
//! * [`dynamics`] — the multi-mode curve, its lossless single-mode
//!   counterpart, and grid sweeps bundling both with their calibration.

pub mod calibrate;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod quad;

pub use calibrate::{
    collapse_time, longtime_probability, revival_time, solve_coupling, CalibrationProblem,
};
pub use dynamics::{
    sweep, transition_probability_multimode, transition_probability_singlemode, SweepMetadata,
    TimeSeries,
};
pub use error::{Error, Result};
pub use model::{
    escape_probability, net_quality_factor, poisson_weights, poisson_weights_with_floor,
    Calibration, DriveField, LossModel, ResonantSystem,
};
pub use quad::{rabi_line_integral, rabi_line_integral_longtime, IntegralEstimate, LineIntegralSpec};
