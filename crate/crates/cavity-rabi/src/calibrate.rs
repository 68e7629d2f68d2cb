//! Calibration of the renormalized coupling constant g′ from the physical
//! normalization P₂→₁(t→∞) = 1/2: in the long-time limit each term of the
//! photon-number series has the closed form handled by
//! [`crate::quad::rabi_line_integral_longtime`], so the condition collapses to
//! a scalar root-find in g. The collapse/revival time estimators derived from
//! the same coupling live here too.

use crate::error::{Error, Result};
use crate::model::{Calibration, DriveField, LossModel, ResonantSystem};

/// Inputs and solver knobs for the coupling calibration.
#[derive(Debug, Clone, Copy)]
pub struct CalibrationProblem<'a> {
    pub system: &'a ResonantSystem,
    pub loss: &'a LossModel,
    pub drive: &'a DriveField,
    /// Initial root bracket in rad/s; expanded by decades if the sign change
    /// lies outside. The physical root for the benchmark constants sits near
    /// 1.5e5 rad/s, but rescaled systems may land elsewhere.
    pub bracket: (f64, f64),
    /// Relative width of the final bracket.
    pub rel_tol: f64,
}

impl<'a> CalibrationProblem<'a> {
    pub fn new(system: &'a ResonantSystem, loss: &'a LossModel, drive: &'a DriveField) -> Self {
        Self { system, loss, drive, bracket: (1e3, 1e7), rel_tol: 1e-10 }
    }
}

/// Long-time transition probability as a function of the coupling g:
/// Σ_n A(0)·Γ·p_n / (2g·(4g + Γ/√(n+1))). Strictly decreasing in g, diverging
/// as g → 0 and vanishing as g → ∞, so P(∞) = 1/2 has exactly one root.
pub fn longtime_probability(
    g: f64,
    system: &ResonantSystem,
    loss: &LossModel,
    drive: &DriveField,
) -> f64 {
    let mut sum = 0.0;
    for (n, p_n) in drive.iter() {
        let sqrt_n1 = (n as f64 + 1.0).sqrt();
        sum += system.einstein_a * loss.gamma * p_n
            / (2.0 * g * (4.0 * g + loss.gamma / sqrt_n1));
    }
    sum
}

/// Solve longtime_probability(g) = 1/2 for g′ by bracketed bisection with
/// interleaved secant (false-position) steps; the bracket is never abandoned,
/// so the proven monotonicity guarantees convergence.
pub fn solve_coupling(problem: &CalibrationProblem) -> Result<Calibration> {
    let (mut lo, mut hi) = problem.bracket;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidInput(format!("invalid bracket ({lo:e}, {hi:e})")));
    }
    if !(problem.rel_tol > 0.0 && problem.rel_tol < 1.0) {
        return Err(Error::InvalidInput(format!(
            "rel_tol must lie in (0, 1), got {}",
            problem.rel_tol
        )));
    }
    let h = |g: f64| longtime_probability(g, problem.system, problem.loss, problem.drive) - 0.5;

    // Expand by decades until the bracket straddles the sign change: h > 0 on
    // the low end (probability above 1/2) and h < 0 on the high end.
    let mut h_lo = h(lo);
    let mut h_hi = h(hi);
    for _ in 0..40 {
        if h_lo > 0.0 {
            break;
        }
        lo /= 10.0;
        h_lo = h(lo);
    }
    for _ in 0..40 {
        if h_hi < 0.0 {
            break;
        }
        hi *= 10.0;
        h_hi = h(hi);
    }
    if !(h_lo > 0.0 && h_hi < 0.0) {
        return Err(Error::BracketFailure { g_lo: lo, g_hi: hi, f_lo: h_lo, f_hi: h_hi });
    }

    for iteration in 0..500 {
        if hi - lo <= problem.rel_tol * hi {
            break;
        }
        // False-position candidate on even iterations, bisection on odd ones;
        // the alternation stops one-sided stalling on convex stretches.
        let mut mid = if iteration % 2 == 0 {
            (lo * h_hi - hi * h_lo) / (h_hi - h_lo)
        } else {
            0.5 * (lo + hi)
        };
        if !(mid > lo && mid < hi) || !mid.is_finite() {
            mid = 0.5 * (lo + hi);
        }
        if mid <= lo || mid >= hi {
            break; // bracket at floating-point resolution
        }
        let h_mid = h(mid);
        if h_mid > 0.0 {
            lo = mid;
            h_lo = h_mid;
        } else if h_mid < 0.0 {
            hi = mid;
            h_hi = h_mid;
        } else {
            lo = mid;
            hi = mid;
            break;
        }
    }

    Calibration::new(0.5 * (lo + hi), problem.drive.nbar())
}

/// Collapse time of the Rabi oscillation envelope: the n̄±√n̄ photon-number
/// components dephase by π when
/// t_c = π / (2g′·[√(n̄+√n̄+1) − √(n̄−√n̄+1)]).
/// Evaluated in the rationalized form t_c = π·(√(n̄+√n̄+1)+√(n̄−√n̄+1))/(4g′√n̄),
/// which is the same expression without the subtractive cancellation. A
/// single-photon-number drive (n̄ = 0) never dephases: returns +∞.
pub fn collapse_time(g_prime: f64, nbar: f64) -> f64 {
    if nbar == 0.0 {
        return f64::INFINITY;
    }
    let dn = nbar.sqrt();
    let a = (nbar + dn + 1.0).sqrt();
    let b = (nbar - dn + 1.0).sqrt();
    std::f64::consts::PI * (a + b) / (4.0 * g_prime * dn)
}

/// Revival time: adjacent photon-number components return to phase when
/// t_r = 2π / (2g′·[√(n̄+2) − √(n̄+1)]), evaluated as
/// π·(√(n̄+2)+√(n̄+1))/g′ to avoid the subtractive cancellation at large n̄.
pub fn revival_time(g_prime: f64, nbar: f64) -> f64 {
    std::f64::consts::PI * ((nbar + 2.0).sqrt() + (nbar + 1.0).sqrt()) / g_prime
}
