//! Physical constants and closed-form building blocks: the cavity/atom
//! parameter bundle, derived loss quantities (escape probability, partial and
//! net quality factors, linewidth), Poisson photon statistics of the coherent
//! drive, the detuned single-photon Rabi kernel, cavity energy decay, and the
//! Lorentzian line shape of the leaking field.

use crate::error::{Error, Result};

/// Benchmark constants: a 51.099 GHz superconducting cavity (open-sided
/// Fabry-Perot geometry, mirror radius 25 mm, gap 27 mm) probed by a
/// circular-Rydberg two-level atom with a Purcell-enhanced spontaneous
/// emission rate of 0.473053 MHz.
pub mod reference {
    /// Cavity resonance = atomic Bohr angular frequency (rad/s).
    pub const OMEGA0: f64 = 2.0 * std::f64::consts::PI * 51.099e9;
    /// Bare mode quality factor.
    pub const Q_BARE: f64 = 7.0e7;
    /// Mirror radius (m).
    pub const MIRROR_RADIUS: f64 = 25.0e-3;
    /// Mirror gap (m).
    pub const MIRROR_GAP: f64 = 27.0e-3;
    /// Spontaneous-emission (Einstein A) rate (1/s).
    pub const EINSTEIN_A: f64 = 0.473053e6;
}

/// Cavity-plus-atom constants. Construct with [`ResonantSystem::new`], which
/// checks the domain, or [`ResonantSystem::reference`] for the benchmark set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonantSystem {
    /// Cavity resonance = atomic Bohr angular frequency ω₀ (rad/s).
    pub omega0: f64,
    /// Bare cavity mode quality factor Q.
    pub q_bare: f64,
    /// Mirror radius r (m).
    pub mirror_radius: f64,
    /// Mirror gap h (m).
    pub mirror_gap: f64,
    /// Spontaneous-emission (Einstein A) rate A(0) of the upper level (1/s).
    /// Zero is allowed and switches the spontaneous-loss channel off.
    pub einstein_a: f64,
}

impl ResonantSystem {
    pub fn new(
        omega0: f64,
        q_bare: f64,
        mirror_radius: f64,
        mirror_gap: f64,
        einstein_a: f64,
    ) -> Result<Self> {
        require_positive("omega0", omega0)?;
        require_positive("q_bare", q_bare)?;
        require_positive("mirror_radius", mirror_radius)?;
        require_positive("mirror_gap", mirror_gap)?;
        if !(einstein_a >= 0.0 && einstein_a.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "einstein_a must be finite and >= 0, got {einstein_a}"
            )));
        }
        Ok(Self { omega0, q_bare, mirror_radius, mirror_gap, einstein_a })
    }

    pub fn reference() -> Self {
        Self {
            omega0: reference::OMEGA0,
            q_bare: reference::Q_BARE,
            mirror_radius: reference::MIRROR_RADIUS,
            mirror_gap: reference::MIRROR_GAP,
            einstein_a: reference::EINSTEIN_A,
        }
    }
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be finite and > 0, got {v}")))
    }
}

/// Loss quantities derived from a [`ResonantSystem`] by
/// [`net_quality_factor`]: the geometric escape probability, the quality
/// factor assigned to spontaneous emission through the open surface, their
/// harmonic combination, and the resulting linewidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossModel {
    /// Escape probability p₀ = 1/(1 + r/h) through the open curved surface.
    pub p0: f64,
    /// Quality factor of the spontaneous-emission channel, Q₃ = ω₀/(p₀A(0)).
    /// Infinite when the channel is switched off (A(0) = 0).
    pub q3: f64,
    /// Net quality factor Q′ with 1/Q′ = 1/Q + 1/Q₃.
    pub q_net: f64,
    /// Lorentzian linewidth Γ = ω₀/Q′ (rad/s).
    pub gamma: f64,
}

/// Probability that a photon spontaneously emitted between the mirrors leaves
/// through the open curved side rather than being recaptured: 1/(1 + r/h).
pub fn escape_probability(r: f64, h: f64) -> Result<f64> {
    require_positive("mirror radius", r)?;
    require_positive("mirror gap", h)?;
    Ok(1.0 / (1.0 + r / h))
}

/// Combine the bare cavity Q with the open-surface spontaneous-emission
/// channel: Q₃ = ω₀/(p₀A(0)) and 1/Q′ = 1/Q + 1/Q₃, so the stored energy
/// decays through both paths with linewidth Γ = ω₀/Q′.
pub fn net_quality_factor(sys: &ResonantSystem) -> LossModel {
    let p0 = 1.0 / (1.0 + sys.mirror_radius / sys.mirror_gap);
    let loss_rate = p0 * sys.einstein_a;
    let (q3, q_net) = if loss_rate == 0.0 {
        // No spontaneous channel: the bare Q survives unchanged.
        (f64::INFINITY, sys.q_bare)
    } else {
        (sys.omega0 / loss_rate, 1.0 / (1.0 / sys.q_bare + loss_rate / sys.omega0))
    };
    LossModel { p0, q3, q_net, gamma: sys.omega0 / q_net }
}

/// Poisson photon-number weights of a coherent drive with mean n̄, truncated
/// once the stored mass reaches 1 − tail_tol (but never below n = 20 so the
/// few-photon regime is always fully covered).
#[derive(Debug, Clone, PartialEq)]
pub struct DriveField {
    nbar: f64,
    weights: Vec<f64>,
}

impl DriveField {
    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    /// Largest stored photon number.
    pub fn n_max(&self) -> usize {
        self.weights.len() - 1
    }

    /// Weights indexed by photon number, `weights()[n]` = p_n.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights.iter().copied().enumerate()
    }
}

/// Truncated Poisson weights p_n = n̄ⁿe^{−n̄}/n! for n = 0..=n_max, where n_max
/// is the smallest index ≥ 20 at which the cumulative mass reaches 1 − tail_tol.
pub fn poisson_weights(nbar: f64, tail_tol: f64) -> Result<DriveField> {
    poisson_weights_with_floor(nbar, tail_tol, 20)
}

/// Same as [`poisson_weights`] with an explicit truncation floor; used to
/// probe the series for truncation insensitivity.
pub fn poisson_weights_with_floor(nbar: f64, tail_tol: f64, floor: usize) -> Result<DriveField> {
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(Error::InvalidInput(format!("nbar must be finite and >= 0, got {nbar}")));
    }
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(Error::InvalidInput(format!("tail_tol must lie in (0, 1), got {tail_tol}")));
    }
    // Beyond n̄ ≈ 700, e^{−n̄} underflows and the recurrence would start from a
    // subnormal seed with almost no significant bits.
    if nbar > 700.0 {
        return Err(Error::InvalidInput(format!(
            "nbar = {nbar} too large: e^(-nbar) underflows the weight recurrence"
        )));
    }
    let mut weights = Vec::with_capacity(floor + 1);
    let mut p = (-nbar).exp();
    let mut cumulative = 0.0;
    let mut n = 0usize;
    loop {
        weights.push(p);
        cumulative += p;
        if n >= floor && cumulative >= 1.0 - tail_tol {
            break;
        }
        // The mass of an untruncated Poisson sums to 1, so for tail_tol above
        // roundoff this terminates; the guard catches tolerances so tight that
        // accumulated rounding can never reach them.
        if n >= floor && p == 0.0 {
            return Err(Error::InvalidInput(format!(
                "tail_tol = {tail_tol} unreachable: weights underflowed at n = {n} \
                 with cumulative mass {cumulative}"
            )));
        }
        n += 1;
        p *= nbar / n as f64;
    }
    Ok(DriveField { nbar, weights })
}

/// Transition probability of a two-level atom exchanging one excitation with
/// an n-photon field at detuning ω − ω₀:
/// 4g²(n+1)·sin²(√((ω−ω₀)² + 4g²(n+1))·t/2) / ((ω−ω₀)² + 4g²(n+1)).
pub fn single_photon_transition(g: f64, omega: f64, omega0: f64, n: usize, t: f64) -> f64 {
    let strength = 4.0 * g * g * (n as f64 + 1.0);
    let rabi_sq = (omega - omega0).powi(2) + strength;
    strength / rabi_sq * ((rabi_sq.sqrt() * t / 2.0).sin()).powi(2)
}

/// Energy stored in the cavity mode after time t: w₀·exp(−ω₀t/Q).
pub fn energy_decay(w0: f64, sys: &ResonantSystem, t: f64) -> f64 {
    w0 * (-sys.omega0 * t / sys.q_bare).exp()
}

/// Lorentzian spectral density of the field leaking from the cavity:
/// e₀²/((ω−ω₀)² + ω₀²/(4Q²)). Its FWHM is ω₀/Q, see [`spectrum_fwhm`].
pub fn field_spectrum(omega: f64, sys: &ResonantSystem, e0: f64) -> f64 {
    let half_width = sys.omega0 / (2.0 * sys.q_bare);
    e0 * e0 / ((omega - sys.omega0).powi(2) + half_width * half_width)
}

/// Analytic full width at half maximum of [`field_spectrum`]: ω₀/Q.
pub fn spectrum_fwhm(sys: &ResonantSystem) -> f64 {
    sys.omega0 / sys.q_bare
}

/// Renormalized coupling constant g′ with the Rabi frequencies it implies:
/// ω_n = 2√(n+1)·g′ for an n-photon field and Ω_R = 2√(n̄+1)·g′ for the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    g_prime: f64,
    nbar: f64,
    omega_rabi: f64,
}

impl Calibration {
    pub fn new(g_prime: f64, nbar: f64) -> Result<Self> {
        require_positive("g_prime", g_prime)?;
        if !(nbar >= 0.0 && nbar.is_finite()) {
            return Err(Error::InvalidInput(format!("nbar must be finite and >= 0, got {nbar}")));
        }
        Ok(Self { g_prime, nbar, omega_rabi: 2.0 * (nbar + 1.0).sqrt() * g_prime })
    }

    pub fn g_prime(&self) -> f64 {
        self.g_prime
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    /// n-photon Rabi frequency ω_n = 2√(n+1)·g′ (rad/s).
    pub fn omega_n(&self, n: usize) -> f64 {
        2.0 * (n as f64 + 1.0).sqrt() * self.g_prime
    }

    /// Mean-field Rabi frequency Ω_R = 2√(n̄+1)·g′ (rad/s).
    pub fn omega_rabi(&self) -> f64 {
        self.omega_rabi
    }
}
