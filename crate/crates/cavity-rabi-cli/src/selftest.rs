//! The built-in acceptance run: ten end-to-end checks against the benchmark
//! constants, each reported as one pass/fail line. They cover the loss chain,
//! both calibrations, the collapse/revival estimates, randomized oracle
//! comparisons for the long-time limit and the adaptive quadrature, the
//! long-time normalization of the full curve, collapse/revival morphology,
//! model divergence, the spectral width, and byte-level determinism of the
//! emitted report files.

use std::path::Path;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cavity_rabi::model::{field_spectrum, reference, spectrum_fwhm};
use cavity_rabi::quad::{self, LineIntegralSpec};
use cavity_rabi::{
    collapse_time, longtime_probability, net_quality_factor, revival_time, sweep, ResonantSystem,
    TimeSeries,
};

use crate::report::{calibrate_scenario, CalibratedScenario};
use crate::scenario::Scenario;
use crate::CliError;

/// Outcome of one acceptance check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckReport {
    CheckReport { name, passed, detail }
}

/// A check that errors out (quadrature stall, spawn failure, …) counts as a
/// failure of that check, not of the harness.
fn guard(name: &'static str, r: Result<CheckReport, CliError>) -> CheckReport {
    r.unwrap_or_else(|e| check(name, false, format!("errored: {e}")))
}

/// Run all ten checks. `bin` is the simulator binary itself, re-invoked by
/// the determinism check; everything else runs in-process.
pub fn run_acceptance(bin: &Path) -> Result<Vec<CheckReport>, CliError> {
    let weak_field = Scenario::defaults("weak_field");
    let mut strong_field = Scenario::defaults("strong_field");
    strong_field.nbar = 1.77;
    let cal_a = calibrate_scenario(&weak_field)?;
    let cal_b = calibrate_scenario(&strong_field)?;

    Ok(vec![
        quality_factor_chain(),
        calibration_roots(&cal_a, &cal_b),
        collapse_revival_times(&cal_a, &cal_b),
        guard("long-time limit, two routes", longtime_two_routes(&cal_a)),
        guard("adaptive quadrature vs dense trapezoid", quadrature_oracle()),
        guard("long-time window mean", longtime_window_mean(&[(&weak_field, &cal_a), (&strong_field, &cal_b)])),
        guard("collapse/revival morphology", morphology(&strong_field, &cal_b)),
        guard(
            "single-mode vs multi-mode divergence",
            divergence(&[(&weak_field, &cal_a), (&strong_field, &cal_b)]),
        ),
        spectrum_width(),
        guard("report determinism", determinism(bin)),
    ])
}

fn quality_factor_chain() -> CheckReport {
    let loss = net_quality_factor(&ResonantSystem::reference());
    let rel = (loss.q_net / 1.28318e6 - 1.0).abs();
    check(
        "quality factor chain",
        rel < 1e-4,
        format!("Q' = {:.5e} vs 1.28318e6 (rel dev {rel:.1e}, tol 1e-4)", loss.q_net),
    )
}

fn calibration_roots(cal_a: &CalibratedScenario, cal_b: &CalibratedScenario) -> CheckReport {
    let two_pi = 2.0 * std::f64::consts::PI;
    let cases = [
        ("g' @ nbar=0.85", cal_a.calibration.g_prime(), 149084.0),
        ("g' @ nbar=1.77", cal_b.calibration.g_prime(), 152852.0),
        ("Omega_R @ nbar=0.85", cal_a.calibration.omega_rabi(), two_pi * 64.5457e3),
        ("Omega_R @ nbar=1.77", cal_b.calibration.omega_rabi(), two_pi * 80.9769e3),
    ];
    let mut worst: (f64, &str) = (0.0, "");
    for (label, got, want) in cases {
        let rel = (got / want - 1.0).abs();
        if rel > worst.0 {
            worst = (rel, label);
        }
    }
    check(
        "calibration roots",
        worst.0 < 2e-3,
        format!(
            "g' = {:.5e} / {:.5e} rad/s; worst rel dev {:.1e} ({}) vs tol 2e-3",
            cal_a.calibration.g_prime(),
            cal_b.calibration.g_prime(),
            worst.0,
            worst.1
        ),
    )
}

fn collapse_revival_times(cal_a: &CalibratedScenario, cal_b: &CalibratedScenario) -> CheckReport {
    let windows_us = [
        ("t_c @ nbar=0.85", collapse_time(cal_a.calibration.g_prime(), 0.85) * 1e6, 14.5, 15.5),
        ("t_r @ nbar=0.85", revival_time(cal_a.calibration.g_prime(), 0.85) * 1e6, 63.0, 65.0),
        ("t_c @ nbar=1.77", collapse_time(cal_b.calibration.g_prime(), 1.77) * 1e6, 12.0, 13.0),
        ("t_r @ nbar=1.77", revival_time(cal_b.calibration.g_prime(), 1.77) * 1e6, 73.0, 75.0),
    ];
    let mut passed = true;
    let mut detail = String::new();
    for (label, value, lo, hi) in windows_us {
        let ok = value >= lo && value <= hi;
        passed &= ok;
        if !detail.is_empty() {
            detail.push_str(", ");
        }
        detail.push_str(&format!("{label} = {value:.3} us (window [{lo}, {hi}])"));
    }
    check("collapse and revival times", passed, detail)
}

fn longtime_two_routes(cal: &CalibratedScenario) -> Result<CheckReport, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let g = 10f64.powf(rng.random_range(4.0..6.0));
        let direct = longtime_probability(g, &cal.system, &cal.loss, &cal.drive);
        let mut series = 0.0;
        for (n, p_n) in cal.drive.iter() {
            let omega_n = 2.0 * (n as f64 + 1.0).sqrt() * g;
            series += cal.system.einstein_a
                * (4.0 / std::f64::consts::PI)
                * (n as f64 + 1.0)
                * p_n
                * quad::rabi_line_integral_longtime(omega_n, cal.loss.gamma);
        }
        worst = worst.max((direct / series - 1.0).abs());
    }
    Ok(check(
        "long-time limit, two routes",
        worst <= 1e-10,
        format!("20 random couplings, worst rel dev {worst:.1e} vs tol 1e-10"),
    ))
}

fn quadrature_oracle() -> Result<CheckReport, CliError> {
    // Random lines with the truncation point pulled in (via abs_tol) so a
    // 10⁶-point uniform trapezoid on the identical interval resolves the
    // integrand fully.
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let w = 10f64.powf(rng.random_range(4.0..6.5));
        let g = w * 10f64.powf(rng.random_range(-0.5..0.5));
        let scale = w.max(g / 2.0);
        let t_scaled = rng.random_range(0.5..4.0);
        let t = t_scaled / scale;
        let x_max = (40.0 / t_scaled) * scale;
        let abs_tol = g * g / (1.2 * x_max * x_max * x_max);
        let spec = LineIntegralSpec::with_tolerances(t, w, g, 1e-9, abs_tol)?;
        let est = quad::rabi_line_integral(&spec)?;

        let hi = spec.truncation_point();
        let n = 1_000_000usize;
        let h = hi / n as f64;
        let mut s = 0.5
            * (quad::substituted_integrand(0.0, &spec) + quad::substituted_integrand(hi, &spec));
        for i in 1..n {
            s += quad::substituted_integrand(i as f64 * h, &spec);
        }
        let oracle = s * h;
        worst = worst.max((est.value / oracle - 1.0).abs());
    }
    Ok(check(
        "adaptive quadrature vs dense trapezoid",
        worst <= 1e-8,
        format!("20 random lines, worst rel dev {worst:.1e} vs tol 1e-8"),
    ))
}

/// Uniform window of both curves, in µs.
fn window(
    cal: &CalibratedScenario,
    rel_tol: f64,
    t0_us: f64,
    t1_us: f64,
    n: usize,
) -> Result<TimeSeries, CliError> {
    let grid_s: Vec<f64> = (0..n)
        .map(|i| (t0_us + (t1_us - t0_us) * i as f64 / (n - 1) as f64) * 1e-6)
        .collect();
    Ok(sweep(&grid_s, &cal.system, &cal.loss, &cal.drive, &cal.calibration, rel_tol)?)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn amplitude(v: &[f64]) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &x in v {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    hi - lo
}

fn longtime_window_mean(
    scenarios: &[(&Scenario, &CalibratedScenario)],
) -> Result<CheckReport, CliError> {
    let mut passed = true;
    let mut detail = String::new();
    for (scenario, cal) in scenarios {
        let series = window(cal, scenario.rel_tol, 400.0, 500.0, 101)?;
        let m = mean(&series.p_multimode);
        passed &= (m - 0.5).abs() <= 0.01;
        if !detail.is_empty() {
            detail.push_str(", ");
        }
        detail.push_str(&format!("nbar={}: mean[400,500]us = {m:.4}", scenario.nbar));
    }
    detail.push_str(" (want 0.50 +- 0.01)");
    Ok(check("long-time window mean", passed, detail))
}

fn morphology(scenario: &Scenario, cal: &CalibratedScenario) -> Result<CheckReport, CliError> {
    let g = cal.calibration.g_prime();
    let tc_us = collapse_time(g, scenario.nbar) * 1e6;
    let tr_us = revival_time(g, scenario.nbar) * 1e6;
    let early = amplitude(&window(cal, scenario.rel_tol, 0.0, 10.0, 101)?.p_multimode);
    let collapsed = amplitude(&window(cal, scenario.rel_tol, tc_us, tc_us + 10.0, 101)?.p_multimode);
    let revived =
        amplitude(&window(cal, scenario.rel_tol, tr_us - 10.0, tr_us + 10.0, 201)?.p_multimode);
    Ok(check(
        "collapse/revival morphology",
        collapsed < early && collapsed < revived,
        format!(
            "nbar={}: amplitude early {early:.3} -> collapsed {collapsed:.3} -> revived {revived:.3}",
            scenario.nbar
        ),
    ))
}

fn divergence(scenarios: &[(&Scenario, &CalibratedScenario)]) -> Result<CheckReport, CliError> {
    let mut passed = true;
    let mut detail = String::new();
    for (scenario, cal) in scenarios {
        let gap = |series: &TimeSeries| {
            let diffs: Vec<f64> = series
                .p_multimode
                .iter()
                .zip(&series.p_singlemode)
                .map(|(m, s)| (m - s).abs())
                .collect();
            mean(&diffs)
        };
        let early = gap(&window(cal, scenario.rel_tol, 0.0, 10.0, 101)?);
        let late = gap(&window(cal, scenario.rel_tol, 50.0, 90.0, 201)?);
        passed &= early < late;
        if !detail.is_empty() {
            detail.push_str(", ");
        }
        detail.push_str(&format!(
            "nbar={}: mean|dP| {early:.4} on [0,10]us vs {late:.4} on [50,90]us",
            scenario.nbar
        ));
    }
    Ok(check("single-mode vs multi-mode divergence", passed, detail))
}

/// Bisect the half-maximum crossings of the Lorentzian spectrum on both sides
/// of the peak; the measured separation must match the analytic ω₀/Q.
fn measured_fwhm(sys: &ResonantSystem) -> f64 {
    let half = field_spectrum(sys.omega0, sys, 1.0) / 2.0;
    let width_guess = sys.omega0 / sys.q_bare;
    let crossing = |sign: f64| {
        let mut lo = sys.omega0;
        let mut hi = sys.omega0 + sign * 2.0 * width_guess;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if field_spectrum(mid, sys, 1.0) > half {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    crossing(1.0) - crossing(-1.0)
}

fn spectrum_width() -> CheckReport {
    // The 1e-9 target needs crossings that are not pinned to the ulp grid of
    // ω₀; at the benchmark Q = 7e7 the half-width is only ~2.3e3 rad/s against
    // ulp(ω₀) ≈ 6.1e-5, an f64 conditioning floor of ~3e-8 relative no matter
    // the search algorithm. The width property is therefore certified across
    // moderate Q and the benchmark Q is reported at its floor.
    let sys_at = |q: f64| {
        ResonantSystem::new(
            reference::OMEGA0,
            q,
            reference::MIRROR_RADIUS,
            reference::MIRROR_GAP,
            reference::EINSTEIN_A,
        )
        .expect("benchmark constants are valid")
    };
    let mut worst = 0.0f64;
    for q in [1e3, 1e4, 1e5] {
        let sys = sys_at(q);
        worst = worst.max((measured_fwhm(&sys) / spectrum_fwhm(&sys) - 1.0).abs());
    }
    let bench = sys_at(reference::Q_BARE);
    let bench_rel = (measured_fwhm(&bench) / spectrum_fwhm(&bench) - 1.0).abs();
    check(
        "spectrum FWHM",
        worst < 1e-9 && bench_rel < 1e-7,
        format!(
            "worst rel dev {worst:.1e} over Q in {{1e3,1e4,1e5}} (tol 1e-9); \
             Q=7e7 at {bench_rel:.1e} (f64 floor ~3e-8)"
        ),
    )
}

fn determinism(bin: &Path) -> Result<CheckReport, CliError> {
    let dir = tempfile::tempdir()
        .map_err(|e| CliError::Validation(format!("cannot create temp dir: {e}")))?;
    let mut scenario = Scenario::defaults("determinism");
    scenario.n_points = 201;
    let config = dir.path().join("determinism.cfg");
    std::fs::write(&config, scenario.to_config_string())
        .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", config.display())))?;

    for run in ["run1", "run2"] {
        let out = Command::new(bin)
            .arg("--verb")
            .arg("report")
            .arg("--config")
            .arg(&config)
            .arg("--out-dir")
            .arg(dir.path().join(run))
            .output()
            .map_err(|e| CliError::Validation(format!("cannot spawn {}: {e}", bin.display())))?;
        if !out.status.success() {
            return Ok(check(
                "report determinism",
                false,
                format!(
                    "report run exited with {}: {}",
                    out.status,
                    String::from_utf8_lossy(&out.stderr).trim()
                ),
            ));
        }
    }

    let read = |run: &str, file: &str| -> Result<Vec<u8>, CliError> {
        let path = dir.path().join(run).join(file);
        std::fs::read(&path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))
    };
    let mut identical = true;
    let mut sizes = String::new();
    for file in ["determinism.curve.csv", "determinism.summary.txt"] {
        let a = read("run1", file)?;
        let b = read("run2", file)?;
        identical &= a == b;
        if !sizes.is_empty() {
            sizes.push_str(", ");
        }
        sizes.push_str(&format!("{file}: {} bytes", a.len()));
    }
    Ok(check(
        "report determinism",
        identical,
        format!(
            "two report runs {}({sizes})",
            if identical { "byte-identical " } else { "DIFFER " }
        ),
    ))
}
