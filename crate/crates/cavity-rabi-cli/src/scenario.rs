//! Scenario files: one simulation run described as flat `key = value` text
//! (`#` starts a comment). Every physical constant defaults to the benchmark
//! cavity, so a minimal scenario is just a `name` line; unknown or repeated
//! keys are rejected with their line number.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use cavity_rabi::ResonantSystem;

use crate::CliError;

/// One fully specified run: the physical system, the drive, the time grid,
/// the tolerances, and an optional experimental overlay to compare against.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Run name; becomes the output-file stem, so it is restricted to
    /// `[A-Za-z0-9._-]`.
    pub name: String,
    /// Cavity resonance ω₀ (rad/s).
    pub omega0_rad_s: f64,
    /// Bare cavity quality factor.
    pub q_bare: f64,
    /// Mirror radius (m).
    pub r_m: f64,
    /// Mirror gap (m).
    pub h_m: f64,
    /// Spontaneous-emission rate A(0) (1/s).
    pub a0_per_s: f64,
    /// Mean photon number of the coherent drive.
    pub nbar: f64,
    /// Time grid start (µs).
    pub t_start_us: f64,
    /// Time grid end (µs).
    pub t_end_us: f64,
    /// Number of uniform grid points.
    pub n_points: usize,
    /// Relative tolerance handed to the per-term quadrature.
    pub rel_tol: f64,
    /// Poisson truncation tolerance of the drive weights.
    pub tail_tol: f64,
    /// Optional overlay CSV (`t_us,p`) of measured points.
    pub overlay: Option<PathBuf>,
}

impl Scenario {
    /// Benchmark defaults: the 51.099 GHz cavity driven at n̄ = 0.85, sampled
    /// on 0–100 µs with 1001 points.
    pub fn defaults(name: &str) -> Self {
        Self {
            name: name.to_string(),
            omega0_rad_s: cavity_rabi::model::reference::OMEGA0,
            q_bare: cavity_rabi::model::reference::Q_BARE,
            r_m: cavity_rabi::model::reference::MIRROR_RADIUS,
            h_m: cavity_rabi::model::reference::MIRROR_GAP,
            a0_per_s: cavity_rabi::model::reference::EINSTEIN_A,
            nbar: 0.85,
            t_start_us: 0.0,
            t_end_us: 100.0,
            n_points: 1001,
            rel_tol: 1e-9,
            tail_tol: 1e-10,
            overlay: None,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.name.is_empty() {
            return Err(CliError::Validation("name must not be empty".into()));
        }
        if !self.name.chars().all(|c| c.is_ascii_alphanumeric() || "._-".contains(c)) {
            return Err(CliError::Validation(format!(
                "name '{}' may only use letters, digits, '.', '_' and '-' \
                 (it becomes the output file stem)",
                self.name
            )));
        }
        for (key, v) in [
            ("omega0_rad_s", self.omega0_rad_s),
            ("q_bare", self.q_bare),
            ("r_m", self.r_m),
            ("h_m", self.h_m),
            ("a0_per_s", self.a0_per_s),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Validation(format!(
                    "{key} must be finite and > 0, got {v}"
                )));
            }
        }
        if !(self.nbar >= 0.0 && self.nbar.is_finite()) {
            return Err(CliError::Validation(format!(
                "nbar must be finite and >= 0, got {}",
                self.nbar
            )));
        }
        if !(self.t_start_us >= 0.0 && self.t_start_us.is_finite() && self.t_end_us.is_finite()) {
            return Err(CliError::Validation(format!(
                "time grid must be finite with t_start_us >= 0, got [{}, {}]",
                self.t_start_us, self.t_end_us
            )));
        }
        if self.n_points == 0 {
            return Err(CliError::Validation("n_points must be at least 1".into()));
        }
        if self.n_points > 1 && self.t_end_us <= self.t_start_us {
            return Err(CliError::Validation(format!(
                "t_end_us must exceed t_start_us for a multi-point grid, got [{}, {}]",
                self.t_start_us, self.t_end_us
            )));
        }
        for (key, tol) in [("rel_tol", self.rel_tol), ("tail_tol", self.tail_tol)] {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(CliError::Validation(format!(
                    "{key} must lie in (0, 1), got {tol}"
                )));
            }
        }
        Ok(())
    }

    pub fn system(&self) -> Result<ResonantSystem, CliError> {
        Ok(ResonantSystem::new(self.omega0_rad_s, self.q_bare, self.r_m, self.h_m, self.a0_per_s)?)
    }

    /// Uniform grid in µs; a single-point grid sits at `t_start_us`. The
    /// interpolation used for overlays relies on this being increasing.
    pub fn time_grid_us(&self) -> Vec<f64> {
        if self.n_points == 1 {
            return vec![self.t_start_us];
        }
        let span = self.t_end_us - self.t_start_us;
        (0..self.n_points)
            .map(|i| self.t_start_us + span * i as f64 / (self.n_points - 1) as f64)
            .collect()
    }

    /// The scenario as config text; `load` of this text reproduces the
    /// scenario exactly (f64 values print in shortest round-trip form).
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "name = {}", self.name);
        let _ = writeln!(out, "omega0_rad_s = {}", self.omega0_rad_s);
        let _ = writeln!(out, "q_bare = {}", self.q_bare);
        let _ = writeln!(out, "r_m = {}", self.r_m);
        let _ = writeln!(out, "h_m = {}", self.h_m);
        let _ = writeln!(out, "a0_per_s = {}", self.a0_per_s);
        let _ = writeln!(out, "nbar = {}", self.nbar);
        let _ = writeln!(out, "t_start_us = {}", self.t_start_us);
        let _ = writeln!(out, "t_end_us = {}", self.t_end_us);
        let _ = writeln!(out, "n_points = {}", self.n_points);
        let _ = writeln!(out, "rel_tol = {}", self.rel_tol);
        let _ = writeln!(out, "tail_tol = {}", self.tail_tol);
        if let Some(overlay) = &self.overlay {
            let _ = writeln!(out, "overlay = {}", overlay.display());
        }
        out
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Validation(format!("cannot read config {}: {e}", path.display()))
    })?;
    parse_scenario(&text)
        .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))
}

/// Parse config text into a validated [`Scenario`]. Errors carry the 1-based
/// line number and offending key.
pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let mut scenario = Scenario::defaults("");
    let mut seen: HashSet<&str> = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Validation(format!(
                "line {line_no}: expected 'key = value', got '{line}'"
            )));
        };
        let key = key.trim();
        let value = value.trim();
        const KEYS: [&str; 13] = [
            "name", "omega0_rad_s", "q_bare", "r_m", "h_m", "a0_per_s", "nbar", "t_start_us",
            "t_end_us", "n_points", "rel_tol", "tail_tol", "overlay",
        ];
        let Some(&key) = KEYS.iter().find(|k| **k == key) else {
            return Err(CliError::Validation(format!("line {line_no}: unknown key '{key}'")));
        };
        if !seen.insert(key) {
            return Err(CliError::Validation(format!("line {line_no}: duplicate key '{key}'")));
        }

        let parse_f64 = |v: &str| -> Result<f64, CliError> {
            v.parse::<f64>().map_err(|_| {
                CliError::Validation(format!("line {line_no}: key '{key}': '{v}' is not a number"))
            })
        };
        match key {
            "name" => scenario.name = value.to_string(),
            "omega0_rad_s" => scenario.omega0_rad_s = parse_f64(value)?,
            "q_bare" => scenario.q_bare = parse_f64(value)?,
            "r_m" => scenario.r_m = parse_f64(value)?,
            "h_m" => scenario.h_m = parse_f64(value)?,
            "a0_per_s" => scenario.a0_per_s = parse_f64(value)?,
            "nbar" => scenario.nbar = parse_f64(value)?,
            "t_start_us" => scenario.t_start_us = parse_f64(value)?,
            "t_end_us" => scenario.t_end_us = parse_f64(value)?,
            "rel_tol" => scenario.rel_tol = parse_f64(value)?,
            "tail_tol" => scenario.tail_tol = parse_f64(value)?,
            "n_points" => {
                scenario.n_points = value.parse::<usize>().map_err(|_| {
                    CliError::Validation(format!(
                        "line {line_no}: key 'n_points': '{value}' is not a positive integer"
                    ))
                })?;
            }
            "overlay" => scenario.overlay = Some(PathBuf::from(value)),
            _ => unreachable!("key came from KEYS above"),
        }
    }

    if !seen.contains("name") {
        return Err(CliError::Validation("missing required key 'name'".into()));
    }
    scenario.validate()?;
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_validation(result: Result<Scenario, CliError>, needle: &str) {
        match result {
            Err(CliError::Validation(msg)) => {
                assert!(msg.contains(needle), "message '{msg}' lacks '{needle}'");
            }
            other => panic!("expected validation error containing '{needle}', got {other:?}"),
        }
    }

    #[test]
    fn name_only_config_gets_benchmark_defaults() {
        let s = parse_scenario("name = weak_field\n").unwrap();
        assert_eq!(s, Scenario::defaults("weak_field"));
        assert_eq!(s.q_bare, 7e7);
        assert_eq!(s.r_m, 25e-3);
        assert_eq!(s.h_m, 27e-3);
        assert_eq!(s.a0_per_s, 0.473053e6);
        assert_eq!(s.omega0_rad_s, 2.0 * std::f64::consts::PI * 51.099e9);
        assert_eq!(s.nbar, 0.85);
        assert_eq!(s.n_points, 1001);
    }

    #[test]
    fn comments_blanks_and_spacing_are_tolerated() {
        let text = "\n# benchmark scenario\n  name=strong_field  \n\n   nbar =  1.77\n# done\n";
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.name, "strong_field");
        assert_eq!(s.nbar, 1.77);
    }

    #[test]
    fn round_trips_through_config_text() {
        let mut s = Scenario::defaults("weak_field");
        assert_eq!(parse_scenario(&s.to_config_string()).unwrap(), s);
        s.nbar = 1.77;
        s.n_points = 13;
        s.t_start_us = 0.3;
        s.t_end_us = 87.5;
        s.overlay = Some(PathBuf::from("data/strong_field_circles.csv"));
        assert_eq!(parse_scenario(&s.to_config_string()).unwrap(), s);
    }

    #[test]
    fn rejects_unknown_duplicate_and_malformed_lines() {
        assert_validation(parse_scenario("name = a\nq_factor = 3\n"), "line 2: unknown key");
        assert_validation(parse_scenario("name = a\nnbar = 1\nnbar = 2\n"), "line 3: duplicate");
        assert_validation(parse_scenario("name = a\njust words\n"), "line 2: expected");
        assert_validation(parse_scenario("name = a\nnbar = fast\n"), "not a number");
        assert_validation(parse_scenario("name = a\nn_points = 2.5\n"), "positive integer");
        assert_validation(parse_scenario("nbar = 1\n"), "missing required key 'name'");
    }

    #[test]
    fn rejects_invalid_domains() {
        assert_validation(parse_scenario("name = a\nq_bare = -7e7\n"), "q_bare");
        assert_validation(parse_scenario("name = a\nq_bare = 0\n"), "q_bare");
        assert_validation(parse_scenario("name = a\nnbar = -0.5\n"), "nbar");
        assert_validation(parse_scenario("name = a\nn_points = 0\n"), "n_points");
        assert_validation(
            parse_scenario("name = a\nt_start_us = 5\nt_end_us = 5\n"),
            "t_end_us",
        );
        assert_validation(parse_scenario("name = a\nrel_tol = 0\n"), "rel_tol");
        assert_validation(parse_scenario("name = a\ntail_tol = 1\n"), "tail_tol");
        assert_validation(parse_scenario("name = bad/name\n"), "letters, digits");
        assert_validation(parse_scenario("name = a\nt_start_us = -1\n"), "t_start_us");
    }

    #[test]
    fn grids() {
        let mut s = Scenario::defaults("a");
        s.n_points = 5;
        s.t_start_us = 0.0;
        s.t_end_us = 100.0;
        assert_eq!(s.time_grid_us(), vec![0.0, 25.0, 50.0, 75.0, 100.0]);

        s.n_points = 1;
        s.t_start_us = 3.5;
        assert_eq!(s.time_grid_us(), vec![3.5]);

        // endpoints land exactly on the configured bounds
        s.n_points = 7;
        s.t_start_us = 0.3;
        s.t_end_us = 87.5;
        let g = s.time_grid_us();
        assert_eq!(g[0], 0.3);
        assert_eq!(g[6], 87.5);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn single_point_grid_allows_equal_bounds() {
        let s = parse_scenario("name = a\nn_points = 1\nt_start_us = 0\nt_end_us = 0\n").unwrap();
        assert_eq!(s.time_grid_us(), vec![0.0]);
    }
}
