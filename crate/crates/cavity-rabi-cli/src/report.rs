//! Turning a scenario into artifacts: calibrate the coupling, sweep the time
//! grid, and emit the curve CSV, the six-significant-digit summary, and (when
//! an overlay of measured points is configured) a model-minus-data residual
//! table. All files are plain text with `{}`-formatted doubles, so repeated
//! runs are byte-identical.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use cavity_rabi::{
    collapse_time, longtime_probability, net_quality_factor, poisson_weights, revival_time,
    solve_coupling, sweep, Calibration, CalibrationProblem, DriveField, LossModel, ResonantSystem,
    TimeSeries,
};

use crate::scenario::Scenario;
use crate::CliError;

/// Everything the calibration stage produces for one scenario.
#[derive(Debug, Clone)]
pub struct CalibratedScenario {
    pub system: ResonantSystem,
    pub loss: LossModel,
    pub drive: DriveField,
    pub calibration: Calibration,
    /// |P(∞) − 1/2| at the returned coupling.
    pub residual: f64,
}

pub fn calibrate_scenario(scenario: &Scenario) -> Result<CalibratedScenario, CliError> {
    let system = scenario.system()?;
    let loss = net_quality_factor(&system);
    let drive = poisson_weights(scenario.nbar, scenario.tail_tol)?;
    let calibration = solve_coupling(&CalibrationProblem::new(&system, &loss, &drive))?;
    let residual =
        (longtime_probability(calibration.g_prime(), &system, &loss, &drive) - 0.5).abs();
    Ok(CalibratedScenario { system, loss, drive, calibration, residual })
}

/// The summary block: one `key: value` line per derived quantity, six
/// significant digits. Shared by the summary file and the `calibrate` verb.
pub fn summary_text(scenario: &Scenario, cal: &CalibratedScenario) -> String {
    let g = cal.calibration.g_prime();
    let nbar = cal.calibration.nbar();
    let mut out = String::new();
    let _ = writeln!(out, "scenario: {}", scenario.name);
    let _ = writeln!(out, "nbar: {:.5e}", nbar);
    let _ = writeln!(out, "g_prime_rad_s: {:.5e}", g);
    let _ = writeln!(out, "omega_rabi_rad_s: {:.5e}", cal.calibration.omega_rabi());
    let _ = writeln!(
        out,
        "omega_rabi_hz: {:.5e}",
        cal.calibration.omega_rabi() / (2.0 * std::f64::consts::PI)
    );
    let _ = writeln!(out, "q_net: {:.5e}", cal.loss.q_net);
    let _ = writeln!(out, "gamma_rad_s: {:.5e}", cal.loss.gamma);
    let _ = writeln!(out, "t_collapse_us: {:.5e}", collapse_time(g, nbar) * 1e6);
    let _ = writeln!(out, "t_revival_us: {:.5e}", revival_time(g, nbar) * 1e6);
    let _ = writeln!(out, "longtime_residual: {:.5e}", cal.residual);
    let _ = writeln!(out, "n_max: {}", cal.drive.n_max());
    out
}

/// Curve CSV: times in µs, both probabilities in shortest round-trip decimal.
pub fn curve_text(grid_us: &[f64], series: &TimeSeries) -> String {
    let mut out = String::from("t_us,p_multimode,p_singlemode\n");
    for (i, t_us) in grid_us.iter().enumerate() {
        let _ = writeln!(out, "{},{},{}", t_us, series.p_multimode[i], series.p_singlemode[i]);
    }
    out
}

/// Measured overlay points: times in µs with transition probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlayData {
    pub times_us: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn load_overlay(path: &Path) -> Result<OverlayData, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Validation(format!("cannot read overlay {}: {e}", path.display()))
    })?;
    parse_overlay(&text)
        .map_err(|e| CliError::Validation(format!("overlay {}: {e}", path.display())))
}

fn parse_overlay(text: &str) -> Result<OverlayData, CliError> {
    let mut lines = text.lines().enumerate();
    let header = lines.next().map(|(_, l)| l.trim()).unwrap_or("");
    if header != "t_us,p" {
        return Err(CliError::Validation(format!(
            "expected header 't_us,p', got '{header}'"
        )));
    }
    let mut data = OverlayData { times_us: Vec::new(), values: Vec::new() };
    for (idx, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let Some((t, p)) = line.split_once(',') else {
            return Err(CliError::Validation(format!(
                "line {line_no}: expected 't,p', got '{line}'"
            )));
        };
        let parse = |v: &str| -> Result<f64, CliError> {
            let x: f64 = v.trim().parse().map_err(|_| {
                CliError::Validation(format!("line {line_no}: '{}' is not a number", v.trim()))
            })?;
            if !x.is_finite() {
                return Err(CliError::Validation(format!("line {line_no}: non-finite value")));
            }
            Ok(x)
        };
        data.times_us.push(parse(t)?);
        data.values.push(parse(p)?);
    }
    if data.times_us.is_empty() {
        return Err(CliError::Validation("no data rows".into()));
    }
    Ok(data)
}

/// Residual table `t_us,p_data,p_model,residual` with residual = model − data;
/// the model is interpolated linearly between the two nearest grid points.
/// Overlay times outside the grid are an error — extrapolating the model
/// would silently fabricate a comparison.
pub fn residual_text(
    grid_us: &[f64],
    p_model: &[f64],
    overlay: &OverlayData,
) -> Result<String, CliError> {
    let first = grid_us[0];
    let last = grid_us[grid_us.len() - 1];
    let mut out = String::from("t_us,p_data,p_model,residual\n");
    for (&t, &p_data) in overlay.times_us.iter().zip(&overlay.values) {
        if !(t >= first && t <= last) {
            return Err(CliError::Validation(format!(
                "overlay time {t} µs outside the model grid [{first}, {last}] µs"
            )));
        }
        // first index with grid > t; 1..=len-1 except when t == last
        let i = grid_us.partition_point(|&g| g <= t);
        let model = if i == grid_us.len() {
            p_model[i - 1]
        } else {
            let (t0, t1) = (grid_us[i - 1], grid_us[i]);
            p_model[i - 1] + (p_model[i] - p_model[i - 1]) * (t - t0) / (t1 - t0)
        };
        let _ = writeln!(out, "{},{},{},{}", t, p_data, model, model - p_data);
    }
    Ok(out)
}

/// Paths produced by a run; `summary`/`residuals` stay `None` for the verbs
/// that do not emit them.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub curve: PathBuf,
    pub summary: Option<PathBuf>,
    pub residuals: Option<PathBuf>,
}

/// Calibrate, sweep the grid, and write files under `out_dir`:
/// `<name>.curve.csv` always, `<name>.summary.txt` plus the overlay residual
/// table `<name>.residuals.csv` when `full_report` is set.
pub fn run_files(
    scenario: &Scenario,
    out_dir: &Path,
    full_report: bool,
) -> Result<RunArtifacts, CliError> {
    let cal = calibrate_scenario(scenario)?;
    let grid_us = scenario.time_grid_us();
    let grid_s: Vec<f64> = grid_us.iter().map(|t| t * 1e-6).collect();
    let series = sweep(
        &grid_s,
        &cal.system,
        &cal.loss,
        &cal.drive,
        &cal.calibration,
        scenario.rel_tol,
    )?;

    std::fs::create_dir_all(out_dir).map_err(|e| {
        CliError::Validation(format!("cannot create out dir {}: {e}", out_dir.display()))
    })?;
    let write = |path: &Path, text: &str| -> Result<(), CliError> {
        std::fs::write(path, text).map_err(|e| {
            CliError::Validation(format!("cannot write {}: {e}", path.display()))
        })
    };

    let curve_path = out_dir.join(format!("{}.curve.csv", scenario.name));
    write(&curve_path, &curve_text(&grid_us, &series))?;

    let mut artifacts = RunArtifacts { curve: curve_path, summary: None, residuals: None };
    if full_report {
        let summary_path = out_dir.join(format!("{}.summary.txt", scenario.name));
        write(&summary_path, &summary_text(scenario, &cal))?;
        artifacts.summary = Some(summary_path);

        if let Some(overlay_path) = &scenario.overlay {
            let overlay = load_overlay(overlay_path)?;
            let table = residual_text(&grid_us, &series.p_multimode, &overlay)?;
            let residual_path = out_dir.join(format!("{}.residuals.csv", scenario.name));
            write(&residual_path, &table)?;
            artifacts.residuals = Some(residual_path);
        }
    }
    Ok(artifacts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_lists_every_derived_quantity_at_six_digits() {
        let mut scenario = Scenario::defaults("weak_field");
        scenario.n_points = 3;
        scenario.t_end_us = 1.0;
        let cal = calibrate_scenario(&scenario).unwrap();
        let text = summary_text(&scenario, &cal);
        assert!(text.contains("scenario: weak_field\n"));
        assert!(text.contains("g_prime_rad_s: 1.49084e5\n"), "summary was:\n{text}");
        assert!(text.contains("omega_rabi_hz: 6.45456e4\n"), "summary was:\n{text}");
        assert!(text.contains("q_net: 1.28318e6\n"), "summary was:\n{text}");
        assert!(text.contains("gamma_rad_s: 2.50210e5\n"), "summary was:\n{text}");
        assert!(text.contains("t_collapse_us: 1.50183e1\n"), "summary was:\n{text}");
        assert!(text.contains("t_revival_us: 6.42366e1\n"), "summary was:\n{text}");
        assert!(text.contains("n_max: "));
        // residual line present and tiny
        let line = text.lines().find(|l| l.starts_with("longtime_residual:")).unwrap();
        let v: f64 = line.split(": ").nth(1).unwrap().parse().unwrap();
        assert!(v < 1e-9, "calibration residual {v} too large");
    }

    #[test]
    fn overlay_parsing_and_errors() {
        let d = parse_overlay("t_us,p\n1.5,0.25\n 2.5 , 0.75 \n\n").unwrap();
        assert_eq!(d.times_us, vec![1.5, 2.5]);
        assert_eq!(d.values, vec![0.25, 0.75]);

        assert!(parse_overlay("time,p\n1,2\n").is_err());
        assert!(parse_overlay("t_us,p\n").is_err());
        assert!(parse_overlay("t_us,p\n1.5\n").is_err());
        assert!(parse_overlay("t_us,p\n1.5,abc\n").is_err());
        assert!(parse_overlay("t_us,p\n1.5,inf\n").is_err());
    }

    #[test]
    fn residual_interpolation_is_linear_and_bounded() {
        let grid = [0.0, 1.0, 2.0, 3.0];
        let model = [0.0, 10.0, 20.0, 10.0];
        let overlay =
            OverlayData { times_us: vec![0.0, 0.5, 2.0, 2.25, 3.0], values: vec![0.0; 5] };
        let table = residual_text(&grid, &model, &overlay).unwrap();
        let rows: Vec<&str> = table.lines().skip(1).collect();
        assert_eq!(rows[0], "0,0,0,0");
        assert_eq!(rows[1], "0.5,0,5,5");
        assert_eq!(rows[2], "2,0,20,20");
        assert_eq!(rows[3], "2.25,0,17.5,17.5");
        assert_eq!(rows[4], "3,0,10,10");

        let outside = OverlayData { times_us: vec![3.5], values: vec![0.0] };
        assert!(residual_text(&grid, &model, &outside).is_err());
        let before = OverlayData { times_us: vec![-0.1], values: vec![0.0] };
        assert!(residual_text(&grid, &model, &before).is_err());
    }

    #[test]
    fn residual_is_model_minus_data() {
        let grid = [0.0, 2.0];
        let model = [0.5, 0.5];
        let overlay = OverlayData { times_us: vec![1.0], values: vec![0.2] };
        let table = residual_text(&grid, &model, &overlay).unwrap();
        assert!(table.lines().nth(1).unwrap().ends_with(",0.3"));
    }
}
