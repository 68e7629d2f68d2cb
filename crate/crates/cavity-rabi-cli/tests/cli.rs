//! Process-level tests of the binary: flag handling, exit codes, file
//! emission, overlay residuals, and the documented error paths.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static Path {
    Path::new(env!("CARGO_BIN_EXE_cavity-rabi"))
}

fn run(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    let mut cmd = Command::new(bin());
    for a in args {
        cmd.arg(a.as_ref());
    }
    cmd.output().expect("binary failed to spawn")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(format!("{name}.cfg"));
    std::fs::write(&path, body).unwrap();
    path
}

/// Small, fast scenario: five points over 2 µs.
const TINY: &str = "name = tiny\nn_points = 5\nt_end_us = 2\n";

#[test]
fn report_emits_curve_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "tiny", TINY);
    let out = run(&[&"--verb", &"report", &"--config", &cfg, &"--out-dir", &dir.path()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let curve = std::fs::read_to_string(dir.path().join("tiny.curve.csv")).unwrap();
    let mut lines = curve.lines();
    assert_eq!(lines.next().unwrap(), "t_us,p_multimode,p_singlemode");
    assert_eq!(lines.next().unwrap(), "0,0,0");
    let rows: Vec<&str> = curve.lines().skip(1).collect();
    assert_eq!(rows.len(), 5);
    for row in rows {
        let fields: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(fields.len(), 3);
        assert!(fields[1] >= 0.0 && fields[1] <= 1.0 + 1e-8);
        assert!(fields[2] >= 0.0 && fields[2] <= 1.0);
    }

    let summary = std::fs::read_to_string(dir.path().join("tiny.summary.txt")).unwrap();
    assert!(summary.contains("g_prime_rad_s: 1.49084e5"), "summary:\n{summary}");
    assert!(summary.contains("q_net: 1.28318e6"));
    // report without overlay writes no residual table
    assert!(!dir.path().join("tiny.residuals.csv").exists());
}

#[test]
fn simulate_writes_curve_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "tiny", TINY);
    let out = run(&[&"--verb", &"simulate", &"--config", &cfg, &"--out-dir", &dir.path()]);
    assert!(out.status.success());
    assert!(dir.path().join("tiny.curve.csv").exists());
    assert!(!dir.path().join("tiny.summary.txt").exists());
}

#[test]
fn calibrate_prints_summary_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "min", "name = min\n");
    let out = run(&[&"--verb", &"calibrate", &"--config", &cfg]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("g_prime_rad_s: 1.49084e5"), "stdout:\n{text}");
    assert!(text.contains("t_collapse_us: 1.50183e1"));
    assert!(text.contains("t_revival_us: 6.42366e1"));
}

#[test]
fn nbar_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "min", "name = min\n");
    let out = run(&[&"--verb", &"calibrate", &"--config", &cfg, &"--nbar", &"1.77"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("nbar: 1.77000e0"), "stdout:\n{text}");
    assert!(text.contains("g_prime_rad_s: 1.52852e5"), "stdout:\n{text}");
    assert!(text.contains("t_collapse_us: 1.24546e1"));

    let bad = run(&[&"--verb", &"calibrate", &"--config", &cfg, &"--nbar", &"-1"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn single_point_grid_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "point", "name = point\nn_points = 1\nt_start_us = 0\n");
    let out = run(&[&"--verb", &"simulate", &"--config", &cfg, &"--out-dir", &dir.path()]);
    assert!(out.status.success());
    let curve = std::fs::read_to_string(dir.path().join("point.curve.csv")).unwrap();
    assert_eq!(curve, "t_us,p_multimode,p_singlemode\n0,0,0\n");
}

#[test]
fn overlay_produces_residual_table() {
    let dir = tempfile::tempdir().unwrap();
    // First run: make a curve to manufacture overlay data from.
    let cfg = write_config(dir.path(), "base", TINY.replace("name = tiny", "name = base").as_str());
    let out = run(&[&"--verb", &"simulate", &"--config", &cfg, &"--out-dir", &dir.path()]);
    assert!(out.status.success());
    let curve = std::fs::read_to_string(dir.path().join("base.curve.csv")).unwrap();
    // overlay = the model's own rows at two grid times plus one midpoint
    let rows: Vec<(f64, f64)> = curve
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap())
        })
        .collect();
    let overlay_path = dir.path().join("measured.csv");
    std::fs::write(
        &overlay_path,
        format!("t_us,p\n{},{}\n{},{}\n1.23,0.5\n", rows[1].0, rows[1].1, rows[3].0, rows[3].1),
    )
    .unwrap();

    let with_overlay = format!(
        "name = overlaid\nn_points = 5\nt_end_us = 2\noverlay = {}\n",
        overlay_path.display()
    );
    let cfg2 = write_config(dir.path(), "overlaid", &with_overlay);
    let out = run(&[&"--verb", &"report", &"--config", &cfg2, &"--out-dir", &dir.path()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let table = std::fs::read_to_string(dir.path().join("overlaid.residuals.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next().unwrap(), "t_us,p_data,p_model,residual");
    let parsed: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(parsed.len(), 3);
    // rows taken straight off the model curve print a residual of exactly 0
    assert_eq!(parsed[0][3], 0.0);
    assert_eq!(parsed[1][3], 0.0);
    // the midpoint row interpolates between the same grid values both times
    assert_eq!(parsed[2][0], 1.23);
    assert!((parsed[2][2] - parsed[2][1] - parsed[2][3]).abs() < 1e-15);
}

#[test]
fn overlay_time_outside_grid_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let overlay_path = dir.path().join("late.csv");
    std::fs::write(&overlay_path, "t_us,p\n99.0,0.5\n").unwrap();
    let cfg = write_config(
        dir.path(),
        "short",
        &format!("name = short\nn_points = 5\nt_end_us = 2\noverlay = {}\n", overlay_path.display()),
    );
    let out = run(&[&"--verb", &"report", &"--config", &cfg, &"--out-dir", &dir.path()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside the model grid"));
}

#[test]
fn validation_failures_exit_1_with_context() {
    let dir = tempfile::tempdir().unwrap();

    let bad_domain = write_config(dir.path(), "bad", "name = bad\nq_bare = -7e7\n");
    let out = run(&[&"--verb", &"calibrate", &"--config", &bad_domain]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("q_bare"));

    let unknown = write_config(dir.path(), "unknown", "name = u\ncoupling = 3\n");
    let out = run(&[&"--verb", &"calibrate", &"--config", &unknown]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(stderr.contains("line 2") && stderr.contains("unknown key"), "stderr: {stderr}");

    let missing = dir.path().join("nowhere.cfg");
    let out = run(&[&"--verb", &"report", &"--config", &missing]);
    assert_eq!(out.status.code(), Some(1));

    // no --config at all for a scenario verb
    let out = run(&[&"--verb", &"simulate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--config is required"));

    // bad flags are validation failures too, not clap's default exit 2
    let out = run(&[&"--verb", &"transmogrify"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&[&"--config", &"x.cfg"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let out = run(&[&"--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("--config") && text.contains("--verb"));
}
