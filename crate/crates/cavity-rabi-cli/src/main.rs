//! `cavity-rabi`: simulate collapse and revival of quantum Rabi oscillations
//! in a lossy resonant cavity. Scenarios come from flat key=value config
//! files; results go to plot-ready CSV plus a derived-quantity summary.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, ValueEnum};

use cavity_rabi_cli::report::{calibrate_scenario, run_files, summary_text};
use cavity_rabi_cli::scenario::load_scenario;
use cavity_rabi_cli::selftest::run_acceptance;
use cavity_rabi_cli::CliError;

#[derive(Parser)]
#[command(
    name = "cavity-rabi",
    version,
    about = "Collapse and revival of damped quantum Rabi oscillations"
)]
struct Cli {
    /// Scenario config file (key = value lines; required except for selftest)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for emitted files
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// What to run
    #[arg(long, value_enum)]
    verb: Verb,
    /// Override the scenario's mean photon number
    #[arg(long)]
    nbar: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Verb {
    /// Solve the coupling for the scenario and print the summary
    Calibrate,
    /// Write the curve CSV only
    Simulate,
    /// Write curve, summary, and (with an overlay) the residual table
    Report,
    /// Run the built-in acceptance checks
    Selftest,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            // clap renders help/version itself; print and exit cleanly
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Verb::Selftest = cli.verb {
        return selftest();
    }

    let config = cli
        .config
        .ok_or_else(|| CliError::Validation("--config is required for this verb".into()))?;
    let mut scenario = load_scenario(&config)?;
    if let Some(nbar) = cli.nbar {
        scenario.nbar = nbar;
        scenario.validate()?;
    }

    match cli.verb {
        Verb::Calibrate => {
            let cal = calibrate_scenario(&scenario)?;
            print!("{}", summary_text(&scenario, &cal));
        }
        Verb::Simulate => {
            let artifacts = run_files(&scenario, &cli.out_dir, false)?;
            println!("wrote {}", artifacts.curve.display());
        }
        Verb::Report => {
            let artifacts = run_files(&scenario, &cli.out_dir, true)?;
            println!("wrote {}", artifacts.curve.display());
            if let Some(summary) = &artifacts.summary {
                println!("wrote {}", summary.display());
            }
            if let Some(residuals) = &artifacts.residuals {
                println!("wrote {}", residuals.display());
            }
        }
        Verb::Selftest => unreachable!("handled above"),
    }
    Ok(())
}

fn selftest() -> Result<(), CliError> {
    let bin = std::env::current_exe()
        .map_err(|e| CliError::Validation(format!("cannot locate own binary: {e}")))?;
    let reports = run_acceptance(&bin)?;
    let mut failed = 0usize;
    for (i, r) in reports.iter().enumerate() {
        println!(
            "[{}] {:02} {} — {}",
            if r.passed { "PASS" } else { "FAIL" },
            i + 1,
            r.name,
            r.detail
        );
        if !r.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        return Err(CliError::SelftestFailed { failed });
    }
    println!("all {} checks passed", reports.len());
    Ok(())
}
