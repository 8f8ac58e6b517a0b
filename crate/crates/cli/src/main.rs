use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use parabolic_core::config::Stage;
use parabolic_core::run::{run, RunOptions};

/// Runs the configured verification stages and prints a JSON report.
///
/// Exit status: 0 when every check passes, 1 when a check fails,
/// 2 on configuration, input or numerical errors.
#[derive(Debug, Parser)]
#[command(name = "parabolic-verify", version)]
struct Args {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,

    /// Stage to run; repeat to select several. Defaults to the stages
    /// configured in the file.
    #[arg(long = "stage", value_name = "STAGE")]
    stages: Vec<Stage>,

    /// Overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,

    /// Overrides the residual tolerances.
    #[arg(long)]
    tol: Option<f64>,

    /// Writes the report here instead of stdout; the sweep ratio table goes
    /// next to it with a `.csv` extension.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn main() -> ExitCode {
    let args = Args::parse();
    let opts = RunOptions {
        stages: (!args.stages.is_empty()).then(|| args.stages.clone()),
        seed: args.seed,
        tol: args.tol,
    };
    let outcome = match run(&args.config, &opts) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("parabolic-verify: {e}");
            return ExitCode::from(2);
        }
    };
    let json = outcome.report.to_json();
    let written = match &args.out {
        None => {
            print!("{json}");
            Ok(())
        }
        Some(path) => write(path, &json).and_then(|()| match &outcome.csv {
            Some(csv) => write(&path.with_extension("csv"), csv),
            None => Ok(()),
        }),
    };
    if let Err(e) = written {
        eprintln!("parabolic-verify: {e}");
        return ExitCode::from(2);
    }
    for f in &outcome.report.failures {
        eprintln!("FAIL {f}");
    }
    if outcome.report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
