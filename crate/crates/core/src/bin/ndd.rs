use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ndd::experiments::{self, ExperimentName};
use ndd::Error;

/// Runs a notional-dependent discounting experiment and writes its CSV table.
#[derive(Debug, Parser)]
#[command(name = "ndd", version)]
struct Cli {
    /// One of: intensity-analogy, forward-compensation, forward-asymmetry,
    /// stream-temporal, par-swap-notional, forward-curve-notional, iam-rate.
    experiment: String,

    /// JSON config file; fields left out take the experiment's defaults.
    #[arg(long)]
    config: PathBuf,

    /// Number of Monte-Carlo paths (overrides the config).
    #[arg(long)]
    paths: Option<usize>,

    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,

    /// Output CSV file (overrides the config); stdout if neither is given.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn execute(cli: Cli) -> Result<(), Error> {
    let name: ExperimentName = cli.experiment.parse()?;
    let mut config = experiments::load_config(name, &cli.config)?;
    config.set_overrides(cli.paths, cli.seed, cli.out.map(|p| p.to_string_lossy().into_owned()))?;
    let report = experiments::run(&config)?;
    match config.output() {
        Some(path) => experiments::write_report(&report, path.as_ref()),
        None => report.write_csv(std::io::stdout().lock()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut line = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            if let Error::Config { path, .. } = &e {
                line["path"] = path.clone().into();
            }
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}
