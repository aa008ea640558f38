//! Reproducible experiment runs that emit CSV tables.
//!
//! Each experiment is configured by a JSON file (see [`config`]) and
//! produces an [`ExperimentReport`] whose metadata records the crate
//! version, the seed and a hash of the effective configuration. The same
//! configuration always yields a byte-identical CSV.

pub mod config;
mod report;
pub mod runs;

use std::fs;
use std::path::Path;

pub use config::{ExperimentConfig, ExperimentName, KernelConfig};
pub use report::ExperimentReport;

use crate::error::{Error, Result};

pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let mut report = match config {
        ExperimentConfig::IntensityAnalogy(c) => runs::intensity_analogy(c),
        ExperimentConfig::ForwardCompensation(c) => runs::forward_compensation(c),
        ExperimentConfig::ForwardAsymmetry(c) => runs::forward_asymmetry(c),
        ExperimentConfig::StreamTemporal(c) => runs::stream_temporal(c),
        ExperimentConfig::ParSwapNotional(c) => runs::par_swap_notional(c),
        ExperimentConfig::ForwardCurveNotional(c) => runs::forward_curve_notional(c),
        ExperimentConfig::IamRate(c) => runs::iam_rate(c),
    }?;
    let mut metadata = vec![
        ("experiment".to_string(), config.name().to_string()),
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("config-sha256".to_string(), config.hash()),
    ];
    if let Some(seed) = config.seed() {
        metadata.push(("seed".to_string(), seed.to_string()));
    }
    if let Some(paths) = config.paths() {
        metadata.push(("paths".to_string(), paths.to_string()));
    }
    report.metadata = metadata;
    Ok(report)
}

/// Loads the config at `path` for `name`.
pub fn load_config(name: ExperimentName, path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    ExperimentConfig::from_json(name, &text)
}

/// Writes the report to `path`, creating parent directories.
pub fn write_report(report: &ExperimentReport, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let file = fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    report.write_csv(std::io::BufWriter::new(file))
}
