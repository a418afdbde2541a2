//! Config-driven experiment runner for `kcip-core`.

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;

use std::path::PathBuf;

pub use config::{ExperimentConfig, Kind, Settings};
pub use error::{LabError, LabResult};
pub use report::Report;

/// Runs the experiment, on a dedicated pool of `workers` threads if set.
pub fn execute(cfg: &ExperimentConfig) -> LabResult<Report> {
    match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| LabError::config(format!("cannot start {w} workers: {e}")))?
            .install(|| experiments::run(cfg)),
        None => experiments::run(cfg),
    }
}

/// Writes `<out>/<kind>.csv` when an output directory is set, stdout
/// otherwise. Returns the file written, if any.
pub fn emit(cfg: &ExperimentConfig, report: &Report) -> LabResult<Option<PathBuf>> {
    match &cfg.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(format!("{}.csv", cfg.kind));
            std::fs::write(&path, report.to_bytes()?)?;
            Ok(Some(path))
        }
        None => {
            report.write_to(std::io::stdout().lock())?;
            Ok(None)
        }
    }
}
