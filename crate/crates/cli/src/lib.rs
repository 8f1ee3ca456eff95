//! Configuration-driven experiment runner for the `spinmeter` library.
//!
//! A run reads one TOML configuration, evaluates one experiment and writes a
//! data file (CSV or JSON) plus `manifest.json` with the resolved
//! configuration, grids, thread count and version.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::path::PathBuf;

pub use config::{Experiment, ExperimentConfig, Format};
pub use error::CliError;

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "SPINMETER_THREADS";

/// Reads the thread cap; `None` when the variable is unset or empty.
pub fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::config(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// Sizes the global rayon pool from [`THREADS_ENV`] and returns its size.
pub fn init_thread_pool() -> Result<usize, CliError> {
    if let Some(n) = thread_cap()? {
        // a pool built earlier in the process keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(rayon::current_num_threads())
}

/// Evaluates the experiment and writes its outputs; returns the paths written.
pub fn execute(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
    let threads = rayon::current_num_threads();
    log::info!("running {} on {threads} threads", cfg.experiment);
    let outcome = experiments::run_experiment(cfg)?;
    output::write_outputs(cfg, &outcome, threads)
}
