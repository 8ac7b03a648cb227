//! Command-line front end: CSV ingestion, experiment commands and JSON/CSV reports.

pub mod commands;
pub mod error;
pub mod ingest;
pub mod output;

pub use commands::{run, Cli};
pub use error::{CliError, CliResult};

/// Environment variable holding the worker thread count; unset means all cores.
pub const THREADS_ENV: &str = "SVNL_THREADS";

/// Sizes the global rayon pool from [`THREADS_ENV`].
pub fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}
