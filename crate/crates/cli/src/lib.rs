//! Command-line driver: data ingestion, argument parsing and report output.

pub mod args;
pub mod commands;
pub mod ingest;

pub use args::{Cli, Command, Format};
pub use commands::{canonical_json, dispatch, CliError, Output};
pub use ingest::{ingest_csv, read_table, Delimiter, HeaderMode, IngestError, IngestOptions};

/// Environment variable holding a thread count for the worker pool.
pub const THREADS_ENV: &str = "RANK_INDEP_THREADS";

/// Parses the thread override; empty or unset means none.
pub fn threads_from_env(value: Option<&str>) -> Result<Option<usize>, CliError> {
    match value.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => v
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .map(Some)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
    }
}
