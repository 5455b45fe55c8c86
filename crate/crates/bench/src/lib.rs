//! Benchmark harness for the FETI solver variants: grid runs with CSV
//! traces, an invariant self-check and a trace merger for plotting.

pub mod config;
pub mod grid;
pub mod report;
pub mod verify;

use std::path::{Path, PathBuf};

pub use config::{ProblemSource, RunArgs, RunConfig};
pub use grid::{run_grid, RunSummary, SummaryRow};
pub use report::{report, TraceMonotonicity};
pub use verify::{verify, Check, VerifyReport};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error(transparent)]
    Core(#[from] feti_core::Error),
}

pub type Result<T> = std::result::Result<T, BenchError>;

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io { path: path.to_path_buf(), source }
}

pub(crate) fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> BenchError + '_ {
    move |source| BenchError::Csv { path: path.to_path_buf(), source }
}

/// Output directories are never created implicitly.
pub(crate) fn require_dir(dir: &Path) -> Result<()> {
    if dir.is_dir() {
        Ok(())
    } else {
        Err(BenchError::Io {
            path: dir.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "output directory does not exist"),
        })
    }
}
