//! Merges trace files into one long-format table for external plotting.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{csv_err, io_err, require_dir, Result};

pub const LONG_FILE: &str = "convergence_long.csv";
pub const MONOTONE_FILE: &str = "monotone.csv";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceMonotonicity {
    pub variant: String,
    /// `eps_r` never increases from one row to the next.
    pub monotone: bool,
}

#[derive(Deserialize)]
struct InRow {
    iter: usize,
    eps_r: f64,
}

#[derive(Serialize)]
struct OutRow<'a> {
    variant: &'a str,
    iter: usize,
    eps_r: f64,
}

/// Trace files named directly or found (sorted) inside directories.
fn collect(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found = Vec::new();
            for entry in std::fs::read_dir(input).map_err(io_err(input))? {
                let path = entry.map_err(io_err(input))?.path();
                let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                if name.starts_with("trace_") && name.ends_with(".csv") {
                    found.push(path);
                }
            }
            found.sort();
            files.extend(found);
        } else {
            files.push(input.clone());
        }
    }
    Ok(files)
}

fn label(path: &Path) -> String {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    stem.strip_prefix("trace_").unwrap_or(&stem).to_string()
}

/// Writes `convergence_long.csv` (`variant,iter,eps_r`) and `monotone.csv`
/// into `out` and returns the per-trace monotonicity flags.
pub fn report(inputs: &[PathBuf], out: &Path) -> Result<Vec<TraceMonotonicity>> {
    require_dir(out)?;
    let long_path = out.join(LONG_FILE);
    // Header written by hand so an empty input still yields one.
    let mut long = csv::WriterBuilder::new().has_headers(false).from_path(&long_path).map_err(csv_err(&long_path))?;
    long.write_record(["variant", "iter", "eps_r"]).map_err(csv_err(&long_path))?;
    let mut flags = Vec::new();
    for file in collect(inputs)? {
        let name = label(&file);
        let mut reader = csv::Reader::from_path(&file).map_err(csv_err(&file))?;
        let mut prev = f64::INFINITY;
        let mut monotone = true;
        for row in reader.deserialize::<InRow>() {
            let row = row.map_err(csv_err(&file))?;
            monotone &= row.eps_r <= prev;
            prev = row.eps_r;
            long.serialize(OutRow { variant: &name, iter: row.iter, eps_r: row.eps_r })
                .map_err(csv_err(&long_path))?;
        }
        flags.push(TraceMonotonicity { variant: name, monotone });
    }
    long.flush().map_err(io_err(&long_path))?;

    let flag_path = out.join(MONOTONE_FILE);
    let mut w = csv::Writer::from_path(&flag_path).map_err(csv_err(&flag_path))?;
    w.write_record(["variant", "monotone"]).map_err(csv_err(&flag_path))?;
    for f in &flags {
        w.write_record([f.variant.as_str(), if f.monotone { "true" } else { "false" }])
            .map_err(csv_err(&flag_path))?;
    }
    w.flush().map_err(io_err(&flag_path))?;
    Ok(flags)
}
