//! Runs the selected variant grid and writes one trace per variant plus a
//! summary. Non-convergence is a recorded status; only internal faults
//! are reported as failures.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use feti_core::problems::{direct_oracle, write_snapshot};
use feti_core::solver::ConvergenceTrace;
use feti_core::variant::{run_variant, VariantOutcome};

use crate::config::{ProblemSource, RunConfig};
use crate::{csv_err, io_err, require_dir, Result};

/// Primal error bound a converged run must meet against the oracle.
pub const ORACLE_BOUND: f64 = 1e-6;

pub const SUMMARY_HEADER: [&str; 8] =
    ["problem", "variant", "iterations", "final_eps", "status", "dual_size", "oracle_error", "oracle_ok"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub problem: String,
    pub variant: String,
    pub iterations: usize,
    pub final_eps: f64,
    pub status: &'static str,
    pub dual_size: usize,
    pub oracle_error: f64,
    /// Empty unless converged; then whether the oracle bound holds.
    pub oracle_ok: Option<bool>,
}

#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub rows: Vec<SummaryRow>,
    /// `(problem, variant, message)` for runs aborted by an internal error.
    pub failures: Vec<(String, String, String)>,
}

impl RunSummary {
    pub fn all_terminated(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Serialize)]
struct TraceRecord {
    iter: usize,
    eps_r: f64,
    kept_dirs: usize,
    #[serde(rename = "F_applies")]
    f_applies: usize,
    cum_local_solves: usize,
}

fn write_trace(path: &Path, trace: &ConvergenceTrace) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for r in &trace.rows {
        w.serialize(TraceRecord {
            iter: r.iter,
            eps_r: r.eps_r,
            kept_dirs: r.kept_dirs,
            f_applies: r.f_applies,
            cum_local_solves: r.cum_local_solves,
        })
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn summary_row(problem: &str, o: &VariantOutcome) -> SummaryRow {
    let trace = &o.solve.trace;
    let err = o.oracle_error.unwrap_or(f64::NAN);
    SummaryRow {
        problem: problem.to_string(),
        variant: o.variant.label(),
        iterations: trace.iterations(),
        final_eps: trace.final_eps(),
        status: trace.status.label(),
        dual_size: o.dual_dim,
        oracle_error: err,
        oracle_ok: trace.converged().then_some(err <= ORACLE_BOUND),
    }
}

/// Trace file name for one problem instance and variant.
pub fn trace_file_name(problem: &str, variant: &str) -> String {
    format!("trace_{problem}_{variant}.csv")
}

pub fn run_grid(cfg: &RunConfig) -> Result<RunSummary> {
    require_dir(&cfg.out)?;
    let settings = cfg.out.join("run.toml");
    let text = toml::to_string(&cfg.to_args()).expect("plain settings serialize");
    std::fs::write(&settings, text).map_err(io_err(&settings))?;

    let mut summary = RunSummary::default();
    for (label, problem) in cfg.instances()? {
        if cfg.problem == ProblemSource::Mbb {
            let k = label.trim_start_matches("mbb").parse().unwrap_or(0);
            write_snapshot(&cfg.out, k, &problem)?;
        }
        let subs = problem.substructure()?;
        let oracle = direct_oracle(&problem)?;
        let outcomes: Vec<_> = cfg
            .variants
            .par_iter()
            .map(|&v| (v, run_variant(&subs, v, cfg.precond, &cfg.solve, Some(&oracle))))
            .collect();
        for (v, outcome) in outcomes {
            match outcome {
                Ok(o) => {
                    write_trace(&cfg.out.join(trace_file_name(&label, &v.label())), &o.solve.trace)?;
                    summary.rows.push(summary_row(&label, &o));
                }
                Err(e) => summary.failures.push((label.clone(), v.label(), e.to_string())),
            }
        }
    }

    let path = cfg.out.join("summary.csv");
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(&path).map_err(csv_err(&path))?;
    w.write_record(SUMMARY_HEADER).map_err(csv_err(&path))?;
    for row in &summary.rows {
        w.serialize(row).map_err(csv_err(&path))?;
    }
    w.flush().map_err(io_err(&path))?;
    Ok(summary)
}
