//! Projected preconditioned conjugate gradients on the dual problem, with a
//! single search direction, full orthogonalization, or one direction per
//! subdomain compressed by a rank-revealing factorization.

mod pcg;
mod simultaneous;

use serde::{Deserialize, Serialize};

use crate::dual::DualOperator;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, DEFAULT_PIVOT_TOL};

pub use pcg::{fo_pcg, pcg};
pub use simultaneous::simultaneous_pcg;

/// Search-direction strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionMode {
    /// Classic recurrence, one direction per iteration.
    Single,
    /// One direction per iteration, F-orthogonalized against all previous.
    Fo,
    /// One direction per subdomain, rank-revealing compression.
    Rrs,
}

impl DirectionMode {
    pub const ALL: [DirectionMode; 3] = [DirectionMode::Single, DirectionMode::Fo, DirectionMode::Rrs];

    pub fn label(self) -> &'static str {
        match self {
            DirectionMode::Single => "single",
            DirectionMode::Fo => "fo",
            DirectionMode::Rrs => "rrs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToleranceMode {
    /// Stop on `eps_r / eps_r(0) <= tol`.
    #[default]
    Rel,
    /// Stop on `eps_r <= tol`.
    Abs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tolerance: f64,
    pub tol_mode: ToleranceMode,
    pub max_iterations: usize,
    pub directions: DirectionMode,
    /// Relative pivot threshold of the rank-revealing factorization.
    pub pivot_tol: f64,
    /// Gram-Schmidt sweeps against stored directions (1 or 2).
    pub reorth_passes: usize,
    /// Record orthonormality, conjugacy and coarse-residual diagnostics.
    pub check_invariants: bool,
    /// Keep every iterate.
    pub record_lambda: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            tol_mode: ToleranceMode::Rel,
            max_iterations: 1000,
            directions: DirectionMode::Single,
            pivot_tol: DEFAULT_PIVOT_TOL,
            reorth_passes: 2,
            check_invariants: false,
            record_lambda: false,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!("tolerance {} must be positive", self.tolerance)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if !(self.pivot_tol >= 0.0 && self.pivot_tol < 1.0) {
            return Err(Error::Config(format!("pivot_tol {} outside [0, 1)", self.pivot_tol)));
        }
        if self.reorth_passes == 0 {
            return Err(Error::Config("reorth_passes must be at least 1".into()));
        }
        Ok(())
    }

    pub fn full_orthogonalization(&self) -> bool {
        self.directions != DirectionMode::Single
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BreakdownReason {
    /// `w^T F w <= 0` for a new direction.
    NonPositiveCurvature,
    /// Every candidate direction was dependent while not converged.
    RankCollapse,
    /// NaN or infinity appeared in the iteration.
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Converged,
    MaxIter,
    Breakdown(BreakdownReason),
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIter => "max_iter",
            Status::Breakdown(_) => "breakdown",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub eps_r: f64,
    pub kept_dirs: usize,
    pub f_applies: usize,
    pub cum_local_solves: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrace {
    pub rows: Vec<TraceRow>,
    pub status: Status,
}

impl ConvergenceTrace {
    /// Iterations performed.
    pub fn iterations(&self) -> usize {
        self.rows.last().map_or(0, |r| r.iter)
    }

    pub fn final_eps(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.eps_r)
    }

    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }
}

/// Per-iteration checks filled when `check_invariants` is set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// `max |W^T F W - I|` after compression.
    pub orthonormality: Vec<f64>,
    /// `max |w_new^T F w_j| / (||w_new|| ||w_j||)` over stored directions.
    pub conjugacy: Vec<f64>,
    /// Relative coarse residual `G lambda - e` of each iterate.
    pub constraint_residual: Vec<f64>,
    pub lambda_history: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub lambda: Vec<f64>,
    pub trace: ConvergenceTrace,
    pub diagnostics: Diagnostics,
}

/// `eps_r = sqrt(max(r^T z, 0))`; a clearly negative product means the
/// preconditioner is not positive semidefinite.
pub fn residual_metric(r: &[f64], z: &[f64]) -> Result<f64> {
    if r.len() != z.len() {
        return Err(Error::DimensionMismatch(format!("r has {} entries, z has {}", r.len(), z.len())));
    }
    let rz = dot(r, z);
    let bound = 1e-14 * norm(r) * norm(z);
    if rz < -bound {
        return Err(Error::NegativeInnerProduct { value: rz, bound });
    }
    Ok(rz.max(0.0).sqrt())
}

/// Runs the strategy selected by `opts.directions`.
pub fn solve<D: DualOperator + ?Sized>(op: &D, opts: &SolveOptions) -> Result<SolveResult> {
    match opts.directions {
        DirectionMode::Single => pcg(op, opts),
        DirectionMode::Fo => fo_pcg(op, opts),
        DirectionMode::Rrs => simultaneous_pcg(op, opts),
    }
}

/// Bookkeeping shared by the three strategies.
pub(crate) struct Recorder<'a, D: DualOperator + ?Sized> {
    op: &'a D,
    opts: &'a SolveOptions,
    rows: Vec<TraceRow>,
    diag: Diagnostics,
    eps0: f64,
}

impl<'a, D: DualOperator + ?Sized> Recorder<'a, D> {
    pub(crate) fn new(op: &'a D, opts: &'a SolveOptions) -> Result<Self> {
        opts.validate()?;
        Ok(Self {
            op,
            opts,
            rows: Vec::new(),
            diag: Diagnostics::default(),
            eps0: f64::NAN,
        })
    }

    /// Records one row; returns `Some(status)` when the loop must stop.
    pub(crate) fn record(&mut self, iter: usize, eps: f64, kept: usize, lambda: &[f64]) -> Option<Status> {
        if iter == 0 {
            self.eps0 = eps;
        }
        let c = self.op.counters();
        self.rows.push(TraceRow {
            iter,
            eps_r: eps,
            kept_dirs: kept,
            f_applies: c.f_applies,
            cum_local_solves: c.local_solves,
        });
        if self.opts.check_invariants {
            if let Some(res) = self.op.constraint_residual(lambda) {
                self.diag.constraint_residual.push(res);
            }
        }
        if self.opts.record_lambda {
            self.diag.lambda_history.push(lambda.to_vec());
        }
        if !eps.is_finite() || lambda.iter().any(|v| !v.is_finite()) {
            return Some(Status::Breakdown(BreakdownReason::NonFinite));
        }
        let converged = match self.opts.tol_mode {
            ToleranceMode::Abs => eps <= self.opts.tolerance,
            ToleranceMode::Rel => eps == 0.0 || eps <= self.opts.tolerance * self.eps0,
        };
        if converged {
            Some(Status::Converged)
        } else if iter >= self.opts.max_iterations {
            Some(Status::MaxIter)
        } else {
            None
        }
    }

    pub(crate) fn diagnostics(&mut self) -> &mut Diagnostics {
        &mut self.diag
    }

    pub(crate) fn finish(self, lambda: Vec<f64>, status: Status) -> SolveResult {
        SolveResult {
            lambda,
            trace: ConvergenceTrace { rows: self.rows, status },
            diagnostics: self.diag,
        }
    }
}

/// Starting multipliers and projected residual `P (d - F lambda0)`.
pub(crate) fn initial_state<D: DualOperator + ?Sized>(op: &D) -> (Vec<f64>, Vec<f64>) {
    let lambda0 = op.initial_lambda();
    let mut r = op.rhs().to_vec();
    if lambda0.iter().any(|&v| v != 0.0) {
        let f = op.apply(&lambda0);
        for (ri, fi) in r.iter_mut().zip(&f) {
            *ri -= fi;
        }
    }
    (lambda0, op.project(&r))
}
