//! Dual interface problems: the Total-FETI operator with its rigid-body
//! projector and the condensed FETI-DP operator.

pub mod fetidp;
pub mod jump;
pub mod tfeti;

use serde::{Deserialize, Serialize};

use crate::decomposition::ScalingKind;
use crate::precond::PrecondKind;

pub use fetidp::{build_fetidp, FetidpSystem};
pub use jump::JumpPreconditioner;
pub use tfeti::{build_tfeti, TfetiSystem};

/// Options shared by both dual systems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    pub scaling: ScalingKind,
    pub precond: PrecondKind,
    /// Share one factorization among subdomains with identical local data.
    pub reuse_factorizations: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            scaling: ScalingKind::K,
            precond: PrecondKind::Dirichlet,
            reuse_factorizations: true,
        }
    }
}

/// Work performed by a dual operator so far.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OperatorCounters {
    pub f_applies: usize,
    pub local_solves: usize,
}

/// Interface problem `F lambda = d` seen by the iterative engine.
pub trait DualOperator: Sync {
    fn dim(&self) -> usize;

    /// Number of per-subdomain preconditioner columns.
    fn subdomain_count(&self) -> usize;

    /// `F lambda`.
    fn apply(&self, lambda: &[f64]) -> Vec<f64>;

    /// Right-hand side `d`.
    fn rhs(&self) -> &[f64];

    fn initial_lambda(&self) -> Vec<f64>;

    /// Orthogonal projector onto admissible increments (identity by default).
    fn project(&self, v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }

    /// Per-subdomain preconditioned columns `B~^s S~^s (B~^s)^T r`.
    fn precondition_columns(&self, r: &[f64]) -> Vec<Vec<f64>>;

    /// Sum of [`DualOperator::precondition_columns`] in subdomain order.
    fn precondition(&self, r: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.dim()];
        for col in self.precondition_columns(r) {
            for (a, b) in z.iter_mut().zip(&col) {
                *a += b;
            }
        }
        z
    }

    /// Relative violation of the coarse condition `G lambda = e`, if any.
    fn constraint_residual(&self, _lambda: &[f64]) -> Option<f64> {
        None
    }

    fn counters(&self) -> OperatorCounters;
}

/// Wraps an operator and flips the sign of its preconditioner, which makes
/// `r^T z` negative. Used to check that the engine reports the fault.
pub struct NegatedPreconditioner<'a, D: DualOperator>(pub &'a D);

impl<D: DualOperator> DualOperator for NegatedPreconditioner<'_, D> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn subdomain_count(&self) -> usize {
        self.0.subdomain_count()
    }

    fn apply(&self, lambda: &[f64]) -> Vec<f64> {
        self.0.apply(lambda)
    }

    fn rhs(&self) -> &[f64] {
        self.0.rhs()
    }

    fn initial_lambda(&self) -> Vec<f64> {
        self.0.initial_lambda()
    }

    fn project(&self, v: &[f64]) -> Vec<f64> {
        self.0.project(v)
    }

    fn precondition_columns(&self, r: &[f64]) -> Vec<Vec<f64>> {
        let mut cols = self.0.precondition_columns(r);
        for c in cols.iter_mut() {
            c.iter_mut().for_each(|v| *v = -*v);
        }
        cols
    }

    fn constraint_residual(&self, lambda: &[f64]) -> Option<f64> {
        self.0.constraint_residual(lambda)
    }

    fn counters(&self) -> OperatorCounters {
        self.0.counters()
    }
}

/// Recovered subdomain displacements.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalRecovery {
    pub displacements: Vec<Vec<f64>>,
    /// Rigid-body amplitudes (Total-FETI only).
    pub alpha: Option<Vec<f64>>,
    /// `||B u - c|| / ||u||`.
    pub jump: f64,
}

/// Dense matrix of a dual operator built column by column.
pub fn dense_operator<D: DualOperator + ?Sized>(op: &D) -> nalgebra::DMatrix<f64> {
    let n = op.dim();
    let mut m = nalgebra::DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = op.apply(&e);
        e[j] = 0.0;
        for i in 0..n {
            m[(i, j)] = col[i];
        }
    }
    m
}
