//! Symmetric linear-algebra kernels: sparse storage, envelope Cholesky,
//! rank-revealing pivoted Cholesky, and a fixing-DOF generalized inverse.

pub mod cholesky;
pub mod pivoted;
pub mod pseudo;
pub mod sparse;

pub use cholesky::{cholesky, SkylineCholesky};
pub use pivoted::{rank_revealing_cholesky, PivotedCholesky, DEFAULT_PIVOT_TOL};
pub use pseudo::{pseudo_solve, select_fixing_dofs, FixedDofPseudoInverse};
pub use sparse::{CsrMatrix, SparseSymMatrix};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
