//! Generalized inverse of a singular symmetric positive semidefinite matrix
//! with a known nullspace.
//!
//! A set of `d = dim(null K)` DOFs is fixed so that the matching `d x d` block
//! of the nullspace basis is as well conditioned as a greedy volume-maximizing
//! scan can make it. The remaining principal submatrix is SPD and gets a
//! regular Cholesky factorization; solutions are zero at the fixed DOFs.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::cholesky::{cholesky, SkylineCholesky};
use crate::linalg::sparse::SparseSymMatrix;

/// Relative tolerance of the nullspace-orthogonality check in [`pseudo_solve`].
pub const COMPATIBILITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct FixedDofPseudoInverse {
    n: usize,
    fixed_dofs: Vec<usize>,
    kept: Vec<usize>,
    reduced: SkylineCholesky,
    nullspace: DMatrix<f64>,
    nullspace_col_norms: Vec<f64>,
}

/// Picks `basis.ncols()` rows of `basis` greedily maximizing the volume they
/// span (QR with row pivoting). Ties resolve to the lowest index.
pub fn select_fixing_dofs(basis: &DMatrix<f64>) -> Vec<usize> {
    let (n, d) = basis.shape();
    let mut rows: Vec<Vec<f64>> = (0..n).map(|i| basis.row(i).iter().copied().collect()).collect();
    let mut chosen = Vec::with_capacity(d);
    for _ in 0..d.min(n) {
        let mut best = None;
        let mut best_norm = -1.0;
        for (i, r) in rows.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            let norm: f64 = r.iter().map(|v| v * v).sum();
            if norm > best_norm {
                best_norm = norm;
                best = Some(i);
            }
        }
        let Some(p) = best else { break };
        chosen.push(p);
        let pivot = rows[p].clone();
        let pn: f64 = pivot.iter().map(|v| v * v).sum();
        if pn == 0.0 {
            break;
        }
        for (i, r) in rows.iter_mut().enumerate() {
            if i == p || chosen.contains(&i) {
                continue;
            }
            let c: f64 = r.iter().zip(&pivot).map(|(a, b)| a * b).sum::<f64>() / pn;
            for (a, b) in r.iter_mut().zip(&pivot) {
                *a -= c * b;
            }
        }
    }
    chosen.sort_unstable();
    chosen
}

impl FixedDofPseudoInverse {
    /// Builds the generalized inverse of `matrix` whose nullspace is spanned by
    /// the columns of `nullspace`.
    pub fn new(matrix: &SparseSymMatrix, nullspace: &DMatrix<f64>) -> Result<Self> {
        let n = matrix.dim();
        if nullspace.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "nullspace has {} rows, matrix has dimension {n}",
                nullspace.nrows()
            )));
        }
        let fixed_dofs = select_fixing_dofs(nullspace);
        Self::with_fixed_dofs(matrix, nullspace, fixed_dofs)
    }

    /// Builds the generalized inverse with an explicit choice of fixed DOFs.
    pub fn with_fixed_dofs(
        matrix: &SparseSymMatrix,
        nullspace: &DMatrix<f64>,
        mut fixed_dofs: Vec<usize>,
    ) -> Result<Self> {
        let n = matrix.dim();
        fixed_dofs.sort_unstable();
        fixed_dofs.dedup();
        let kept: Vec<usize> = (0..n).filter(|i| fixed_dofs.binary_search(i).is_err()).collect();
        let reduced = cholesky(&matrix.principal_submatrix(&kept))?;
        let nullspace_col_norms = (0..nullspace.ncols()).map(|k| nullspace.column(k).norm()).collect();
        Ok(Self {
            n,
            fixed_dofs,
            kept,
            reduced,
            nullspace: nullspace.clone(),
            nullspace_col_norms,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `dim - nullity`.
    pub fn rank(&self) -> usize {
        self.kept.len()
    }

    pub fn fixed_dofs(&self) -> &[usize] {
        &self.fixed_dofs
    }

    pub fn nullspace(&self) -> &DMatrix<f64> {
        &self.nullspace
    }

    /// Applies the generalized inverse without checking compatibility.
    pub fn apply(&self, rhs: &[f64]) -> Vec<f64> {
        debug_assert_eq!(rhs.len(), self.n);
        let mut reduced: Vec<f64> = self.kept.iter().map(|&i| rhs[i]).collect();
        self.reduced.solve_in_place(&mut reduced);
        let mut x = vec![0.0; self.n];
        for (&i, v) in self.kept.iter().zip(reduced) {
            x[i] = v;
        }
        x
    }

    /// Checks `|R_k^T rhs| <= tol * ||rhs|| * ||R_k||` for every nullspace column.
    pub fn check_compatible(&self, rhs: &[f64]) -> Result<()> {
        let rn = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        for k in 0..self.nullspace.ncols() {
            let proj: f64 = self.nullspace.column(k).iter().zip(rhs).map(|(a, b)| a * b).sum();
            let bound = COMPATIBILITY_TOL * rn * self.nullspace_col_norms[k];
            if proj.abs() > bound {
                return Err(Error::IncompatibleRhs {
                    mode: k,
                    projection: proj.abs(),
                    bound,
                });
            }
        }
        Ok(())
    }
}

/// Particular solution of `K x = rhs` for a right-hand side in the range of
/// `K`; the solution vanishes at the fixed DOFs.
pub fn pseudo_solve(factorization: &FixedDofPseudoInverse, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != factorization.dim() {
        return Err(Error::DimensionMismatch(format!(
            "rhs length {} vs dimension {}",
            rhs.len(),
            factorization.dim()
        )));
    }
    factorization.check_compatible(rhs)?;
    Ok(factorization.apply(rhs))
}
