//! Natural coarse space `G = -R^T B^T`, `e = -R^T f` and the projector onto
//! `ker G`.

use nalgebra::DMatrix;

use crate::decomposition::constraints::ConstraintSet;
use crate::error::{Error, Result};
use crate::linalg::{dot, rank_revealing_cholesky, PivotedCholesky};

/// Relative pivot tolerance used to drop dependent rows of `G`.
pub const COARSE_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct CoarseSpace {
    /// Column `r` of `G` as `(coarse index, value)` pairs.
    columns: Vec<Vec<(usize, f64)>>,
    e: Vec<f64>,
    modes_per_subdomain: Vec<usize>,
    gram: DMatrix<f64>,
    factor: PivotedCholesky,
}

/// Assembles `G` and `e` from the nullspace bases `modes[s]` and the loads
/// `loads[s]`, and factorizes `G G^T` with dependent rows filtered out.
pub fn build_coarse_space(
    constraints: &ConstraintSet,
    modes: &[DMatrix<f64>],
    loads: &[Vec<f64>],
) -> Result<CoarseSpace> {
    let ns = constraints.subdomain_count();
    if modes.len() != ns || loads.len() != ns {
        return Err(Error::DimensionMismatch(format!(
            "{} mode blocks and {} loads for {ns} subdomains",
            modes.len(),
            loads.len()
        )));
    }
    let mut offsets = Vec::with_capacity(ns + 1);
    offsets.push(0);
    for m in modes {
        offsets.push(offsets.last().unwrap() + m.ncols());
    }
    let n_coarse = offsets[ns];

    let mut e = vec![0.0; n_coarse];
    for s in 0..ns {
        for k in 0..modes[s].ncols() {
            e[offsets[s] + k] = -dot(modes[s].column(k).as_slice(), &loads[s]);
        }
    }

    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); constraints.len()];
    for s in 0..ns {
        let local = constraints.local(s);
        for k in 0..local.rows.len() {
            let r = local.rows[k];
            for m in 0..modes[s].ncols() {
                let v = -local.signs[k] * modes[s][(local.dofs[k], m)];
                if v != 0.0 {
                    columns[r].push((offsets[s] + m, v));
                }
            }
        }
    }
    for col in columns.iter_mut() {
        col.sort_by_key(|&(i, _)| i);
    }

    let mut gram = DMatrix::zeros(n_coarse, n_coarse);
    for col in &columns {
        for &(i, a) in col {
            for &(j, b) in col {
                gram[(i, j)] += a * b;
            }
        }
    }
    let factor = rank_revealing_cholesky(&gram, COARSE_RANK_TOL)?;
    let space = CoarseSpace {
        columns,
        e,
        modes_per_subdomain: modes.iter().map(|m| m.ncols()).collect(),
        gram,
        factor,
    };

    // The filtered system must still reproduce the dropped rows of e;
    // otherwise the loads are not balanced by any admissible multiplier.
    let lambda0 = space.lambda0();
    let residual: Vec<f64> =
        space.apply_g(&lambda0).iter().zip(&space.e).map(|(a, b)| a - b).collect();
    let scale: f64 = (0..ns).map(|s| modes[s].norm() * crate::linalg::norm(&loads[s])).sum();
    if crate::linalg::norm(&residual) > 1e-8 * scale {
        return Err(Error::CoarseSingular);
    }
    Ok(space)
}

impl CoarseSpace {
    /// Number of rows of `G` before filtering.
    pub fn row_count(&self) -> usize {
        self.e.len()
    }

    /// Rows kept after redundancy filtering.
    pub fn rank(&self) -> usize {
        self.factor.rank
    }

    pub fn retained_rows(&self) -> &[usize] {
        self.factor.retained()
    }

    pub fn e(&self) -> &[f64] {
        &self.e
    }

    pub fn modes_per_subdomain(&self) -> &[usize] {
        &self.modes_per_subdomain
    }

    pub fn dual_dim(&self) -> usize {
        self.columns.len()
    }

    /// `G G^T` before filtering.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Dense `G` (`row_count x dual_dim`).
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.row_count(), self.dual_dim());
        for (r, col) in self.columns.iter().enumerate() {
            for &(i, v) in col {
                g[(i, r)] = v;
            }
        }
        g
    }

    pub fn apply_g(&self, lambda: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.row_count()];
        for (r, col) in self.columns.iter().enumerate() {
            let l = lambda[r];
            if l != 0.0 {
                for &(i, v) in col {
                    out[i] += v * l;
                }
            }
        }
        out
    }

    pub fn apply_gt(&self, a: &[f64]) -> Vec<f64> {
        self.columns
            .iter()
            .map(|col| col.iter().map(|&(i, v)| v * a[i]).sum())
            .collect()
    }

    /// Solves `(G_f G_f^T) x_f = b_f` on the retained rows; returns a full
    /// coarse vector with zeros in dropped rows.
    pub fn solve_gram(&self, b: &[f64]) -> Vec<f64> {
        let retained = self.factor.retained();
        let bf: Vec<f64> = retained.iter().map(|&i| b[i]).collect();
        let xf = self.factor.solve_leading(&bf);
        let mut x = vec![0.0; self.row_count()];
        for (k, &i) in retained.iter().enumerate() {
            x[i] = xf[k];
        }
        x
    }

    /// `P v = v - G^T (G G^T)^{-1} G v`.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let a = self.solve_gram(&self.apply_g(v));
        let correction = self.apply_gt(&a);
        v.iter().zip(&correction).map(|(x, c)| x - c).collect()
    }

    /// Minimum-norm multiplier with `G lambda = e`.
    pub fn lambda0(&self) -> Vec<f64> {
        self.apply_gt(&self.solve_gram(&self.e))
    }

    /// Least-squares amplitudes `alpha = (G G^T)^{-1} G v`.
    pub fn least_squares(&self, v: &[f64]) -> Vec<f64> {
        self.solve_gram(&self.apply_g(v))
    }
}
