//! Scaling weights `W^s` of the jump operators `B~^s = W^s B^s`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::decomposition::constraints::{ConstraintSet, RowKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingKind {
    Multiplicity,
    K,
}

/// Weight for every nonzero of `B`, aligned with each row's `entries`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingWeights {
    weights: Vec<Vec<f64>>,
}

impl ScalingWeights {
    pub fn row(&self, r: usize) -> &[f64] {
        &self.weights[r]
    }

    pub fn weight(&self, row: usize, slot: usize) -> f64 {
        self.weights[row][slot]
    }

    pub fn max_abs_difference(&self, other: &ScalingWeights) -> f64 {
        self.weights
            .iter()
            .flatten()
            .zip(other.weights.iter().flatten())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Dense scaled jump matrix `B~`, laid out like [`ConstraintSet::to_dense`].
    pub fn scaled_dense(&self, constraints: &ConstraintSet) -> DMatrix<f64> {
        let offsets = constraints.offsets();
        let mut b = DMatrix::zeros(constraints.len(), *offsets.last().unwrap());
        for (r, row) in constraints.rows().iter().enumerate() {
            for (k, e) in row.entries.iter().enumerate() {
                b[(r, offsets[e.subdomain] + e.dof)] = e.sign * self.weights[r][k];
            }
        }
        b
    }
}

/// `1/m` on both sides of a row at a DOF shared by `m` subdomains; Dirichlet
/// rows get weight 1.
pub fn multiplicity_scaling(constraints: &ConstraintSet) -> ScalingWeights {
    let weights = constraints
        .rows()
        .iter()
        .map(|row| match row.kind {
            RowKind::Dirichlet => vec![1.0; row.entries.len()],
            RowKind::Interface => vec![1.0 / row.multiplicity() as f64; row.entries.len()],
        })
        .collect();
    ScalingWeights { weights }
}

/// Stiffness-weighted scaling. For a row between subdomains `s` and `r`,
/// `W^s = K^r_ii / sum_t K^t_ii` where `t` runs over every subdomain that
/// owns the DOF, so two-subdomain rows reduce to `K^r / (K^s + K^r)`.
///
/// `diagonals[s]` is the diagonal of the local stiffness of subdomain `s`.
pub fn k_scaling(constraints: &ConstraintSet, diagonals: &[Vec<f64>]) -> Result<ScalingWeights> {
    let mut weights = Vec::with_capacity(constraints.len());
    for row in constraints.rows() {
        if row.kind == RowKind::Dirichlet {
            weights.push(vec![1.0; row.entries.len()]);
            continue;
        }
        for &(s, dof) in &row.owners {
            let value = diagonals[s][dof];
            if !(value > 0.0) {
                return Err(Error::ZeroStiffnessDiagonal { subdomain: s, dof, value });
            }
        }
        let w: Vec<f64> = (0..row.entries.len())
            .map(|k| {
                let opposite = row.entries[1 - k];
                let numerator = diagonals[opposite.subdomain][opposite.dof];
                // 1 / sum_t (K^t / K^r) equals K^r / sum_t K^t, and gives
                // exactly 1/m when all owners have the same diagonal.
                let ratio_sum: f64 = row.owners.iter().map(|&(t, d)| diagonals[t][d] / numerator).sum();
                1.0 / ratio_sum
            })
            .collect();
        weights.push(w);
    }
    Ok(ScalingWeights { weights })
}

/// Largest entry of `B B~^T B - B`; zero for admissible weights.
pub fn admissibility_defect(constraints: &ConstraintSet, weights: &ScalingWeights) -> f64 {
    let b = constraints.to_dense();
    let bt = weights.scaled_dense(constraints);
    let defect = &b * bt.transpose() * &b - &b;
    defect.amax()
}
