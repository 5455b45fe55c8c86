//! Sum of scaled local inverses `sum_s B~^s S~^s (B~^s)^T`.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use rayon::prelude::*;

use crate::decomposition::{ConstraintSet, ScalingWeights};
use crate::precond::{LocalPreconditioner, PrecondKind};

/// Scaled jump operators paired with local preconditioners.
#[derive(Debug)]
pub struct JumpPreconditioner {
    dim: usize,
    /// Per subdomain: `(row, boundary position, sign * weight)`.
    entries: Vec<Vec<(usize, usize, f64)>>,
    locals: Vec<Arc<LocalPreconditioner>>,
    interior_solves: AtomicUsize,
}

impl JumpPreconditioner {
    /// `index(s, dof)` maps a local DOF of `B^s` to the matrix index used by
    /// `locals[s]`; that index must be one of its boundary DOFs.
    pub fn new(
        constraints: &ConstraintSet,
        weights: &ScalingWeights,
        locals: Vec<Arc<LocalPreconditioner>>,
        index: impl Fn(usize, usize) -> usize,
    ) -> Self {
        let entries = (0..constraints.subdomain_count())
            .map(|s| {
                let l = constraints.local(s);
                let boundary = locals[s].boundary();
                (0..l.rows.len())
                    .map(|k| {
                        let m = index(s, l.dofs[k]);
                        let pos = boundary.binary_search(&m).expect("constrained DOF outside the boundary set");
                        (l.rows[k], pos, l.signs[k] * weights.weight(l.rows[k], l.slots[k]))
                    })
                    .collect()
            })
            .collect();
        Self {
            dim: constraints.len(),
            entries,
            locals,
            interior_solves: AtomicUsize::new(0),
        }
    }

    pub fn subdomain_count(&self) -> usize {
        self.locals.len()
    }

    pub fn local(&self, s: usize) -> &LocalPreconditioner {
        &self.locals[s]
    }

    pub fn interior_solves(&self) -> usize {
        self.interior_solves.load(Ordering::Relaxed)
    }

    /// `B~^s S~^s (B~^s)^T r`.
    pub fn column(&self, s: usize, r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        let local = &self.locals[s];
        let mut v = vec![0.0; local.boundary().len()];
        let mut any = false;
        for &(row, pos, w) in &self.entries[s] {
            v[pos] += w * r[row];
            any |= r[row] != 0.0;
        }
        if !any {
            return out;
        }
        if local.kind() == PrecondKind::Dirichlet && !local.interior().is_empty() {
            self.interior_solves.fetch_add(1, Ordering::Relaxed);
        }
        let y = local.apply(&v);
        for &(row, pos, w) in &self.entries[s] {
            out[row] += w * y[pos];
        }
        out
    }

    pub fn columns(&self, r: &[f64]) -> Vec<Vec<f64>> {
        (0..self.locals.len()).into_par_iter().map(|s| self.column(s, r)).collect()
    }
}
