//! Envelope (skyline) Cholesky factorization `A = L L^T`.
//!
//! Row `i` of `L` is stored from its first structural nonzero up to the
//! diagonal; fill-in never leaves that envelope. Structured-grid matrices with
//! a sensible node ordering have a narrow envelope, which is all the subdomain
//! and global systems here need.

use crate::error::{Error, Result};
use crate::linalg::sparse::SparseSymMatrix;

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct SkylineCholesky {
    n: usize,
    first: Vec<usize>,
    ptr: Vec<usize>,
    data: Vec<f64>,
}

/// Relative pivot threshold: a pivot `d_i <= PIVOT_REL * A_ii` is rejected.
const PIVOT_REL: f64 = 1e-14;

/// Factorizes an SPD matrix.
///
/// Fails with [`Error::NotPositiveDefinite`] when a pivot is not safely
/// positive relative to the original diagonal entry.
pub fn cholesky(matrix: &SparseSymMatrix) -> Result<SkylineCholesky> {
    let n = matrix.dim();
    let first = matrix.lower_profile();
    let mut ptr = vec![0usize; n + 1];
    for i in 0..n {
        ptr[i + 1] = ptr[i] + (i - first[i] + 1);
    }
    let mut data = vec![0.0; ptr[n]];
    for i in 0..n {
        let (cols, vals) = matrix.row(i);
        for (&c, &v) in cols.iter().zip(vals) {
            if c > i {
                break;
            }
            data[ptr[i] + c - first[i]] = v;
        }
    }

    for i in 0..n {
        let fi = first[i];
        let row_i = ptr[i];
        for j in fi..i {
            let fj = first[j];
            let start = fi.max(fj);
            let mut s = data[row_i + j - fi];
            let li = &data[row_i + start - fi..row_i + j - fi];
            let lj = &data[ptr[j] + start - fj..ptr[j] + j - fj];
            s -= dot(li, lj);
            let ljj = data[ptr[j] + j - fj];
            data[row_i + j - fi] = s / ljj;
        }
        let diag_pos = row_i + i - fi;
        let a_ii = data[diag_pos];
        let li = &data[row_i..diag_pos];
        let d = a_ii - dot(li, li);
        if !(d > PIVOT_REL * a_ii.abs()) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { row: i, pivot: d });
        }
        data[diag_pos] = d.sqrt();
    }

    Ok(SkylineCholesky {
        n,
        first,
        ptr,
        data,
    })
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl SkylineCholesky {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored factor entries.
    pub fn stored_entries(&self) -> usize {
        self.data.len()
    }

    /// `L[i, j]` (zero outside the envelope).
    pub fn lower(&self, i: usize, j: usize) -> f64 {
        if j > i || j < self.first[i] {
            0.0
        } else {
            self.data[self.ptr[i] + j - self.first[i]]
        }
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        // L y = b
        for i in 0..self.n {
            let fi = self.first[i];
            let row = &self.data[self.ptr[i]..self.ptr[i + 1]];
            let s = x[i] - dot(&row[..i - fi], &x[fi..i]);
            x[i] = s / row[i - fi];
        }
        // L^T x = y
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.ptr[i]..self.ptr[i + 1]];
            let xi = x[i] / row[i - fi];
            x[i] = xi;
            if xi != 0.0 {
                for (xk, &l) in x[fi..i].iter_mut().zip(&row[..i - fi]) {
                    *xk -= l * xi;
                }
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
