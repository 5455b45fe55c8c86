//! Compressed sparse row storage.
//!
//! [`SparseSymMatrix`] keeps both triangles so that row and column extraction
//! are the same operation. It is only ever built from lower-triangle input,
//! and the upper triangle is a mirror of it, so `A == A^T` holds bit for bit.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Rectangular CSR matrix, used for off-diagonal blocks such as `K_bi`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    /// `y = A^T x`
    pub fn transpose_matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        y.iter_mut().for_each(|v| *v = 0.0);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.col_idx[k]] += self.values[k] * xi;
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut dense = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                dense[(i, self.col_idx[k])] += self.values[k];
            }
        }
        dense
    }
}

/// Symmetric sparse matrix in full CSR storage with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    /// Builds the matrix from lower-triangle triplets `(i, j, v)` with `i >= j`.
    ///
    /// Duplicates are summed in insertion order, so the result is deterministic.
    pub fn from_lower_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        for &(i, j, _) in triplets {
            if i >= n || j >= n {
                return Err(Error::DimensionMismatch(format!(
                    "entry ({i}, {j}) outside a {n}x{n} matrix"
                )));
            }
            if j > i {
                return Err(Error::DimensionMismatch(format!(
                    "entry ({i}, {j}) is not in the lower triangle"
                )));
            }
        }
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));

        // Summed lower entries.
        let mut lower: Vec<(usize, usize, f64)> = Vec::with_capacity(order.len());
        for k in order {
            let (i, j, v) = triplets[k];
            match lower.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => lower.push((i, j, v)),
            }
        }

        let mut counts = vec![0usize; n];
        for &(i, j, _) in &lower {
            counts[i] += 1;
            if i != j {
                counts[j] += 1;
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for i in 0..n {
            row_ptr[i + 1] = row_ptr[i] + counts[i];
        }
        let nnz = row_ptr[n];
        let mut col_idx = vec![0usize; nnz];
        let mut values = vec![0.0; nnz];
        let mut fill = row_ptr.clone();
        // Row-sorted lower entries give sorted columns in the lower part of each
        // row; the mirrored upper entries arrive later with larger column indices.
        for &(i, j, v) in &lower {
            col_idx[fill[i]] = j;
            values[fill[i]] = v;
            fill[i] += 1;
            if i != j {
                col_idx[fill[j]] = i;
                values[fill[j]] = v;
                fill[j] += 1;
            }
        }
        let mut m = Self {
            n,
            row_ptr,
            col_idx,
            values,
        };
        m.sort_rows();
        Ok(m)
    }

    fn sort_rows(&mut self) {
        for i in 0..self.n {
            let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let cols = &self.col_idx[a..b];
            if cols.windows(2).all(|w| w[0] < w[1]) {
                continue;
            }
            let mut pairs: Vec<(usize, f64)> = cols
                .iter()
                .copied()
                .zip(self.values[a..b].iter().copied())
                .collect();
            pairs.sort_by_key(|p| p.0);
            for (k, (c, v)) in pairs.into_iter().enumerate() {
                self.col_idx[a + k] = c;
                self.values[a + k] = v;
            }
        }
    }

    /// Builds from a dense matrix, reading only the lower triangle.
    pub fn from_dense_lower(dense: &DMatrix<f64>) -> Result<Self> {
        if dense.nrows() != dense.ncols() {
            return Err(Error::DimensionMismatch("matrix is not square".into()));
        }
        let n = dense.nrows();
        let mut triplets = Vec::new();
        for i in 0..n {
            for j in 0..=i {
                let v = dense[(i, j)];
                if v != 0.0 || i == j {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_lower_triplets(n, &triplets)
    }

    pub fn identity(n: usize) -> Self {
        let triplets: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_lower_triplets(n, &triplets).expect("identity is well formed")
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i` (equivalently, column `i`).
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[a..b], &self.values[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    /// Multiplies every stored value by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }

    /// Maximum absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Principal submatrix on `idx` (in the given order).
    pub fn principal_submatrix(&self, idx: &[usize]) -> Self {
        let map = self.index_map(idx);
        let mut triplets = Vec::new();
        for (new_i, &old_i) in idx.iter().enumerate() {
            let (cols, vals) = self.row(old_i);
            for (&c, &v) in cols.iter().zip(vals) {
                if let Some(new_j) = map[c] {
                    if new_j <= new_i {
                        triplets.push((new_i, new_j, v));
                    }
                }
            }
        }
        Self::from_lower_triplets(idx.len(), &triplets).expect("indices come from a valid matrix")
    }

    /// Rectangular block `A[rows, cols]`.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> CsrMatrix {
        let map = self.index_map(cols);
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for &r in rows {
            let (rc, rv) = self.row(r);
            let mut entries: Vec<(usize, f64)> = rc
                .iter()
                .zip(rv)
                .filter_map(|(&c, &v)| map[c].map(|nc| (nc, v)))
                .collect();
            entries.sort_by_key(|e| e.0);
            for (c, v) in entries {
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            nrows: rows.len(),
            ncols: cols.len(),
            row_ptr,
            col_idx,
            values,
        }
    }

    fn index_map(&self, idx: &[usize]) -> Vec<Option<usize>> {
        let mut map = vec![None; self.n];
        for (k, &i) in idx.iter().enumerate() {
            map[i] = Some(k);
        }
        map
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut dense = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                dense[(i, c)] = v;
            }
        }
        dense
    }

    /// First structurally nonzero column of each row's lower part.
    pub(crate) fn lower_profile(&self) -> Vec<usize> {
        (0..self.n)
            .map(|i| {
                let (cols, _) = self.row(i);
                cols.first().copied().map_or(i, |c| c.min(i))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SparseSymMatrix {
        SparseSymMatrix::from_lower_triplets(
            3,
            &[(0, 0, 4.0), (1, 0, 1.0), (1, 1, 5.0), (2, 1, 2.0), (2, 2, 6.0), (1, 0, 0.5)],
        )
        .unwrap()
    }

    #[test]
    fn duplicates_are_summed_and_mirrored() {
        let m = sample();
        assert_eq!(m.get(1, 0), 1.5);
        assert_eq!(m.get(0, 1), 1.5);
        assert_eq!(m.get(2, 0), 0.0);
        assert_eq!(m.diagonal(), vec![4.0, 5.0, 6.0]);
        let d = m.to_dense();
        assert_eq!(d, d.transpose());
    }

    #[test]
    fn rejects_upper_entries() {
        assert!(SparseSymMatrix::from_lower_triplets(2, &[(0, 1, 1.0)]).is_err());
        assert!(SparseSymMatrix::from_lower_triplets(2, &[(2, 1, 1.0)]).is_err());
    }

    #[test]
    fn submatrix_extraction_matches_dense() {
        let m = sample();
        let d = m.to_dense();
        let sub = m.submatrix(&[2, 0], &[1, 2]).to_dense();
        assert_eq!(sub[(0, 0)], d[(2, 1)]);
        assert_eq!(sub[(0, 1)], d[(2, 2)]);
        assert_eq!(sub[(1, 0)], d[(0, 1)]);
        let p = m.principal_submatrix(&[2, 1]).to_dense();
        assert_eq!(p[(0, 0)], 6.0);
        assert_eq!(p[(1, 0)], 2.0);
        assert_eq!(p[(0, 1)], 2.0);
    }

    #[test]
    fn matvec_and_transpose() {
        let m = sample();
        let y = m.mul_vec(&[1.0, 2.0, 3.0]);
        assert_eq!(y, vec![4.0 + 3.0, 1.5 + 10.0 + 6.0, 4.0 + 18.0]);
        let block = m.submatrix(&[0, 1], &[1, 2]);
        let mut t = vec![0.0; 2];
        block.transpose_matvec(&[1.0, 1.0], &mut t);
        assert_eq!(t, vec![1.5 + 5.0, 2.0]);
    }
}
