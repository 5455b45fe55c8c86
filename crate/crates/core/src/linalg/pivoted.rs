//! Rank-revealing Cholesky factorization with diagonal pivoting.
//!
//! Computes `N A N^T = L L^T` for a symmetric positive semidefinite `A`, where
//! `N` is a permutation and `L = [[L~, 0], [X, 0]]` has `rank` nonzero
//! columns. At each step the largest remaining Schur-complement diagonal is
//! chosen; the factorization stops once that diagonal drops below
//! `pivot_tol * max(diag(A))`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Default relative pivot tolerance.
pub const DEFAULT_PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct PivotedCholesky {
    /// `permutation[k]` is the original index placed at position `k`.
    pub permutation: Vec<usize>,
    /// `n x rank` lower-trapezoidal factor in permuted ordering.
    pub lower: DMatrix<f64>,
    pub rank: usize,
}

impl PivotedCholesky {
    pub fn dim(&self) -> usize {
        self.permutation.len()
    }

    /// Original indices of the retained (linearly independent) pivots.
    pub fn retained(&self) -> &[usize] {
        &self.permutation[..self.rank]
    }

    /// Leading `rank x rank` triangular block `L~`.
    pub fn leading_block(&self) -> DMatrix<f64> {
        self.lower.view((0, 0), (self.rank, self.rank)).into_owned()
    }

    /// Solves `L~ L~^T x = b` for the retained block (`b` in retained order).
    pub fn solve_leading(&self, b: &[f64]) -> Vec<f64> {
        let r = self.rank;
        debug_assert_eq!(b.len(), r);
        let mut x = b.to_vec();
        for i in 0..r {
            let mut s = x[i];
            for k in 0..i {
                s -= self.lower[(i, k)] * x[k];
            }
            x[i] = s / self.lower[(i, i)];
        }
        for i in (0..r).rev() {
            let mut s = x[i];
            for k in i + 1..r {
                s -= self.lower[(k, i)] * x[k];
            }
            x[i] = s / self.lower[(i, i)];
        }
        x
    }

    /// Reassembles `P^T L L^T P` in the original ordering.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let n = self.dim();
        let llt = &self.lower * self.lower.transpose();
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(self.permutation[i], self.permutation[j])] = llt[(i, j)];
            }
        }
        out
    }
}

/// Pivoted Cholesky of a dense symmetric positive semidefinite matrix.
pub fn rank_revealing_cholesky(matrix: &DMatrix<f64>, pivot_tol: f64) -> Result<PivotedCholesky> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::DimensionMismatch("matrix is not square".into()));
    }
    let mut a = matrix.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let scale = (0..n).fold(0.0_f64, |m, i| m.max(a[(i, i)]));
    let threshold = pivot_tol * scale;
    if let Some(i) = (0..n).find(|&i| a[(i, i)] < -threshold || !a[(i, i)].is_finite()) {
        return Err(Error::IndefiniteInput {
            pivot: a[(i, i)],
            threshold,
        });
    }
    if n == 0 || scale <= 0.0 {
        return Ok(PivotedCholesky {
            permutation: perm,
            lower: DMatrix::zeros(n, 0),
            rank: 0,
        });
    }

    let mut rank = 0;
    for k in 0..n {
        // Largest remaining diagonal of the Schur complement; ties keep the
        // lowest position.
        let mut p = k;
        for i in k + 1..n {
            if a[(i, i)] > a[(p, p)] {
                p = i;
            }
        }
        let pivot = a[(p, p)];
        if pivot < -threshold {
            return Err(Error::IndefiniteInput { pivot, threshold });
        }
        if pivot <= threshold {
            break;
        }
        if p != k {
            a.swap_rows(k, p);
            a.swap_columns(k, p);
            perm.swap(k, p);
        }
        let lkk = pivot.sqrt();
        a[(k, k)] = lkk;
        for i in k + 1..n {
            a[(i, k)] /= lkk;
        }
        for j in k + 1..n {
            let ljk = a[(j, k)];
            if ljk == 0.0 {
                continue;
            }
            for i in j..n {
                let v = a[(i, k)] * ljk;
                a[(i, j)] -= v;
                // Keep the trailing block symmetric so later swaps stay valid.
                a[(j, i)] = a[(i, j)];
            }
        }
        rank = k + 1;
    }

    let mut lower = DMatrix::zeros(n, rank);
    for j in 0..rank {
        for i in j..n {
            lower[(i, j)] = a[(i, j)];
        }
    }
    Ok(PivotedCholesky {
        permutation: perm,
        lower,
        rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_orthogonal(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
        let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        m.qr().q()
    }

    #[test]
    fn identity_has_full_rank_and_trivial_permutation() {
        let f = rank_revealing_cholesky(&DMatrix::identity(3, 3), DEFAULT_PIVOT_TOL).unwrap();
        assert_eq!(f.rank, 3);
        assert_eq!(f.permutation, vec![0, 1, 2]);
        assert_eq!(f.leading_block(), DMatrix::identity(3, 3));
    }

    #[test]
    fn rank_one_outer_product_picks_largest_diagonal() {
        let v = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 2.0]);
        let a = &v * v.transpose();
        let f = rank_revealing_cholesky(&a, DEFAULT_PIVOT_TOL).unwrap();
        assert_eq!(f.rank, 1);
        // Diagonal (1, 4, 4): the first maximum is index 1.
        assert_eq!(f.permutation[0], 1);
        assert!((f.lower[(0, 0)] - 2.0).abs() < 1e-15);
        assert!((f.reconstruct() - a).norm() < 1e-14);
    }

    #[test]
    fn duplicated_columns_match_eigen_oracle() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let n = 6;
        let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let f_spd = m.transpose() * &m + DMatrix::identity(n, n);
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut wmat = DMatrix::zeros(n, 2);
        for i in 0..n {
            wmat[(i, 0)] = w[i];
            wmat[(i, 1)] = w[i];
        }
        let delta = wmat.transpose() * &f_spd * &wmat;
        let fact = rank_revealing_cholesky(&delta, DEFAULT_PIVOT_TOL).unwrap();
        assert_eq!(fact.rank, 1);

        // Oracle: the rank-1 part from the eigendecomposition.
        let eig = delta.clone().symmetric_eigen();
        let k = eig.eigenvalues.imax();
        let u = eig.eigenvectors.column(k);
        let rank1 = eig.eigenvalues[k] * u * u.transpose();
        assert!((fact.reconstruct() - rank1).norm() <= 1e-10 * delta.norm());
    }

    #[test]
    fn indefinite_input_is_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(
            rank_revealing_cholesky(&a, DEFAULT_PIVOT_TOL),
            Err(Error::IndefiniteInput { .. })
        ));
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            rank_revealing_cholesky(&b, DEFAULT_PIVOT_TOL),
            Err(Error::IndefiniteInput { .. })
        ));
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let f = rank_revealing_cholesky(&DMatrix::zeros(4, 4), DEFAULT_PIVOT_TOL).unwrap();
        assert_eq!(f.rank, 0);
    }

    #[test]
    fn leading_solve_inverts_retained_block() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 2.0, 2.0, 2.0, 5.0, 1.0, 2.0, 1.0, 6.0]);
        let f = rank_revealing_cholesky(&a, DEFAULT_PIVOT_TOL).unwrap();
        assert_eq!(f.rank, 3);
        let b = [1.0, -2.0, 0.5];
        let x = f.solve_leading(&b);
        // Permuted system: A[N, N] x = b.
        for i in 0..3 {
            let mut s = 0.0;
            for j in 0..3 {
                s += a[(f.permutation[i], f.permutation[j])] * x[j];
            }
            assert!((s - b[i]).abs() < 1e-12);
        }
    }

    proptest::proptest! {
        #[test]
        fn exact_rank_of_constructed_matrices(seed in 0u64..10_000, n in 1usize..=30, r_frac in 0.0f64..1.0) {
            let r = 1 + ((n as f64 - 1.0) * r_frac).round() as usize;
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let q = random_orthogonal(n, &mut rng);
            let mut d = DMatrix::zeros(n, n);
            for i in 0..r {
                d[(i, i)] = rng.gen_range(1.0..10.0);
            }
            let a = q.transpose() * d * &q;
            let a = (&a + a.transpose()) * 0.5;
            let f = rank_revealing_cholesky(&a, DEFAULT_PIVOT_TOL).unwrap();
            proptest::prop_assert_eq!(f.rank, r);
        }
    }
}
