//! Subdomain-local preconditioners acting on the constrained ("boundary")
//! DOFs of a subdomain.

use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, CsrMatrix, SkylineCholesky, SparseSymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecondKind {
    #[default]
    Dirichlet,
    Lumped,
    Superlumped,
}

#[derive(Debug)]
enum LocalOp {
    /// `S = K_bb - K_bi K_ii^{-1} K_ib`, applied through a factorization.
    Schur {
        kbb: SparseSymMatrix,
        kib: CsrMatrix,
        kii: Option<SkylineCholesky>,
    },
    Block(SparseSymMatrix),
    Diagonal(Vec<f64>),
}

#[derive(Debug)]
pub struct LocalPreconditioner {
    kind: PrecondKind,
    boundary: Vec<usize>,
    interior: Vec<usize>,
    op: LocalOp,
    interior_solves: AtomicUsize,
}

fn split(n: usize, boundary: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut is_b = vec![false; n];
    for &b in boundary {
        if b >= n {
            return Err(Error::DimensionMismatch(format!("boundary dof {b} outside 0..{n}")));
        }
        is_b[b] = true;
    }
    let b: Vec<usize> = (0..n).filter(|&i| is_b[i]).collect();
    let i: Vec<usize> = (0..n).filter(|&i| !is_b[i]).collect();
    Ok((b, i))
}

/// Dirichlet preconditioner: the Schur complement of `K` on `boundary`.
/// `subdomain` is only used for error reporting.
pub fn dirichlet_schur(stiffness: &SparseSymMatrix, boundary: &[usize], subdomain: usize) -> Result<LocalPreconditioner> {
    let (b, i) = split(stiffness.dim(), boundary)?;
    let kii = if i.is_empty() {
        None
    } else {
        Some(cholesky(&stiffness.principal_submatrix(&i)).map_err(|_| Error::SingularInterior(subdomain))?)
    };
    let op = LocalOp::Schur {
        kbb: stiffness.principal_submatrix(&b),
        kib: stiffness.submatrix(&i, &b),
        kii,
    };
    Ok(LocalPreconditioner::new(PrecondKind::Dirichlet, b, i, op))
}

/// Lumped preconditioner `K_bb`.
pub fn lumped(stiffness: &SparseSymMatrix, boundary: &[usize]) -> Result<LocalPreconditioner> {
    let (b, i) = split(stiffness.dim(), boundary)?;
    let op = LocalOp::Block(stiffness.principal_submatrix(&b));
    Ok(LocalPreconditioner::new(PrecondKind::Lumped, b, i, op))
}

/// Super-lumped preconditioner `diag(K_bb)`.
pub fn super_lumped(stiffness: &SparseSymMatrix, boundary: &[usize]) -> Result<LocalPreconditioner> {
    let (b, i) = split(stiffness.dim(), boundary)?;
    let diag = b.iter().map(|&d| stiffness.get(d, d)).collect();
    Ok(LocalPreconditioner::new(PrecondKind::Superlumped, b, i, LocalOp::Diagonal(diag)))
}

pub fn build_local(
    kind: PrecondKind,
    stiffness: &SparseSymMatrix,
    boundary: &[usize],
    subdomain: usize,
) -> Result<LocalPreconditioner> {
    match kind {
        PrecondKind::Dirichlet => dirichlet_schur(stiffness, boundary, subdomain),
        PrecondKind::Lumped => lumped(stiffness, boundary),
        PrecondKind::Superlumped => super_lumped(stiffness, boundary),
    }
}

impl LocalPreconditioner {
    fn new(kind: PrecondKind, boundary: Vec<usize>, interior: Vec<usize>, op: LocalOp) -> Self {
        Self {
            kind,
            boundary,
            interior,
            op,
            interior_solves: AtomicUsize::new(0),
        }
    }

    pub fn kind(&self) -> PrecondKind {
        self.kind
    }

    /// Boundary DOFs (sorted local indices); the operator acts on these.
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    /// Interior solves performed so far.
    pub fn interior_solves(&self) -> usize {
        self.interior_solves.load(Ordering::Relaxed)
    }

    /// `S~ v` for `v` indexed like [`LocalPreconditioner::boundary`].
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        match &self.op {
            LocalOp::Schur { kbb, kib, kii } => {
                let mut out = kbb.mul_vec(v);
                if let Some(kii) = kii {
                    let mut t = vec![0.0; kib.nrows()];
                    kib.matvec(v, &mut t);
                    kii.solve_in_place(&mut t);
                    self.interior_solves.fetch_add(1, Ordering::Relaxed);
                    let mut corr = vec![0.0; v.len()];
                    kib.transpose_matvec(&t, &mut corr);
                    for (o, c) in out.iter_mut().zip(&corr) {
                        *o -= c;
                    }
                }
                out
            }
            LocalOp::Block(kbb) => kbb.mul_vec(v),
            LocalOp::Diagonal(d) => v.iter().zip(d).map(|(a, b)| a * b).collect(),
        }
    }

    /// Dense matrix of the boundary operator (for verification).
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.boundary.len();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.apply(&e);
            e[j] = 0.0;
            for i in 0..n {
                m[(i, j)] = col[i];
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::rigid_body_modes;
    use crate::fem::{assemble_subdomain, DensityField, Material, StructuredMesh};

    fn subdomain(n: usize) -> (StructuredMesh, SparseSymMatrix) {
        let mesh = StructuredMesh::new(n, n, 1.0 / n as f64, 1.0 / n as f64, [0.0, 0.0]).unwrap();
        let d = DensityField::from_fn(n, n, |i, j| 0.2 + 0.1 * ((i + 2 * j) % 5) as f64).unwrap();
        let k = assemble_subdomain(&mesh, &d, &Material::default()).unwrap().stiffness;
        (mesh, k)
    }

    fn boundary_dofs(mesh: &StructuredMesh) -> Vec<usize> {
        mesh.boundary_nodes().iter().flat_map(|&n| [2 * n, 2 * n + 1]).collect()
    }

    #[test]
    fn empty_interior_reduces_to_stiffness() {
        let (mesh, k) = subdomain(1);
        let b = boundary_dofs(&mesh);
        let s = dirichlet_schur(&k, &b, 0).unwrap();
        assert!(s.interior().is_empty());
        assert_eq!(s.to_dense(), k.to_dense());
        assert_eq!(lumped(&k, &b).unwrap().to_dense(), k.to_dense());
    }

    #[test]
    fn implicit_schur_matches_dense_elimination() {
        let (mesh, k) = subdomain(3);
        let s = dirichlet_schur(&k, &boundary_dofs(&mesh), 0).unwrap();
        let kd = k.to_dense();
        let (b, i) = (s.boundary().to_vec(), s.interior().to_vec());
        let pick = |r: &[usize], c: &[usize]| nalgebra::DMatrix::from_fn(r.len(), c.len(), |x, y| kd[(r[x], c[y])]);
        let kii = pick(&i, &i);
        let dense = pick(&b, &b) - pick(&b, &i) * kii.lu().solve(&pick(&i, &b)).unwrap();
        let diff = (s.to_dense() - &dense).amax();
        assert!(diff <= 1e-10 * dense.amax());
    }

    #[test]
    fn schur_annihilates_rigid_traces() {
        let (mesh, k) = subdomain(3);
        let s = dirichlet_schur(&k, &boundary_dofs(&mesh), 0).unwrap();
        let r = rigid_body_modes(&mesh);
        for m in 0..3 {
            let v: Vec<f64> = s.boundary().iter().map(|&d| r[(d, m)]).collect();
            let sv = s.apply(&v);
            assert!(sv.iter().all(|x| x.abs() <= 1e-10 * k.max_abs()));
        }
    }

    #[test]
    fn lumped_needs_no_interior_solve() {
        let (mesh, k) = subdomain(3);
        let b = boundary_dofs(&mesh);
        let l = lumped(&k, &b).unwrap();
        let _ = l.apply(&vec![1.0; b.len()]);
        assert_eq!(l.interior_solves(), 0);
        let d = dirichlet_schur(&k, &b, 0).unwrap();
        let _ = d.apply(&vec![1.0; b.len()]);
        assert_eq!(d.interior_solves(), 1);
    }

    #[test]
    fn super_lumped_is_positive_diagonal() {
        let (mesh, k) = subdomain(2);
        let b = boundary_dofs(&mesh);
        let s = super_lumped(&k, &b).unwrap();
        let dense = s.to_dense();
        for i in 0..b.len() {
            assert!(dense[(i, i)] > 0.0);
            assert_eq!(dense[(i, i)], k.get(b[i], b[i]));
        }
        // Single boundary DOF: K_bb is 1x1, so lumped and super-lumped agree.
        let one = [b[0]];
        assert_eq!(super_lumped(&k, &one).unwrap().to_dense(), lumped(&k, &one).unwrap().to_dense());
    }
}
