//! Global direct solve used as the reference for every substructuring run.

use crate::decomposition::{constraints::dirichlet_map, Partition};
use crate::error::{Error, Result};
use crate::fem::{assembly::assemble_stiffness, element_moduli, StructuredMesh};
use crate::linalg::{cholesky, norm};
use crate::problems::spec::ProblemSpec;

/// Displacements on the global node grid, DOF `2 g + direction`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSolution {
    pub displacement: Vec<f64>,
    pub load: Vec<f64>,
}

/// Assembles the merged global stiffness, eliminates prescribed DOFs and
/// solves with an envelope Cholesky factorization. Nodes are numbered along
/// the shorter grid direction first to keep the envelope narrow.
pub fn direct_oracle(problem: &ProblemSpec) -> Result<GlobalSolution> {
    let subs = problem.substructure()?;
    let partition = &subs.partition;
    let (gnx, gny) = partition.global_node_grid();
    let (ex, ey) = (gnx - 1, gny - 1);
    let h = partition.subdomain_mesh(0);
    let mesh = StructuredMesh::new(ex, ey, h.hx, h.hy, [0.0, 0.0])?;

    let global = problem.global_density()?;
    let moduli = element_moduli(&global, &problem.material)?;
    // Row-major node n = j gnx + i  ->  renumbered position.
    let by_columns = gny <= gnx;
    let order = |n: usize| {
        let (i, j) = (n % gnx, n / gnx);
        if by_columns {
            i * gny + j
        } else {
            n
        }
    };
    let ndofs = 2 * gnx * gny;
    let k = assemble_stiffness(&mesh, &moduli, &problem.material, ndofs, order)?;

    let mut load = vec![0.0; ndofs];
    for (s, sub) in subs.subdomains.iter().enumerate() {
        for l in 0..sub.mesh.node_count() {
            let g = partition.local_to_global(s, l);
            load[2 * g] += sub.load[2 * l];
            load[2 * g + 1] += sub.load[2 * l + 1];
        }
    }

    let prescribed = dirichlet_map(partition, &subs.dirichlet)?;
    // Prescribed values and loads in the renumbered ordering.
    let mut u = vec![0.0; ndofs];
    let mut f = vec![0.0; ndofs];
    let mut fixed = vec![false; ndofs];
    for g in 0..gnx * gny {
        for d in 0..2 {
            let p = 2 * order(g) + d;
            f[p] = load[2 * g + d];
            if let Some(v) = prescribed[2 * g + d] {
                u[p] = v;
                fixed[p] = true;
            }
        }
    }
    let free: Vec<usize> = (0..ndofs).filter(|&i| !fixed[i]).collect();
    let mut rhs: Vec<f64> = free.iter().map(|&i| f[i]).collect();
    if fixed.iter().any(|&x| x) {
        let ku = k.mul_vec(&u);
        for (r, &i) in rhs.iter_mut().zip(&free) {
            *r -= ku[i];
        }
    }
    let factor = cholesky(&k.principal_submatrix(&free)).map_err(|_| Error::SingularGlobal)?;
    factor.solve_in_place(&mut rhs);
    for (&i, v) in free.iter().zip(&rhs) {
        u[i] = *v;
    }

    let mut displacement = vec![0.0; ndofs];
    for g in 0..gnx * gny {
        let p = order(g);
        displacement[2 * g] = u[2 * p];
        displacement[2 * g + 1] = u[2 * p + 1];
    }
    Ok(GlobalSolution { displacement, load })
}

/// Copies a global displacement into each subdomain's local numbering.
pub fn restrict_to_subdomains(partition: &Partition, global: &[f64]) -> Vec<Vec<f64>> {
    (0..partition.subdomain_count())
        .map(|s| {
            let nodes = partition.subdomain_mesh(s).node_count();
            (0..nodes)
                .flat_map(|l| {
                    let g = partition.local_to_global(s, l);
                    [global[2 * g], global[2 * g + 1]]
                })
                .collect()
        })
        .collect()
}

/// `||u - u_ref|| / ||u_ref||` over all subdomain copies.
pub fn relative_error(partition: &Partition, local: &[Vec<f64>], reference: &[f64]) -> f64 {
    let reference = restrict_to_subdomains(partition, reference);
    let mut diff = 0.0;
    let mut base = 0.0;
    for (u, r) in local.iter().zip(&reference) {
        diff += u.iter().zip(r).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        base += norm(r).powi(2);
    }
    if base == 0.0 {
        diff.sqrt()
    } else {
        (diff / base).sqrt()
    }
}
