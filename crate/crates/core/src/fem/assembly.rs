use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::density::DensityField;
use crate::fem::element::q4_unit_stiffness;
use crate::fem::material::{simp_modulus, Material};
use crate::fem::mesh::StructuredMesh;
use crate::linalg::SparseSymMatrix;

/// Local stiffness and load of one subdomain. Supports are not embedded.
#[derive(Debug, Clone)]
pub struct SubdomainSystem {
    pub mesh: StructuredMesh,
    pub stiffness: SparseSymMatrix,
    pub load: Vec<f64>,
}

/// Straight chain of boundary nodes between two grid nodes `(i, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub start: (usize, usize),
    pub end: (usize, usize),
}

impl EdgeSpec {
    pub fn left(mesh: &StructuredMesh) -> Self {
        Self { start: (0, 0), end: (0, mesh.ny) }
    }

    pub fn right(mesh: &StructuredMesh) -> Self {
        Self { start: (mesh.nx, 0), end: (mesh.nx, mesh.ny) }
    }

    pub fn bottom(mesh: &StructuredMesh) -> Self {
        Self { start: (0, 0), end: (mesh.nx, 0) }
    }

    pub fn top(mesh: &StructuredMesh) -> Self {
        Self { start: (0, mesh.ny), end: (mesh.nx, mesh.ny) }
    }
}

/// Per-element Young's moduli from a density field.
pub fn element_moduli(density: &DensityField, mat: &Material) -> Result<Vec<f64>> {
    density.values().iter().map(|&rho| simp_modulus(rho, mat)).collect()
}

/// Assembles `sum_e E_e K_unit` with a node renumbering `node_map`.
pub(crate) fn assemble_stiffness(
    mesh: &StructuredMesh,
    moduli: &[f64],
    mat: &Material,
    ndofs: usize,
    node_map: impl Fn(usize) -> usize,
) -> Result<SparseSymMatrix> {
    if moduli.len() != mesh.element_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} moduli for {} elements",
            moduli.len(),
            mesh.element_count()
        )));
    }
    let ke = q4_unit_stiffness(mat.nu, mat.thickness, mesh.hx, mesh.hy);
    let mut triplets = Vec::with_capacity(mesh.element_count() * 36);
    for ej in 0..mesh.ny {
        for ei in 0..mesh.nx {
            let e = moduli[mesh.element_index(ei, ej)];
            let nodes = mesh.element_nodes(ei, ej);
            let mut dofs = [0usize; 8];
            for (a, &n) in nodes.iter().enumerate() {
                let g = node_map(n);
                dofs[2 * a] = 2 * g;
                dofs[2 * a + 1] = 2 * g + 1;
            }
            for a in 0..8 {
                for b in 0..8 {
                    if dofs[a] >= dofs[b] {
                        triplets.push((dofs[a], dofs[b], e * ke[a][b]));
                    }
                }
            }
        }
    }
    SparseSymMatrix::from_lower_triplets(ndofs, &triplets)
}

/// Assembles the SIMP-weighted stiffness of a structured subdomain.
pub fn assemble_subdomain(
    mesh: &StructuredMesh,
    density: &DensityField,
    mat: &Material,
) -> Result<SubdomainSystem> {
    if density.nx() != mesh.nx || density.ny() != mesh.ny {
        return Err(Error::DimensionMismatch(format!(
            "density grid {}x{} vs mesh {}x{}",
            density.nx(),
            density.ny(),
            mesh.nx,
            mesh.ny
        )));
    }
    mat.validate()?;
    let moduli = element_moduli(density, mat)?;
    let stiffness = assemble_stiffness(mesh, &moduli, mat, mesh.dof_count(), |n| n)?;
    Ok(SubdomainSystem {
        mesh: *mesh,
        stiffness,
        load: vec![0.0; mesh.dof_count()],
    })
}

/// Boundary nodes of the straight chain `edge`, in order from start to end.
pub fn edge_nodes(mesh: &StructuredMesh, edge: &EdgeSpec) -> Result<Vec<usize>> {
    let (i0, j0) = edge.start;
    let (i1, j1) = edge.end;
    let inside = |i: usize, j: usize| i <= mesh.nx && j <= mesh.ny;
    if !inside(i0, j0) || !inside(i1, j1) {
        return Err(Error::EdgeNotOnBoundary(format!("{edge:?} leaves the mesh")));
    }
    let nodes: Vec<(usize, usize)> = if i0 == i1 && (i0 == 0 || i0 == mesh.nx) {
        let (a, b) = (j0.min(j1), j0.max(j1));
        let mut v: Vec<_> = (a..=b).map(|j| (i0, j)).collect();
        if j1 < j0 {
            v.reverse();
        }
        v
    } else if j0 == j1 && (j0 == 0 || j0 == mesh.ny) {
        let (a, b) = (i0.min(i1), i0.max(i1));
        let mut v: Vec<_> = (a..=b).map(|i| (i, j0)).collect();
        if i1 < i0 {
            v.reverse();
        }
        v
    } else {
        return Err(Error::EdgeNotOnBoundary(format!("{edge:?}")));
    };
    if nodes.len() < 2 {
        return Err(Error::EdgeNotOnBoundary(format!("{edge:?} has zero length")));
    }
    Ok(nodes.into_iter().map(|(i, j)| mesh.node_index(i, j)).collect())
}

/// Adds consistent nodal loads of a constant traction (force per unit length)
/// applied along `edge`. Each edge element passes half its resultant to each
/// of its two nodes.
pub fn apply_traction(
    subdomain: &mut SubdomainSystem,
    edge: &EdgeSpec,
    traction: [f64; 2],
) -> Result<()> {
    let mesh = subdomain.mesh;
    let nodes = edge_nodes(&mesh, edge)?;
    let thickness_free_length = |a: usize, b: usize| {
        let pa = mesh.node_coords(a);
        let pb = mesh.node_coords(b);
        ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt()
    };
    for w in nodes.windows(2) {
        let len = thickness_free_length(w[0], w[1]);
        for &n in w {
            subdomain.load[2 * n] += 0.5 * len * traction[0];
            subdomain.load[2 * n + 1] += 0.5 * len * traction[1];
        }
    }
    Ok(())
}
