//! Problem definitions: partition layout, per-module-type densities,
//! material, supports and loads.

use serde::{Deserialize, Serialize};

use crate::decomposition::{DirichletCondition, Partition};
use crate::error::{Error, Result};
use crate::fem::{apply_traction, assemble_subdomain, DensityField, EdgeSpec, Material, SubdomainSystem};

/// Constant traction on a boundary edge of one subdomain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TractionLoad {
    pub subdomain: usize,
    pub edge: EdgeSpec,
    pub traction: [f64; 2],
}

/// Nodal force at a global node. It is applied to the node's first
/// subdomain copy only, so the assembled global load counts it once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointLoad {
    pub node: usize,
    pub force: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub name: String,
    /// Subdomain grid `(sx, sy)`.
    pub grid: (usize, usize),
    /// Elements per subdomain `(nx, ny)`.
    pub elems: (usize, usize),
    /// Module type per subdomain, in subdomain order.
    pub module_types: Vec<usize>,
    /// Density field of each module type.
    pub type_densities: Vec<DensityField>,
    pub material: Material,
    pub dirichlet: Vec<DirichletCondition>,
    pub tractions: Vec<TractionLoad>,
    pub point_loads: Vec<PointLoad>,
    /// Stiff-to-compliant modulus ratio the problem was generated with.
    pub contrast: f64,
}

/// Assembled subdomain systems ready for the dual solvers.
#[derive(Debug, Clone)]
pub struct Substructures {
    pub partition: Partition,
    pub subdomains: Vec<SubdomainSystem>,
    pub dirichlet: Vec<DirichletCondition>,
}

impl Substructures {
    pub fn len(&self) -> usize {
        self.subdomains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subdomains.is_empty()
    }

    pub fn loads(&self) -> Vec<Vec<f64>> {
        self.subdomains.iter().map(|s| s.load.clone()).collect()
    }
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        let (sx, sy) = self.grid;
        let (nx, ny) = self.elems;
        if self.module_types.len() != sx * sy {
            return Err(Error::DimensionMismatch(format!(
                "{} module labels for a {sx}x{sy} grid",
                self.module_types.len()
            )));
        }
        if let Some(&t) = self.module_types.iter().find(|&&t| t >= self.type_densities.len()) {
            return Err(Error::DimensionMismatch(format!(
                "module type {t} has no density field ({} defined)",
                self.type_densities.len()
            )));
        }
        if let Some(d) = self.type_densities.iter().find(|d| d.nx() != nx || d.ny() != ny) {
            return Err(Error::DimensionMismatch(format!(
                "density grid {}x{} vs {nx}x{ny} elements per subdomain",
                d.nx(),
                d.ny()
            )));
        }
        self.material.validate()
    }

    pub fn partition(&self) -> Result<Partition> {
        Partition::new(self.grid.0, self.grid.1, self.elems, 1.0, Some(&self.module_types))
    }

    pub fn subdomain_count(&self) -> usize {
        self.grid.0 * self.grid.1
    }

    pub fn density_of(&self, s: usize) -> &DensityField {
        &self.type_densities[self.module_types[s]]
    }

    /// Assembles every subdomain; subdomains of one module type share the
    /// same stiffness matrix values.
    pub fn substructure(&self) -> Result<Substructures> {
        self.validate()?;
        let partition = self.partition()?;
        let mesh0 = partition.subdomain_mesh(0);
        let mut by_type = Vec::with_capacity(self.type_densities.len());
        for d in &self.type_densities {
            by_type.push(assemble_subdomain(&mesh0, d, &self.material)?.stiffness);
        }
        let mut subdomains: Vec<SubdomainSystem> = (0..partition.subdomain_count())
            .map(|s| {
                let mesh = partition.subdomain_mesh(s);
                SubdomainSystem {
                    mesh,
                    stiffness: by_type[self.module_types[s]].clone(),
                    load: vec![0.0; mesh.dof_count()],
                }
            })
            .collect();
        for t in &self.tractions {
            let sub = subdomains.get_mut(t.subdomain).ok_or_else(|| {
                Error::DimensionMismatch(format!("traction on missing subdomain {}", t.subdomain))
            })?;
            apply_traction(sub, &t.edge, t.traction)?;
        }
        for p in &self.point_loads {
            if p.node >= partition.global_node_count() {
                let (gnx, _) = partition.global_node_grid();
                return Err(Error::NodeNotFound(p.node % gnx, p.node / gnx));
            }
            let (s, l) = partition.owners(p.node)[0];
            subdomains[s].load[2 * l] += p.force[0];
            subdomains[s].load[2 * l + 1] += p.force[1];
        }
        Ok(Substructures {
            partition,
            subdomains,
            dirichlet: self.dirichlet.clone(),
        })
    }

    /// Densities on the global element grid (row-major, bottom row first).
    pub fn global_density(&self) -> Result<DensityField> {
        let (sx, sy) = self.grid;
        let (nx, ny) = self.elems;
        DensityField::from_fn(sx * nx, sy * ny, |i, j| {
            let s = (j / ny) * sx + i / nx;
            self.density_of(s).get(i % nx, j % ny)
        })
    }

    /// Per-type density fields taken from a global grid at the first
    /// occurrence of each module type.
    pub fn set_from_global_density(&mut self, global: &DensityField) -> Result<()> {
        let (sx, sy) = self.grid;
        let (nx, ny) = self.elems;
        if global.nx() != sx * nx || global.ny() != sy * ny {
            return Err(Error::DimensionMismatch(format!(
                "global density {}x{} vs {}x{}",
                global.nx(),
                global.ny(),
                sx * nx,
                sy * ny
            )));
        }
        for t in 0..self.type_densities.len() {
            let Some(s) = self.module_types.iter().position(|&m| m == t) else { continue };
            let (px, py) = (s % sx, s / sx);
            self.type_densities[t] = DensityField::from_fn(nx, ny, |i, j| global.get(px * nx + i, py * ny + j))?;
        }
        Ok(())
    }
}
