use crate::error::{Error, Result};
use crate::fem::StructuredMesh;

/// Regular `sx x sy` grid of square subdomains, each meshed with `nx x ny`
/// elements. Subdomain `s = py * sx + px`; global nodes are numbered row by
/// row on the `(sx nx + 1) x (sy ny + 1)` grid.
#[derive(Debug, Clone)]
pub struct Partition {
    sx: usize,
    sy: usize,
    nx: usize,
    ny: usize,
    module_size: f64,
    module_types: Vec<usize>,
    /// `(subdomain, local node)` copies of each global node.
    owners: Vec<Vec<(usize, usize)>>,
}

/// Builds the partition. `module_assignment` lists a type label per
/// subdomain in subdomain order; `None` gives every subdomain type 0.
pub fn build_partition(
    sx: usize,
    sy: usize,
    elems: (usize, usize),
    module_assignment: Option<&[usize]>,
) -> Result<Partition> {
    Partition::new(sx, sy, elems, 1.0, module_assignment)
}

impl Partition {
    pub fn new(
        sx: usize,
        sy: usize,
        (nx, ny): (usize, usize),
        module_size: f64,
        module_assignment: Option<&[usize]>,
    ) -> Result<Self> {
        if sx == 0 || sy == 0 || nx == 0 || ny == 0 {
            return Err(Error::DimensionMismatch(format!(
                "partition {sx}x{sy} with {nx}x{ny} elements per subdomain"
            )));
        }
        if !(module_size > 0.0) {
            return Err(Error::DomainError(format!("module size {module_size}")));
        }
        let module_types = match module_assignment {
            Some(types) if types.len() != sx * sy => {
                return Err(Error::DimensionMismatch(format!(
                    "module assignment has {} labels for {} subdomains",
                    types.len(),
                    sx * sy
                )))
            }
            Some(types) => types.to_vec(),
            None => vec![0; sx * sy],
        };
        let gnx = sx * nx + 1;
        let gny = sy * ny + 1;
        let mut owners = vec![Vec::new(); gnx * gny];
        for py in 0..sy {
            for px in 0..sx {
                let s = py * sx + px;
                for j in 0..=ny {
                    for i in 0..=nx {
                        let g = (py * ny + j) * gnx + px * nx + i;
                        owners[g].push((s, j * (nx + 1) + i));
                    }
                }
            }
        }
        Ok(Self {
            sx,
            sy,
            nx,
            ny,
            module_size,
            module_types,
            owners,
        })
    }

    pub fn grid(&self) -> (usize, usize) {
        (self.sx, self.sy)
    }

    pub fn elems_per_subdomain(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn module_size(&self) -> f64 {
        self.module_size
    }

    pub fn subdomain_count(&self) -> usize {
        self.sx * self.sy
    }

    pub fn module_type(&self, s: usize) -> usize {
        self.module_types[s]
    }

    pub fn module_types(&self) -> &[usize] {
        &self.module_types
    }

    /// `(px, py)` placement of subdomain `s`.
    pub fn placement(&self, s: usize) -> (usize, usize) {
        (s % self.sx, s / self.sx)
    }

    pub fn subdomain_mesh(&self, s: usize) -> StructuredMesh {
        let (px, py) = self.placement(s);
        let hx = self.module_size / self.nx as f64;
        let hy = self.module_size / self.ny as f64;
        StructuredMesh {
            nx: self.nx,
            ny: self.ny,
            hx,
            hy,
            origin: [px as f64 * self.module_size, py as f64 * self.module_size],
        }
    }

    /// Global node grid dimensions `(nodes in x, nodes in y)`.
    pub fn global_node_grid(&self) -> (usize, usize) {
        (self.sx * self.nx + 1, self.sy * self.ny + 1)
    }

    pub fn global_node_count(&self) -> usize {
        self.owners.len()
    }

    pub fn global_node(&self, gi: usize, gj: usize) -> Result<usize> {
        let (gnx, gny) = self.global_node_grid();
        if gi >= gnx || gj >= gny {
            return Err(Error::NodeNotFound(gi, gj));
        }
        Ok(gj * gnx + gi)
    }

    pub fn global_node_grid_position(&self, g: usize) -> (usize, usize) {
        let (gnx, _) = self.global_node_grid();
        (g % gnx, g / gnx)
    }

    /// Subdomain copies of global node `g`, ordered by subdomain index.
    pub fn owners(&self, g: usize) -> &[(usize, usize)] {
        &self.owners[g]
    }

    pub fn local_to_global(&self, s: usize, local_node: usize) -> usize {
        let (px, py) = self.placement(s);
        let (gnx, _) = self.global_node_grid();
        let i = local_node % (self.nx + 1);
        let j = local_node / (self.nx + 1);
        (py * self.ny + j) * gnx + px * self.nx + i
    }

    /// Sum of local DOF counts over all subdomains.
    pub fn total_subdomain_dofs(&self) -> usize {
        self.subdomain_count() * 2 * (self.nx + 1) * (self.ny + 1)
    }

    /// Global nodes shared by at least two subdomains.
    pub fn interface_nodes(&self) -> Vec<usize> {
        (0..self.owners.len()).filter(|&g| self.owners[g].len() >= 2).collect()
    }

    /// Global nodes shared by more than two subdomains.
    pub fn cross_points(&self) -> Vec<usize> {
        (0..self.owners.len()).filter(|&g| self.owners[g].len() > 2).collect()
    }

    /// Global nodes at the vertices of the subdomain grid.
    pub fn grid_vertices(&self) -> Vec<usize> {
        let (gnx, _) = self.global_node_grid();
        let mut out = Vec::with_capacity((self.sx + 1) * (self.sy + 1));
        for py in 0..=self.sy {
            for px in 0..=self.sx {
                out.push(py * self.ny * gnx + px * self.nx);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_subdomain_has_no_interface() {
        let p = build_partition(1, 1, (3, 3), None).unwrap();
        assert!(p.interface_nodes().is_empty());
        assert!(p.cross_points().is_empty());
    }

    #[test]
    fn two_by_two_has_one_cross_point() {
        let p = build_partition(2, 2, (4, 4), None).unwrap();
        let cp = p.cross_points();
        assert_eq!(cp.len(), 1);
        assert_eq!(p.owners(cp[0]).len(), 4);
        assert_eq!(p.global_node_grid_position(cp[0]), (4, 4));
    }

    #[test]
    fn full_scale_dof_count() {
        let p = build_partition(12, 8, (30, 30), Some(&vec![0; 96])).unwrap();
        assert_eq!(p.total_subdomain_dofs(), 184_512);
    }

    #[test]
    fn every_node_is_owned() {
        let p = build_partition(3, 2, (2, 3), None).unwrap();
        for g in 0..p.global_node_count() {
            assert!(!p.owners(g).is_empty());
            for &(s, l) in p.owners(g) {
                assert_eq!(p.local_to_global(s, l), g);
            }
        }
    }

    #[test]
    fn subdomain_meshes_tile_the_domain() {
        let p = build_partition(3, 2, (2, 2), None).unwrap();
        let m = p.subdomain_mesh(4);
        assert_eq!(m.origin, [1.0, 1.0]);
        assert_eq!(m.hx, 0.5);
    }

    #[test]
    fn assignment_size_checked() {
        assert!(matches!(
            build_partition(2, 2, (2, 2), Some(&[0, 1, 2])),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(build_partition(0, 2, (2, 2), None).is_err());
    }
}
