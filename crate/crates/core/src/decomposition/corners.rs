use crate::decomposition::partition::Partition;
use crate::error::{Error, Result};

/// Primal corner nodes for FETI-DP: the vertices of the subdomain grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerSet {
    nodes: Vec<usize>,
    is_corner: Vec<bool>,
}

pub fn select_corners(partition: &Partition) -> Result<CornerSet> {
    let nodes = partition.grid_vertices();
    let mut is_corner = vec![false; partition.global_node_count()];
    for &g in &nodes {
        is_corner[g] = true;
    }
    // A subdomain needs at least two corner nodes (four DOFs) so that fixing
    // them removes all three rigid modes.
    let (nx, ny) = partition.elems_per_subdomain();
    for s in 0..partition.subdomain_count() {
        let count = [(0, 0), (nx, 0), (0, ny), (nx, ny)]
            .iter()
            .filter(|&&(i, j)| is_corner[partition.local_to_global(s, j * (nx + 1) + i)])
            .count();
        if count < 2 {
            return Err(Error::InsufficientCorners(s));
        }
    }
    Ok(CornerSet { nodes, is_corner })
}

impl CornerSet {
    /// Corner global nodes in ascending order.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn contains(&self, global_node: usize) -> bool {
        self.is_corner.get(global_node).copied().unwrap_or(false)
    }

    pub fn primal_dof_count(&self) -> usize {
        2 * self.nodes.len()
    }
}
