use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Regular grid of `nx x ny` rectangular elements.
///
/// Nodes are numbered row by row, `node = j * (nx + 1) + i`, with two DOFs per
/// node (`2 node` for x, `2 node + 1` for y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructuredMesh {
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    /// Coordinates of node (0, 0).
    pub origin: [f64; 2],
}

impl StructuredMesh {
    pub fn new(nx: usize, ny: usize, hx: f64, hy: f64, origin: [f64; 2]) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::DomainError(format!("mesh needs at least one element, got {nx}x{ny}")));
        }
        if !(hx > 0.0 && hy > 0.0) {
            return Err(Error::DomainError(format!("element sizes must be positive: {hx}, {hy}")));
        }
        Ok(Self { nx, ny, hx, hy, origin })
    }

    pub fn node_count(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn dof_count(&self) -> usize {
        2 * self.node_count()
    }

    pub fn element_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn node_grid(&self, node: usize) -> (usize, usize) {
        (node % (self.nx + 1), node / (self.nx + 1))
    }

    pub fn node_coords(&self, node: usize) -> [f64; 2] {
        let (i, j) = self.node_grid(node);
        [self.origin[0] + i as f64 * self.hx, self.origin[1] + j as f64 * self.hy]
    }

    pub fn centroid(&self) -> [f64; 2] {
        [
            self.origin[0] + 0.5 * self.nx as f64 * self.hx,
            self.origin[1] + 0.5 * self.ny as f64 * self.hy,
        ]
    }

    /// Element index, row-major like the density grid.
    pub fn element_index(&self, ei: usize, ej: usize) -> usize {
        ej * self.nx + ei
    }

    /// Counter-clockwise nodes of element `(ei, ej)` starting bottom-left.
    pub fn element_nodes(&self, ei: usize, ej: usize) -> [usize; 4] {
        [
            self.node_index(ei, ej),
            self.node_index(ei + 1, ej),
            self.node_index(ei + 1, ej + 1),
            self.node_index(ei, ej + 1),
        ]
    }

    pub fn element_dofs(&self, ei: usize, ej: usize) -> [usize; 8] {
        let n = self.element_nodes(ei, ej);
        [
            2 * n[0],
            2 * n[0] + 1,
            2 * n[1],
            2 * n[1] + 1,
            2 * n[2],
            2 * n[2] + 1,
            2 * n[3],
            2 * n[3] + 1,
        ]
    }

    pub fn is_boundary_node(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.nx || j == self.ny
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.node_count())
            .filter(|&n| {
                let (i, j) = self.node_grid(n);
                self.is_boundary_node(i, j)
            })
            .collect()
    }
}
