use nalgebra::DMatrix;

use crate::fem::StructuredMesh;

/// Rigid-body modes of a 2D subdomain: x-translation, y-translation and the
/// in-plane rotation about the subdomain centroid.
pub fn rigid_body_modes(mesh: &StructuredMesh) -> DMatrix<f64> {
    let n = mesh.node_count();
    let c = mesh.centroid();
    let mut r = DMatrix::zeros(2 * n, 3);
    for node in 0..n {
        let [x, y] = mesh.node_coords(node);
        r[(2 * node, 0)] = 1.0;
        r[(2 * node + 1, 1)] = 1.0;
        r[(2 * node, 2)] = -(y - c[1]);
        r[(2 * node + 1, 2)] = x - c[0];
    }
    r
}
