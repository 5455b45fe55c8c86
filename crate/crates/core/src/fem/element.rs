//! Bilinear quadrilateral (Q4) plane-stress element on a rectangle.

use crate::error::{Error, Result};
use crate::fem::material::Material;

pub type ElementMatrix = [[f64; 8]; 8];

/// Plane-stress constitutive matrix for unit Young's modulus.
fn unit_constitutive(nu: f64) -> [[f64; 3]; 3] {
    let c = 1.0 / (1.0 - nu * nu);
    [[c, c * nu, 0.0], [c * nu, c, 0.0], [0.0, 0.0, c * (1.0 - nu) / 2.0]]
}

/// Element stiffness for unit modulus, integrated with 2x2 Gauss points.
///
/// Natural coordinates: nodes at (-1,-1), (1,-1), (1,1), (-1,1).
pub fn q4_unit_stiffness(nu: f64, thickness: f64, hx: f64, hy: f64) -> ElementMatrix {
    const XI: [f64; 4] = [-1.0, 1.0, 1.0, -1.0];
    const ETA: [f64; 4] = [-1.0, -1.0, 1.0, 1.0];
    let g = 1.0 / 3.0_f64.sqrt();
    let gauss = [(-g, -g), (g, -g), (g, g), (-g, g)];
    let d = unit_constitutive(nu);
    let det_j = hx * hy / 4.0;
    let mut k = [[0.0; 8]; 8];
    for &(xi, eta) in &gauss {
        // Shape-function derivatives in physical coordinates.
        let mut dndx = [0.0; 4];
        let mut dndy = [0.0; 4];
        for a in 0..4 {
            dndx[a] = 0.25 * XI[a] * (1.0 + ETA[a] * eta) * 2.0 / hx;
            dndy[a] = 0.25 * ETA[a] * (1.0 + XI[a] * xi) * 2.0 / hy;
        }
        let mut b = [[0.0; 8]; 3];
        for a in 0..4 {
            b[0][2 * a] = dndx[a];
            b[1][2 * a + 1] = dndy[a];
            b[2][2 * a] = dndy[a];
            b[2][2 * a + 1] = dndx[a];
        }
        let mut db = [[0.0; 8]; 3];
        for r in 0..3 {
            for c in 0..8 {
                db[r][c] = (0..3).map(|s| d[r][s] * b[s][c]).sum();
            }
        }
        let w = det_j * thickness;
        for i in 0..8 {
            for j in 0..8 {
                let v: f64 = (0..3).map(|s| b[s][i] * db[s][j]).sum();
                k[i][j] += w * v;
            }
        }
    }
    // Exact symmetry.
    for i in 0..8 {
        for j in 0..i {
            let avg = 0.5 * (k[i][j] + k[j][i]);
            k[i][j] = avg;
            k[j][i] = avg;
        }
    }
    // The four nodal diagonals per direction agree analytically; make them
    // agree bitwise so identical neighbours assemble identical diagonals.
    for d in 0..2 {
        let mean = (0..4).map(|a| k[2 * a + d][2 * a + d]).sum::<f64>() / 4.0;
        for a in 0..4 {
            k[2 * a + d][2 * a + d] = mean;
        }
    }
    k
}

/// Element stiffness for a given Young's modulus: `modulus * K_unit`.
pub fn q4_element_stiffness(mat: &Material, modulus: f64, hx: f64, hy: f64) -> Result<ElementMatrix> {
    if !(modulus > 0.0) {
        return Err(Error::DomainError(format!("modulus {modulus} must be positive")));
    }
    if !(hx > 0.0 && hy > 0.0) {
        return Err(Error::DomainError(format!("element sizes must be positive: {hx}, {hy}")));
    }
    let mut k = q4_unit_stiffness(mat.nu, mat.thickness, hx, hy);
    for row in k.iter_mut() {
        for v in row.iter_mut() {
            *v *= modulus;
        }
    }
    Ok(k)
}
