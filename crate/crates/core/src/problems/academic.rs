//! Layered and inclusion benchmarks on regular partitions: a cantilever
//! clamped on the left edge and loaded by a constant traction on the right
//! edge.

use serde::{Deserialize, Serialize};

use crate::decomposition::DirichletCondition;
use crate::error::{Error, Result};
use crate::fem::{DensityField, EdgeSpec, Material, StructuredMesh};
use crate::problems::spec::{ProblemSpec, TractionLoad};

/// Default stiff-to-compliant modulus ratio of the academic presets.
pub const DEFAULT_CONTRAST: f64 = 1e4;

/// Shared settings of the academic presets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcademicOptions {
    /// Elements per subdomain `(nx, ny)`.
    pub elems: (usize, usize),
    pub contrast: f64,
    /// Traction on the loaded edge: tangential and normal components.
    pub traction: [f64; 2],
    /// Number of horizontal layers (layered presets).
    pub layers: Option<usize>,
    /// Side of the stiff inclusion in elements (inclusion preset).
    pub inclusion: Option<usize>,
}

impl Default for AcademicOptions {
    fn default() -> Self {
        Self {
            elems: (14, 14),
            contrast: DEFAULT_CONTRAST,
            traction: [1.0, 1.0],
            layers: None,
            inclusion: None,
        }
    }
}

impl AcademicOptions {
    pub fn with_elems(n: usize) -> Self {
        Self {
            elems: (n, n),
            ..Self::default()
        }
    }
}

fn material(contrast: f64) -> Result<Material> {
    if contrast == 1.0 {
        Ok(Material::default())
    } else {
        Material::two_phase(1.0, contrast)
    }
}

/// Density 1 is the stiff phase; with contrast 1 every element is stiff.
fn phase(stiff: bool, contrast: f64) -> f64 {
    if stiff || contrast == 1.0 {
        1.0
    } else {
        0.0
    }
}

fn layered_density(nx: usize, ny: usize, layers: usize, contrast: f64) -> Result<DensityField> {
    if layers == 0 || !ny.is_multiple_of(layers) {
        return Err(Error::DimensionMismatch(format!(
            "{ny} element rows cannot be split into {layers} equal layers"
        )));
    }
    let rows = ny / layers;
    // Bottom layer stiff, then alternating.
    DensityField::from_fn(nx, ny, |_, j| phase((j / rows).is_multiple_of(2), contrast))
}

fn cantilever(
    name: &str,
    grid: (usize, usize),
    opts: &AcademicOptions,
    density: DensityField,
) -> Result<ProblemSpec> {
    let (sx, sy) = grid;
    let (nx, ny) = opts.elems;
    let gnx = sx * nx + 1;
    let gny = sy * ny + 1;
    let mut dirichlet = Vec::with_capacity(2 * gny);
    for j in 0..gny {
        for direction in 0..2 {
            dirichlet.push(DirichletCondition { node: j * gnx, direction, value: 0.0 });
        }
    }
    let mesh = StructuredMesh::new(nx, ny, 1.0 / nx as f64, 1.0 / ny as f64, [0.0, 0.0])?;
    let tractions = (0..sy)
        .map(|py| TractionLoad {
            subdomain: py * sx + sx - 1,
            edge: EdgeSpec::right(&mesh),
            traction: opts.traction,
        })
        .collect();
    Ok(ProblemSpec {
        name: name.into(),
        grid,
        elems: opts.elems,
        module_types: vec![0; sx * sy],
        type_densities: vec![density],
        material: material(opts.contrast)?,
        dirichlet,
        tractions,
        point_loads: Vec::new(),
        contrast: opts.contrast,
    })
}

fn check_contrast(contrast: f64) -> Result<()> {
    if !(contrast >= 1.0 && contrast.is_finite()) {
        return Err(Error::DomainError(format!("contrast {contrast} must be at least 1")));
    }
    Ok(())
}

/// A row of nine laminated squares with seven horizontal layers each.
pub fn laminated_beam(opts: &AcademicOptions) -> Result<ProblemSpec> {
    check_contrast(opts.contrast)?;
    let layers = opts.layers.unwrap_or(7);
    if layers.is_multiple_of(2) {
        return Err(Error::DomainError(format!("laminated beam needs an odd layer count, got {layers}")));
    }
    let (nx, ny) = opts.elems;
    let density = layered_density(nx, ny, layers, opts.contrast)?;
    cantilever("laminated", (9, 1), opts, density)
}

/// A 3x3 grid of identical layered squares. The default uses an even number
/// of layers, so the stiff bottom layer of one square meets the compliant
/// top layer of the square below it.
pub fn grid3x3_layered(opts: &AcademicOptions) -> Result<ProblemSpec> {
    check_contrast(opts.contrast)?;
    let layers = opts.layers.unwrap_or(4);
    let (nx, ny) = opts.elems;
    let density = layered_density(nx, ny, layers, opts.contrast)?;
    cantilever("grid3x3", (3, 3), opts, density)
}

/// A 4x4 grid of compliant squares, each with a centered stiff square
/// inclusion that stays clear of the subdomain boundary.
pub fn grid4x4_inclusion(opts: &AcademicOptions) -> Result<ProblemSpec> {
    check_contrast(opts.contrast)?;
    let (nx, ny) = opts.elems;
    let side = opts.inclusion.unwrap_or(nx.min(ny) / 2);
    if side > 0 && (side + 2 > nx || side + 2 > ny || !(nx - side).is_multiple_of(2) || !(ny - side).is_multiple_of(2)) {
        return Err(Error::DimensionMismatch(format!(
            "inclusion of {side} elements cannot be centered inside {nx}x{ny} without touching the boundary"
        )));
    }
    let (ox, oy) = ((nx - side.min(nx)) / 2, (ny - side.min(ny)) / 2);
    let density = DensityField::from_fn(nx, ny, |i, j| {
        let inside = side > 0 && (ox..ox + side).contains(&i) && (oy..oy + side).contains(&j);
        // With contrast 1 both phases coincide.
        if inside || opts.contrast == 1.0 {
            1.0
        } else {
            0.0
        }
    })?;
    cantilever("inclusion", (4, 4), opts, density)
}

/// Names accepted by [`academic_preset`].
pub const ACADEMIC_PRESETS: [&str; 3] = ["laminated", "grid3x3", "inclusion"];

pub fn academic_preset(name: &str, opts: &AcademicOptions) -> Result<ProblemSpec> {
    match name {
        "laminated" => laminated_beam(opts),
        "grid3x3" => grid3x3_layered(opts),
        "inclusion" => grid4x4_inclusion(opts),
        other => Err(Error::Config(format!("unknown academic preset '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laminated_defaults() {
        let p = laminated_beam(&AcademicOptions::default()).unwrap();
        assert_eq!(p.grid, (9, 1));
        let d = &p.type_densities[0];
        // 14 rows, 7 layers of 2 rows: stiff, compliant, ..., stiff.
        let rows: Vec<f64> = (0..14).map(|j| d.get(0, j)).collect();
        assert_eq!(rows[..4], [1.0, 1.0, 0.0, 0.0]);
        assert_eq!(rows[12..], [1.0, 1.0]);
    }

    #[test]
    fn laminated_rejects_indivisible_rows() {
        let err = laminated_beam(&AcademicOptions::with_elems(8)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn unit_contrast_is_homogeneous() {
        let opts = AcademicOptions { contrast: 1.0, ..AcademicOptions::with_elems(8) };
        for name in ["grid3x3", "inclusion"] {
            let p = academic_preset(name, &opts).unwrap();
            assert!(p.type_densities[0].values().iter().all(|&v| v == 1.0));
        }
    }

    #[test]
    fn inclusion_stays_inside() {
        let p = grid4x4_inclusion(&AcademicOptions::with_elems(8)).unwrap();
        let d = &p.type_densities[0];
        assert_eq!(d.values().iter().filter(|&&v| v == 1.0).count(), 16);
        for k in 0..8 {
            assert_eq!(d.get(k, 0), 0.0);
            assert_eq!(d.get(0, k), 0.0);
            assert_eq!(d.get(7, k), 0.0);
            assert_eq!(d.get(k, 7), 0.0);
        }
        let empty = AcademicOptions { inclusion: Some(0), ..AcademicOptions::with_elems(8) };
        assert!(grid4x4_inclusion(&empty).unwrap().type_densities[0].values().iter().all(|&v| v == 0.0));
        let touching = AcademicOptions { inclusion: Some(8), ..AcademicOptions::with_elems(8) };
        assert!(grid4x4_inclusion(&touching).is_err());
    }

    #[test]
    fn presets_are_deterministic() {
        let opts = AcademicOptions::with_elems(8);
        assert_eq!(grid3x3_layered(&opts).unwrap(), grid3x3_layered(&opts).unwrap());
    }
}
