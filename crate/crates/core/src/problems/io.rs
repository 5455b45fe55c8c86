//! Problem files: a TOML description that references a global density grid
//! stored next to it in the density text format.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::decomposition::DirichletCondition;
use crate::error::{Error, Result};
use crate::fem::{DensityField, Material};
use crate::problems::spec::{PointLoad, ProblemSpec, TractionLoad};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ProblemFile {
    name: String,
    grid: [usize; 2],
    elems: [usize; 2],
    contrast: f64,
    /// Density grid file, relative to the problem file.
    density: String,
    module_types: Vec<usize>,
    material: Material,
    #[serde(default)]
    dirichlet: Vec<DirichletCondition>,
    #[serde(default)]
    tractions: Vec<TractionLoad>,
    #[serde(default)]
    point_loads: Vec<PointLoad>,
}

/// Serializes `problem` to TOML referencing `density_file`.
pub fn problem_to_toml(problem: &ProblemSpec, density_file: &str) -> Result<String> {
    let file = ProblemFile {
        name: problem.name.clone(),
        grid: [problem.grid.0, problem.grid.1],
        elems: [problem.elems.0, problem.elems.1],
        contrast: problem.contrast,
        density: density_file.into(),
        module_types: problem.module_types.clone(),
        material: problem.material,
        dirichlet: problem.dirichlet.clone(),
        tractions: problem.tractions.clone(),
        point_loads: problem.point_loads.clone(),
    };
    toml::to_string(&file).map_err(|e| Error::Parse(e.to_string()))
}

/// Parses a problem description; `density` is the global grid it refers to.
pub fn problem_from_toml(text: &str, density: impl FnOnce(&str) -> Result<DensityField>) -> Result<ProblemSpec> {
    let file: ProblemFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let types = file.module_types.iter().max().map_or(0, |m| m + 1);
    let (nx, ny) = (file.elems[0], file.elems[1]);
    let mut problem = ProblemSpec {
        name: file.name,
        grid: (file.grid[0], file.grid[1]),
        elems: (nx, ny),
        module_types: file.module_types,
        type_densities: vec![DensityField::uniform(nx, ny, 0.0)?; types],
        material: file.material,
        dirichlet: file.dirichlet,
        tractions: file.tractions,
        point_loads: file.point_loads,
        contrast: file.contrast,
    };
    problem.validate()?;
    problem.set_from_global_density(&density(&file.density)?)?;
    Ok(problem)
}

/// Writes `<stem>.problem` and `<stem>.rho` into `dir`.
pub fn write_problem(dir: &Path, stem: &str, problem: &ProblemSpec) -> Result<PathBuf> {
    let rho = format!("{stem}.rho");
    problem.global_density()?.write(&dir.join(&rho))?;
    let path = dir.join(format!("{stem}.problem"));
    std::fs::write(&path, problem_to_toml(problem, &rho)?)?;
    Ok(path)
}

pub fn read_problem(path: &Path) -> Result<ProblemSpec> {
    let text = std::fs::read_to_string(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    problem_from_toml(&text, |name| DensityField::read(&dir.join(name)))
}

/// Writes `snapshot_<iter>.problem` and `snapshot_<iter>.rho`.
pub fn write_snapshot(dir: &Path, iteration: usize, problem: &ProblemSpec) -> Result<PathBuf> {
    write_problem(dir, &format!("snapshot_{iteration}"), problem)
}
