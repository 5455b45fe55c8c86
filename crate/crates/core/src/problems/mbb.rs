//! Modular MBB beam: a 12x8 grid of unit square modules drawn from 16
//! module types, supported at both bottom corners and loaded at the top
//! midspan.

use crate::decomposition::DirichletCondition;
use crate::error::{Error, Result};
use crate::fem::{DensityField, Material};
use crate::problems::spec::{PointLoad, ProblemSpec};

/// Stored module-type layout: header `sx sy`, then `sy` rows of 1-based
/// labels, bottom row first. Mirror-symmetric about the vertical midline.
pub const DEFAULT_LAYOUT: &str = include_str!("../../data/mbb_modules.txt");

pub const MBB_GRID: (usize, usize) = (12, 8);

/// Parses a layout into 0-based module types in subdomain order.
pub fn parse_layout(text: &str) -> Result<((usize, usize), Vec<usize>)> {
    let mut tokens = text.split_whitespace();
    let mut next = |what: &str| -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| Error::Parse(format!("layout is missing {what}")))?
            .parse::<usize>()
            .map_err(|e| Error::Parse(format!("bad {what} in layout: {e}")))
    };
    let sx = next("width")?;
    let sy = next("height")?;
    let mut labels = Vec::with_capacity(sx * sy);
    for _ in 0..sx * sy {
        let l = next("label")?;
        if l == 0 {
            return Err(Error::Parse("module labels start at 1".into()));
        }
        labels.push(l - 1);
    }
    if tokens.next().is_some() {
        return Err(Error::Parse(format!("layout has more than {sx}x{sy} labels")));
    }
    let types = labels.iter().copied().max().map_or(0, |m| m + 1);
    if let Some(t) = (0..types).find(|t| !labels.contains(t)) {
        return Err(Error::Parse(format!("module label {} is never used", t + 1)));
    }
    Ok(((sx, sy), labels))
}

/// Options of the modular MBB problem.
#[derive(Debug, Clone, PartialEq)]
pub struct MbbOptions {
    /// Elements per module side.
    pub elems: usize,
    /// Module-type layout text; `None` uses [`DEFAULT_LAYOUT`].
    pub layout: Option<String>,
    pub material: Material,
    /// Initial uniform density.
    pub density: f64,
}

impl Default for MbbOptions {
    fn default() -> Self {
        Self {
            elems: 30,
            layout: None,
            material: Material::default(),
            density: 0.5,
        }
    }
}

impl MbbOptions {
    pub fn with_elems(elems: usize) -> Self {
        Self { elems, ..Self::default() }
    }
}

/// The MBB problem with a uniform density in every module type.
pub fn mbb_problem(opts: &MbbOptions) -> Result<ProblemSpec> {
    let ((sx, sy), module_types) = parse_layout(opts.layout.as_deref().unwrap_or(DEFAULT_LAYOUT))?;
    let n = opts.elems;
    if n == 0 {
        return Err(Error::DomainError("modules need at least one element".into()));
    }
    if !n.is_multiple_of(2) && sx % 2 != 0 {
        return Err(Error::DomainError("midspan falls between nodes".into()));
    }
    let types = module_types.iter().max().map_or(0, |m| m + 1);
    let (gnx, gny) = (sx * n + 1, sy * n + 1);
    let dirichlet = [0, gnx - 1]
        .into_iter()
        .flat_map(|node| (0..2).map(move |direction| DirichletCondition { node, direction, value: 0.0 }))
        .collect();
    let load = PointLoad {
        node: (gny - 1) * gnx + (gnx - 1) / 2,
        force: [0.0, -1.0],
    };
    Ok(ProblemSpec {
        name: "mbb".into(),
        grid: (sx, sy),
        elems: (n, n),
        module_types,
        type_densities: vec![DensityField::uniform(n, n, opts.density)?; types],
        material: opts.material,
        dirichlet,
        tractions: Vec::new(),
        point_loads: vec![load],
        contrast: opts.material.e0 / opts.material.emin,
    })
}
