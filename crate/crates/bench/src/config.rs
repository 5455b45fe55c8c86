//! Run configuration. Every flag has a same-named key in the TOML config
//! file; flags given on the command line win over the file.
//!
//! List-valued options (`method`, `scaling`, `directions`, `snapshot-iters`)
//! take comma-separated values or `all`; in the file they may also be
//! arrays.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Deserializer, Serialize};

use feti_core::decomposition::ScalingKind;
use feti_core::precond::PrecondKind;
use feti_core::problems::{
    academic_preset, mbb_modular_snapshot, read_problem, AcademicOptions, MbbOptions, ProblemSpec, SimpOptions,
    ACADEMIC_PRESETS, DEFAULT_CONTRAST,
};
use feti_core::solver::{DirectionMode, SolveOptions, ToleranceMode};
use feti_core::variant::{Method, Variant};

use crate::{io_err, BenchError, Result};

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunArgs {
    /// Preset (laminated, grid3x3, inclusion, mbb) or a `.problem` file.
    #[arg(long)]
    pub problem: Option<String>,
    /// tfeti, fetidp or all.
    #[arg(long)]
    #[serde(default, deserialize_with = "list")]
    pub method: Option<String>,
    /// multiplicity (mult), k or all.
    #[arg(long)]
    #[serde(default, deserialize_with = "list")]
    pub scaling: Option<String>,
    /// single, fo, rrs or all.
    #[arg(long)]
    #[serde(default, deserialize_with = "list")]
    pub directions: Option<String>,
    /// dirichlet, lumped or superlumped.
    #[arg(long)]
    pub precond: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// rel or abs.
    #[arg(long)]
    pub tol_mode: Option<String>,
    #[arg(long)]
    pub maxit: Option<usize>,
    /// Elements per subdomain edge.
    #[arg(long)]
    pub elems: Option<usize>,
    /// Stiff-to-compliant modulus ratio (E0/Emin for mbb).
    #[arg(long)]
    pub contrast: Option<f64>,
    /// Existing output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optimization iterations to freeze for the mbb problem.
    #[arg(long)]
    #[serde(default, deserialize_with = "list")]
    pub snapshot_iters: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// TOML file with defaults for any of the flags above.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

/// Accepts `"a,b"`, `["a", "b"]`, `30` or `[0, 30]`.
fn list<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Item {
        Text(String),
        Int(u64),
    }
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Value {
        One(Item),
        Many(Vec<Item>),
    }
    let text = |i: Item| match i {
        Item::Text(s) => s,
        Item::Int(n) => n.to_string(),
    };
    Ok(Option::<Value>::deserialize(d)?.map(|v| match v {
        Value::One(i) => text(i),
        Value::Many(items) => items.into_iter().map(text).collect::<Vec<_>>().join(","),
    }))
}

impl RunArgs {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        toml::from_str(&text).map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `self` win over `base`.
    pub fn over(self, base: RunArgs) -> RunArgs {
        RunArgs {
            problem: self.problem.or(base.problem),
            method: self.method.or(base.method),
            scaling: self.scaling.or(base.scaling),
            directions: self.directions.or(base.directions),
            precond: self.precond.or(base.precond),
            tol: self.tol.or(base.tol),
            tol_mode: self.tol_mode.or(base.tol_mode),
            maxit: self.maxit.or(base.maxit),
            elems: self.elems.or(base.elems),
            contrast: self.contrast.or(base.contrast),
            out: self.out.or(base.out),
            snapshot_iters: self.snapshot_iters.or(base.snapshot_iters),
            seed: self.seed.or(base.seed),
            config: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Academic(String),
    Mbb,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemSource,
    pub variants: Vec<Variant>,
    pub precond: PrecondKind,
    pub solve: SolveOptions,
    /// `None` keeps the per-problem default.
    pub elems: Option<usize>,
    pub contrast: Option<f64>,
    pub out: PathBuf,
    pub snapshot_iters: Vec<usize>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::from_args(RunArgs::default()).expect("defaults are valid")
    }
}

fn split(v: &Option<String>) -> Vec<String> {
    match v {
        None => vec!["all".into()],
        Some(s) => s.split(',').map(|t| t.trim().to_ascii_lowercase()).filter(|t| !t.is_empty()).collect(),
    }
}

fn pick<T: Copy + PartialEq>(field: &str, value: &Option<String>, names: &[(&str, T)]) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for token in split(value) {
        let chosen: Vec<T> = if token == "all" {
            names.iter().map(|&(_, v)| v).collect()
        } else {
            let hit = names.iter().find(|(n, _)| *n == token);
            vec![hit.ok_or_else(|| BenchError::Config(format!("unknown {field} '{token}'")))?.1]
        };
        for c in chosen {
            if !out.contains(&c) {
                out.push(c);
            }
        }
    }
    if out.is_empty() {
        return Err(BenchError::Config(format!("no {field} selected")));
    }
    Ok(out)
}

impl RunConfig {
    /// Loads `args.config` if given, applies the flags on top and validates.
    pub fn load(args: RunArgs) -> Result<Self> {
        let merged = match &args.config {
            Some(path) => {
                let file = RunArgs::from_file(path)?;
                args.over(file)
            }
            None => args,
        };
        Self::from_args(merged)
    }

    pub fn from_args(a: RunArgs) -> Result<Self> {
        let problem = match a.problem.as_deref().unwrap_or("grid3x3") {
            "mbb" => ProblemSource::Mbb,
            name if ACADEMIC_PRESETS.contains(&name) => ProblemSource::Academic(name.to_string()),
            path if path.ends_with(".problem") => ProblemSource::File(PathBuf::from(path)),
            other => return Err(BenchError::Config(format!("unknown problem '{other}'"))),
        };
        let methods = pick("method", &a.method, &[("tfeti", Method::Tfeti), ("fetidp", Method::Fetidp)])?;
        let scalings = pick(
            "scaling",
            &a.scaling,
            &[("multiplicity", ScalingKind::Multiplicity), ("mult", ScalingKind::Multiplicity), ("k", ScalingKind::K)],
        )?;
        let dirs = pick(
            "directions",
            &a.directions,
            &[("single", DirectionMode::Single), ("fo", DirectionMode::Fo), ("rrs", DirectionMode::Rrs)],
        )?;
        let variants = Variant::all()
            .into_iter()
            .filter(|v| methods.contains(&v.method) && scalings.contains(&v.scaling) && dirs.contains(&v.directions))
            .collect();

        let precond = match a.precond.as_deref().unwrap_or("dirichlet") {
            "dirichlet" => PrecondKind::Dirichlet,
            "lumped" => PrecondKind::Lumped,
            "superlumped" => PrecondKind::Superlumped,
            other => return Err(BenchError::Config(format!("unknown precond '{other}'"))),
        };
        let tol_mode = match a.tol_mode.as_deref().unwrap_or("rel") {
            "rel" => ToleranceMode::Rel,
            "abs" => ToleranceMode::Abs,
            other => return Err(BenchError::Config(format!("unknown tol-mode '{other}'"))),
        };
        let defaults = SolveOptions::default();
        let solve = SolveOptions {
            tolerance: a.tol.unwrap_or(defaults.tolerance),
            tol_mode,
            max_iterations: a.maxit.unwrap_or(defaults.max_iterations),
            ..defaults
        };
        solve.validate()?;

        if a.elems == Some(0) {
            return Err(BenchError::Config("elems must be positive".into()));
        }
        if let Some(c) = a.contrast {
            if !(c.is_finite() && c >= 1.0) {
                return Err(BenchError::Config(format!("contrast must be >= 1, got {c}")));
            }
        }
        let snapshot_iters = match &a.snapshot_iters {
            None => vec![30],
            Some(s) => s
                .split(',')
                .map(|t| t.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| BenchError::Config(format!("snapshot-iters '{s}': {e}")))?,
        };
        if snapshot_iters.is_empty() {
            return Err(BenchError::Config("no snapshot iteration selected".into()));
        }
        Ok(Self {
            problem,
            variants,
            precond,
            solve,
            elems: a.elems,
            contrast: a.contrast,
            out: a.out.unwrap_or_else(|| PathBuf::from(".")),
            snapshot_iters,
            seed: a.seed.unwrap_or(0),
        })
    }

    /// Effective settings in config-file form.
    pub fn to_args(&self) -> RunArgs {
        let join = |v: Vec<&str>| Some(v.join(","));
        let mut methods = Vec::new();
        let mut scalings = Vec::new();
        let mut dirs = Vec::new();
        for v in &self.variants {
            let m = v.method.label();
            let s = match v.scaling {
                ScalingKind::Multiplicity => "multiplicity",
                ScalingKind::K => "k",
            };
            let d = v.directions.label();
            for (list, x) in [(&mut methods, m), (&mut scalings, s), (&mut dirs, d)] {
                if !list.contains(&x) {
                    list.push(x);
                }
            }
        }
        RunArgs {
            problem: Some(match &self.problem {
                ProblemSource::Academic(n) => n.clone(),
                ProblemSource::Mbb => "mbb".into(),
                ProblemSource::File(p) => p.display().to_string(),
            }),
            method: join(methods),
            scaling: join(scalings),
            directions: join(dirs),
            precond: Some(
                match self.precond {
                    PrecondKind::Dirichlet => "dirichlet",
                    PrecondKind::Lumped => "lumped",
                    PrecondKind::Superlumped => "superlumped",
                }
                .into(),
            ),
            tol: Some(self.solve.tolerance),
            tol_mode: Some(
                match self.solve.tol_mode {
                    ToleranceMode::Rel => "rel",
                    ToleranceMode::Abs => "abs",
                }
                .into(),
            ),
            maxit: Some(self.solve.max_iterations),
            elems: self.elems,
            contrast: self.contrast,
            out: Some(self.out.clone()),
            snapshot_iters: Some(self.snapshot_iters.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",")),
            seed: Some(self.seed),
            config: None,
        }
    }

    /// Builds the problem instances this configuration names, each with a
    /// label used in file names. The mbb problem yields one instance per
    /// snapshot iteration.
    pub fn instances(&self) -> Result<Vec<(String, ProblemSpec)>> {
        match &self.problem {
            ProblemSource::Academic(name) => {
                let elems = self.elems.unwrap_or(if name == "laminated" { 14 } else { 8 });
                let opts = AcademicOptions {
                    contrast: self.contrast.unwrap_or(DEFAULT_CONTRAST),
                    ..AcademicOptions::with_elems(elems)
                };
                Ok(vec![(name.clone(), academic_preset(name, &opts)?)])
            }
            ProblemSource::Mbb => {
                let mut mbb = MbbOptions::with_elems(self.elems.unwrap_or(8));
                if let Some(c) = self.contrast {
                    mbb.material.emin = mbb.material.e0 / c;
                }
                let run = mbb_modular_snapshot(&self.snapshot_iters, &mbb, &SimpOptions::default())?;
                Ok(run.snapshots.into_iter().map(|(k, p)| (format!("mbb{k}"), p)).collect())
            }
            ProblemSource::File(path) => {
                let label = path.file_stem().map_or("problem".into(), |s| s.to_string_lossy().into_owned());
                Ok(vec![(label, read_problem(path)?)])
            }
        }
    }
}
