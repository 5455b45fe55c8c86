//! Invariant self-check on small instances of every preset: scaling
//! admissibility, projector identities, matrix-free versus dense operators,
//! oracle agreement of all twelve variants, and detection of a corrupted
//! preconditioner.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use serde::Serialize;

use feti_core::decomposition::{admissibility_defect, ScalingKind};
use feti_core::dual::{build_fetidp, build_tfeti, dense_operator, BuildOptions, DualOperator, OperatorCounters};
use feti_core::problems::{
    academic_preset, direct_oracle, mbb_problem, AcademicOptions, MbbOptions, ProblemSpec, Substructures,
    ACADEMIC_PRESETS, DEFAULT_CONTRAST,
};
use feti_core::solver::{solve, SolveOptions};
use feti_core::variant::{run_variant, Variant};

use crate::config::RunConfig;
use crate::grid::ORACLE_BOUND;
use crate::{csv_err, io_err, require_dir, Result};

pub const VERIFY_FILE: &str = "verify.csv";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub problem: String,
    pub check: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    fn push(&mut self, problem: &str, check: impl Into<String>, value: f64, tolerance: f64) {
        self.checks.push(Check {
            problem: problem.to_string(),
            check: check.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        });
    }
}

/// Small instance of each preset. The laminated beam needs a multiple of
/// seven element rows; mbb uses the uniform starting design.
fn instances(cfg: &RunConfig) -> Result<Vec<(String, ProblemSpec)>> {
    let contrast = cfg.contrast.unwrap_or(DEFAULT_CONTRAST);
    let mut out = Vec::new();
    for name in ACADEMIC_PRESETS {
        let elems = cfg.elems.unwrap_or(if name == "laminated" { 7 } else { 4 });
        let opts = AcademicOptions { contrast, ..AcademicOptions::with_elems(elems) };
        out.push((name.to_string(), academic_preset(name, &opts)?));
    }
    out.push(("mbb".into(), mbb_problem(&MbbOptions::with_elems(cfg.elems.unwrap_or(2)))?));
    Ok(out)
}

fn random_vector(rng: &mut rand::rngs::StdRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Wraps an operator and flips the sign of its preconditioner.
pub struct NegatedPreconditioner<'a, D: ?Sized>(pub &'a D);

impl<D: DualOperator + ?Sized> DualOperator for NegatedPreconditioner<'_, D> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn subdomain_count(&self) -> usize {
        self.0.subdomain_count()
    }
    fn apply(&self, lambda: &[f64]) -> Vec<f64> {
        self.0.apply(lambda)
    }
    fn rhs(&self) -> &[f64] {
        self.0.rhs()
    }
    fn initial_lambda(&self) -> Vec<f64> {
        self.0.initial_lambda()
    }
    fn project(&self, v: &[f64]) -> Vec<f64> {
        self.0.project(v)
    }
    fn precondition_columns(&self, r: &[f64]) -> Vec<Vec<f64>> {
        let mut cols = self.0.precondition_columns(r);
        cols.iter_mut().flatten().for_each(|x| *x = -*x);
        cols
    }
    fn constraint_residual(&self, lambda: &[f64]) -> Option<f64> {
        self.0.constraint_residual(lambda)
    }
    fn counters(&self) -> OperatorCounters {
        self.0.counters()
    }
}

fn check_instance(
    report: &mut VerifyReport,
    name: &str,
    p: &ProblemSpec,
    cfg: &RunConfig,
    rng: &mut rand::rngs::StdRng,
) -> Result<()> {
    let subs: Substructures = p.substructure()?;
    let opts = |scaling| BuildOptions { scaling, precond: cfg.precond, ..BuildOptions::default() };

    for scaling in [ScalingKind::Multiplicity, ScalingKind::K] {
        let t = build_tfeti(&subs, &opts(scaling))?;
        let d = build_fetidp(&subs, &opts(scaling))?;
        let tag = if scaling == ScalingKind::K { "k" } else { "mult" };
        report.push(name, format!("admissibility_tfeti_{tag}"), admissibility_defect(t.constraints(), t.weights()), 1e-12);
        report.push(name, format!("admissibility_fetidp_{tag}"), admissibility_defect(d.constraints(), d.weights()), 1e-12);
    }

    let tfeti = build_tfeti(&subs, &opts(ScalingKind::K))?;
    let x = random_vector(rng, tfeti.dim());
    let px = tfeti.project(&x);
    report.push(name, "projector_idempotent", diff_norm(&tfeti.project(&px), &px) / norm(&x), 1e-12);
    let g = tfeti.coarse().to_dense();
    let gpx = &g * DVector::from_column_slice(&px);
    report.push(name, "projector_annihilates_g", gpx.norm() / (g.norm() * norm(&x)), 1e-12);

    // B K^+ B^T assembled from explicit pseudo-inverse columns.
    let b = tfeti.constraints().to_dense();
    let offsets = tfeti.constraints().offsets();
    let n = *offsets.last().unwrap_or(&0);
    let mut kplus = DMatrix::zeros(n, n);
    for s in 0..subs.len() {
        let m = offsets[s + 1] - offsets[s];
        for j in 0..m {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            for (i, v) in tfeti.factor(s).apply(&e).into_iter().enumerate() {
                kplus[(offsets[s] + i, offsets[s] + j)] = v;
            }
        }
    }
    let dense = &b * kplus * b.transpose();
    let fx = tfeti.apply(&x);
    let reference = &dense * DVector::from_column_slice(&x);
    report.push(name, "tfeti_operator_vs_dense", diff_norm(&fx, reference.as_slice()) / reference.norm(), 1e-10);

    let fetidp = build_fetidp(&subs, &opts(ScalingKind::K))?;
    let x = random_vector(rng, fetidp.dim());
    let y = random_vector(rng, fetidp.dim());
    let fx = fetidp.apply(&x);
    let dense = dense_operator(&fetidp);
    let reference = &dense * DVector::from_column_slice(&x);
    report.push(name, "fetidp_operator_vs_dense", diff_norm(&fx, reference.as_slice()) / reference.norm(), 1e-12);
    let fy = fetidp.apply(&y);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    let asym = (dot(&y, &fx) - dot(&x, &fy)).abs() / (norm(&fx) * norm(&y));
    report.push(name, "fetidp_operator_symmetric", asym, 1e-12);

    let oracle = direct_oracle(p)?;
    for v in Variant::all() {
        let o = run_variant(&subs, v, cfg.precond, &cfg.solve, Some(&oracle))?;
        let err = if o.solve.trace.converged() { o.oracle_error.unwrap_or(f64::INFINITY) } else { f64::INFINITY };
        report.push(name, format!("oracle_{}", v.label()), err, ORACLE_BOUND);
    }

    // A sign-flipped preconditioner must be rejected, not iterated on.
    let detected = matches!(
        solve(&NegatedPreconditioner(&fetidp), &SolveOptions::default()),
        Err(feti_core::Error::NegativeInnerProduct { .. })
    );
    report.push(name, "negative_inner_product_detected", if detected { 0.0 } else { 1.0 }, 0.0);
    Ok(())
}

/// Runs every check and writes `verify.csv` into the output directory.
pub fn verify(cfg: &RunConfig) -> Result<VerifyReport> {
    require_dir(&cfg.out)?;
    let mut rng = rand::rngs::StdRng::seed_from_u64(cfg.seed);
    let mut report = VerifyReport::default();
    for (name, p) in instances(cfg)? {
        check_instance(&mut report, &name, &p, cfg, &mut rng)?;
    }
    let path = cfg.out.join(VERIFY_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    for c in &report.checks {
        w.serialize(c).map_err(csv_err(&path))?;
    }
    w.flush().map_err(io_err(&path))?;
    Ok(report)
}
