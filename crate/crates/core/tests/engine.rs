use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};

use feti_core::decomposition::DirichletCondition;
use feti_core::dual::{build_fetidp, build_tfeti, dense_operator, BuildOptions, DualOperator, NegatedPreconditioner, OperatorCounters};
use feti_core::fem::{DensityField, EdgeSpec, Material, StructuredMesh};
use feti_core::problems::{direct_oracle, grid3x3_layered, relative_error, AcademicOptions, ProblemSpec, TractionLoad};
use feti_core::solver::{
    fo_pcg, pcg, residual_metric, simultaneous_pcg, solve, DirectionMode, SolveOptions, Status, ToleranceMode,
};
use feti_core::Error;

/// Dense SPD system with identity preconditioner and projector.
struct DenseSystem {
    a: DMatrix<f64>,
    b: Vec<f64>,
    applies: AtomicUsize,
}

impl DenseSystem {
    fn new(a: DMatrix<f64>, b: Vec<f64>) -> Self {
        Self { a, b, applies: AtomicUsize::new(0) }
    }
}

impl DualOperator for DenseSystem {
    fn dim(&self) -> usize {
        self.b.len()
    }
    fn subdomain_count(&self) -> usize {
        1
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.applies.fetch_add(1, Ordering::Relaxed);
        (&self.a * DVector::from_column_slice(x)).as_slice().to_vec()
    }
    fn rhs(&self) -> &[f64] {
        &self.b
    }
    fn initial_lambda(&self) -> Vec<f64> {
        vec![0.0; self.b.len()]
    }
    fn precondition_columns(&self, r: &[f64]) -> Vec<Vec<f64>> {
        vec![r.to_vec()]
    }
    fn counters(&self) -> OperatorCounters {
        OperatorCounters { f_applies: self.applies.load(Ordering::Relaxed), local_solves: 0 }
    }
}

/// Reports every preconditioner column twice.
struct Duplicated<'a, D: DualOperator>(&'a D);

impl<D: DualOperator> DualOperator for Duplicated<'_, D> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn subdomain_count(&self) -> usize {
        2 * self.0.subdomain_count()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.0.apply(x)
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
        // Halved so the column sum, and with it eps_r, is unchanged.
        self.0
            .precondition_columns(r)
            .into_iter()
            .flat_map(|c| {
                let h: Vec<f64> = c.iter().map(|v| 0.5 * v).collect();
                [h.clone(), h]
            })
            .collect()
    }
    fn constraint_residual(&self, l: &[f64]) -> Option<f64> {
        self.0.constraint_residual(l)
    }
    fn counters(&self) -> OperatorCounters {
        self.0.counters()
    }
}

fn spd(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    &m * m.transpose() + DMatrix::identity(n, n) * 0.5
}

fn small_grid() -> ProblemSpec {
    grid3x3_layered(&AcademicOptions { contrast: 100.0, ..AcademicOptions::with_elems(4) }).unwrap()
}

/// One square subdomain clamped on its left edge.
fn single_subdomain() -> ProblemSpec {
    let n = 4;
    let mesh = StructuredMesh::new(n, n, 0.25, 0.25, [0.0, 0.0]).unwrap();
    ProblemSpec {
        name: "single".into(),
        grid: (1, 1),
        elems: (n, n),
        module_types: vec![0],
        type_densities: vec![DensityField::from_fn(n, n, |i, j| if (i + j) % 3 == 0 { 1.0 } else { 0.3 }).unwrap()],
        material: Material::default(),
        dirichlet: (0..=n)
            .flat_map(|j| (0..2).map(move |direction| DirichletCondition { node: j * (n + 1), direction, value: 0.0 }))
            .collect(),
        tractions: vec![TractionLoad { subdomain: 0, edge: EdgeSpec::right(&mesh), traction: [0.3, 1.0] }],
        point_loads: vec![],
        contrast: 1.0,
    }
}

#[test]
fn zero_rhs_converges_immediately() {
    let sys = DenseSystem::new(spd(6, 1), vec![0.0; 6]);
    for mode in DirectionMode::ALL {
        let res = solve(&sys, &SolveOptions { directions: mode, ..Default::default() }).unwrap();
        assert_eq!(res.trace.status, Status::Converged);
        assert_eq!(res.trace.iterations(), 0);
        assert_eq!(res.trace.rows[0].eps_r, 0.0);
    }
}

#[test]
fn dense_spd_matches_direct_solve() {
    let a = spd(10, 7);
    let b: Vec<f64> = (0..10).map(|i| (i as f64).cos()).collect();
    let exact = a.clone().cholesky().unwrap().solve(&DVector::from_column_slice(&b));
    let sys = DenseSystem::new(a, b);
    for mode in DirectionMode::ALL {
        let opts = SolveOptions { directions: mode, tolerance: 1e-13, max_iterations: 10, ..Default::default() };
        let res = solve(&sys, &opts).unwrap();
        assert!(res.trace.iterations() <= 10);
        let err = (DVector::from_vec(res.lambda) - &exact).amax();
        assert!(err <= 1e-10 * exact.amax(), "{mode:?}: {err:e}");
    }
}

#[test]
fn metric_matches_independent_accumulation() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(3);
    let m = spd(40, 11);
    for _ in 0..20 {
        let r = DVector::from_fn(40, |_, _| rng.gen_range(-1.0..1.0));
        let z = &m * &r;
        // Reverse-order Kahan sum as the independent reference.
        let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
        for i in (0..40).rev() {
            let y = r[i] * z[i] - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        let eps = residual_metric(r.as_slice(), z.as_slice()).unwrap();
        assert!((eps - sum.sqrt()).abs() <= 1e-15 * sum.sqrt().max(1.0) * 10.0);
    }
}

#[test]
fn negated_preconditioner_is_reported() {
    let p = small_grid();
    let subs = p.substructure().unwrap();
    let sys = build_tfeti(&subs, &BuildOptions::default()).unwrap();
    for mode in DirectionMode::ALL {
        let err = solve(&NegatedPreconditioner(&sys), &SolveOptions { directions: mode, ..Default::default() });
        assert!(matches!(err, Err(Error::NegativeInnerProduct { .. })), "{mode:?}");
    }
}

#[test]
fn tfeti_two_subdomain_bar_matches_oracle() {
    let opts = AcademicOptions { contrast: 1.0, ..AcademicOptions::with_elems(4) };
    let mut p = feti_core::problems::laminated_beam(&AcademicOptions { layers: Some(1), ..opts }).unwrap();
    // Trim the beam to two subdomains.
    p.grid = (2, 1);
    p.module_types = vec![0, 0];
    p.dirichlet = (0..5)
        .flat_map(|j| (0..2).map(move |direction| DirichletCondition { node: 9 * j, direction, value: 0.0 }))
        .collect();
    p.tractions = vec![TractionLoad { subdomain: 1, ..p.tractions[0] }];
    let subs = p.substructure().unwrap();
    let oracle = direct_oracle(&p).unwrap();
    let sys = build_tfeti(&subs, &BuildOptions::default()).unwrap();
    let res = pcg(&sys, &SolveOptions { tolerance: 1e-12, ..Default::default() }).unwrap();
    assert!(res.trace.converged());
    let rec = sys.recover_primal(&res.lambda, Some(1e-8)).unwrap();
    assert!(relative_error(&subs.partition, &rec.displacements, &oracle.displacement) <= 1e-8);
}

#[test]
fn single_subdomain_rrs_matches_fo() {
    let p = single_subdomain();
    let subs = p.substructure().unwrap();
    let sys = build_tfeti(&subs, &BuildOptions::default()).unwrap();
    let opts = SolveOptions { tolerance: 1e-10, ..Default::default() };
    let fo = fo_pcg(&sys, &opts).unwrap();
    let rrs = simultaneous_pcg(&sys, &opts).unwrap();
    assert_eq!(fo.trace.rows.len(), rrs.trace.rows.len());
    let scale = fo.trace.rows[0].eps_r;
    for (a, b) in fo.trace.rows.iter().zip(&rrs.trace.rows) {
        assert!((a.eps_r - b.eps_r).abs() <= 1e-10 * scale, "iteration {}", a.iter);
        assert!(b.kept_dirs <= 1);
    }
    // eps_r at iteration 0 equals sqrt(r^T z) of the single-direction engine.
    let plain = pcg(&sys, &opts).unwrap();
    assert!((plain.trace.rows[0].eps_r - rrs.trace.rows[0].eps_r).abs() <= 1e-10 * scale);
}

#[test]
fn duplicated_columns_lose_rank() {
    let p = small_grid();
    let subs = p.substructure().unwrap();
    let sys = build_tfeti(&subs, &BuildOptions::default()).unwrap();
    let dup = Duplicated(&sys);
    let res = simultaneous_pcg(&dup, &SolveOptions { check_invariants: true, ..Default::default() }).unwrap();
    assert!(res.trace.converged());
    assert!(res.trace.rows[1..].iter().all(|r| r.kept_dirs <= 9));
    assert!(res.diagnostics.orthonormality.iter().all(|&e| e <= 1e-8));
    let base = simultaneous_pcg(&sys, &SolveOptions::default()).unwrap();
    assert_eq!(base.trace.iterations(), res.trace.iterations());
}

#[test]
fn invariants_hold_on_desk_problem() {
    let p = small_grid();
    let subs = p.substructure().unwrap();
    let opts = SolveOptions { check_invariants: true, record_lambda: true, ..Default::default() };
    let tf = build_tfeti(&subs, &BuildOptions::default()).unwrap();
    let dp = build_fetidp(&subs, &BuildOptions::default()).unwrap();
    let systems: [&dyn DualOperator; 2] = [&tf, &dp];
    for sys in systems {
        let f = dense_operator(sys);
        let d = DVector::from_column_slice(sys.rhs());
        for mode in DirectionMode::ALL {
            let res = solve(sys, &SolveOptions { directions: mode, ..opts }).unwrap();
            assert!(res.trace.converged());
            let dg = &res.diagnostics;
            assert!(dg.constraint_residual.iter().all(|&e| e <= 1e-10));
            assert!(dg.orthonormality.iter().all(|&e| e <= 1e-8));
            assert!(dg.conjugacy.iter().all(|&e| e <= 1e-8));
            // Dual energy never increases.
            let energy: Vec<f64> = dg
                .lambda_history
                .iter()
                .map(|l| {
                    let l = DVector::from_column_slice(l);
                    0.5 * l.dot(&(&f * &l)) - l.dot(&d)
                })
                .collect();
            let scale = energy[0].abs().max(energy.last().unwrap().abs());
            for w in energy.windows(2) {
                assert!(w[1] <= w[0] + 1e-12 * scale, "{mode:?}");
            }
        }
    }
}

#[test]
fn absolute_tolerance_and_iteration_cap() {
    let p = small_grid();
    let subs = p.substructure().unwrap();
    let sys = build_fetidp(&subs, &BuildOptions::default()).unwrap();
    let res = solve(&sys, &SolveOptions { max_iterations: 3, ..Default::default() }).unwrap();
    assert_eq!(res.trace.status, Status::MaxIter);
    assert_eq!(res.trace.iterations(), 3);
    let abs = solve(&sys, &SolveOptions { tol_mode: ToleranceMode::Abs, tolerance: 1e-6, ..Default::default() }).unwrap();
    assert!(abs.trace.converged());
    assert!(abs.trace.final_eps() <= 1e-6);
    // F applications are counted once per iteration for one direction.
    let rows = &abs.trace.rows;
    assert_eq!(rows.last().unwrap().f_applies - rows[0].f_applies, abs.trace.iterations());
}

#[test]
fn repeated_runs_are_identical() {
    let p = small_grid();
    let subs = p.substructure().unwrap();
    let a = build_tfeti(&subs, &BuildOptions::default()).unwrap();
    let b = build_tfeti(&subs, &BuildOptions::default()).unwrap();
    let opts = SolveOptions { directions: DirectionMode::Rrs, ..Default::default() };
    let ra = solve(&a, &opts).unwrap();
    let rb = solve(&b, &opts).unwrap();
    assert_eq!(ra.trace, rb.trace);
    assert_eq!(ra.lambda, rb.lambda);
}
