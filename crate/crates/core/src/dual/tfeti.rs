//! Total-FETI: every subdomain floats, supports are dual constraints, and
//! the iteration runs on `ker G` through the projector `P`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::decomposition::{
    build_coarse_space, build_constraints, k_scaling, multiplicity_scaling, rigid_body_modes, CoarseSpace,
    ConstraintSet, ScalingKind, ScalingWeights,
};
use crate::dual::{BuildOptions, DualOperator, JumpPreconditioner, OperatorCounters, PrimalRecovery};
use crate::error::{Error, Result};
use crate::linalg::{norm, FixedDofPseudoInverse};
use crate::precond::build_local;
use crate::problems::Substructures;

pub struct TfetiSystem {
    constraints: ConstraintSet,
    coarse: CoarseSpace,
    weights: ScalingWeights,
    modes: Vec<DMatrix<f64>>,
    factors: Vec<Arc<FixedDofPseudoInverse>>,
    loads: Vec<Vec<f64>>,
    precond: JumpPreconditioner,
    d: Vec<f64>,
    g_norm: f64,
    f_applies: AtomicUsize,
    local_solves: AtomicUsize,
}

pub(crate) fn scaling_weights(
    kind: ScalingKind,
    constraints: &ConstraintSet,
    diagonals: impl Fn(usize) -> Vec<f64>,
) -> Result<ScalingWeights> {
    match kind {
        ScalingKind::Multiplicity => Ok(multiplicity_scaling(constraints)),
        ScalingKind::K => {
            let diags: Vec<Vec<f64>> = (0..constraints.subdomain_count()).map(diagonals).collect();
            k_scaling(constraints, &diags)
        }
    }
}

pub fn build_tfeti(subs: &Substructures, opts: &BuildOptions) -> Result<TfetiSystem> {
    let partition = &subs.partition;
    let ns = partition.subdomain_count();
    let constraints = build_constraints(partition, &subs.dirichlet)?;
    let modes: Vec<DMatrix<f64>> = subs.subdomains.iter().map(|s| rigid_body_modes(&s.mesh)).collect();
    let loads = subs.loads();
    let coarse = build_coarse_space(&constraints, &modes, &loads)?;

    // One generalized inverse per module type, or one per subdomain.
    let key = |s: usize| if opts.reuse_factorizations { partition.module_type(s) } else { usize::MAX - s };
    let mut first: HashMap<usize, usize> = HashMap::new();
    for s in 0..ns {
        first.entry(key(s)).or_insert(s);
    }
    let mut unique: Vec<(usize, usize)> = first.into_iter().collect();
    unique.sort_unstable();
    let built: Vec<(usize, Arc<FixedDofPseudoInverse>)> = unique
        .par_iter()
        .map(|&(k, s)| {
            FixedDofPseudoInverse::new(&subs.subdomains[s].stiffness, &modes[s]).map(|f| (k, Arc::new(f)))
        })
        .collect::<Result<_>>()?;
    let by_key: HashMap<usize, Arc<FixedDofPseudoInverse>> = built.into_iter().collect();
    let factors: Vec<_> = (0..ns).map(|s| by_key[&key(s)].clone()).collect();

    let weights = scaling_weights(opts.scaling, &constraints, |s| subs.subdomains[s].stiffness.diagonal())?;

    let mut pre_cache: HashMap<(usize, Vec<usize>), Arc<_>> = HashMap::new();
    let mut locals = Vec::with_capacity(ns);
    for s in 0..ns {
        let boundary = constraints.touched_dofs(s);
        let k = (key(s), boundary);
        let local = match pre_cache.get(&k) {
            Some(l) => Arc::clone(l),
            None => {
                let l = Arc::new(build_local(opts.precond, &subs.subdomains[s].stiffness, &k.1, s)?);
                pre_cache.insert(k, Arc::clone(&l));
                l
            }
        };
        locals.push(local);
    }
    let precond = JumpPreconditioner::new(&constraints, &weights, locals, |_, dof| dof);

    let g_norm = coarse.gram().trace().max(0.0).sqrt();
    let mut system = TfetiSystem {
        constraints,
        coarse,
        weights,
        modes,
        factors,
        loads,
        precond,
        d: Vec::new(),
        g_norm,
        f_applies: AtomicUsize::new(0),
        local_solves: AtomicUsize::new(0),
    };
    let mut d = system.b_kplus(&system.loads.clone());
    for (di, c) in d.iter_mut().zip(system.constraints.gap()) {
        *di -= c;
    }
    system.d = d;
    // Counters report iteration work only.
    system.local_solves.store(0, Ordering::Relaxed);
    Ok(system)
}

impl TfetiSystem {
    pub fn constraints(&self) -> &ConstraintSet {
        &self.constraints
    }

    pub fn coarse(&self) -> &CoarseSpace {
        &self.coarse
    }

    pub fn weights(&self) -> &ScalingWeights {
        &self.weights
    }

    pub fn preconditioner(&self) -> &JumpPreconditioner {
        &self.precond
    }

    pub fn factor(&self, s: usize) -> &FixedDofPseudoInverse {
        &self.factors[s]
    }

    /// Number of distinct factorizations held.
    pub fn distinct_factorizations(&self) -> usize {
        let mut ptrs: Vec<*const FixedDofPseudoInverse> = self.factors.iter().map(Arc::as_ptr).collect();
        ptrs.sort_unstable();
        ptrs.dedup();
        ptrs.len()
    }

    /// `K^+ v^s` per subdomain, skipping zero inputs.
    fn local_solves(&self, rhs: &[Vec<f64>]) -> Vec<Option<Vec<f64>>> {
        rhs.par_iter()
            .enumerate()
            .map(|(s, x)| {
                if x.iter().all(|&v| v == 0.0) {
                    None
                } else {
                    self.local_solves.fetch_add(1, Ordering::Relaxed);
                    Some(self.factors[s].apply(x))
                }
            })
            .collect()
    }

    /// `sum_s B^s K^+ v^s`.
    fn b_kplus(&self, v: &[Vec<f64>]) -> Vec<f64> {
        let mut out = vec![0.0; self.constraints.len()];
        for (s, y) in self.local_solves(v).into_iter().enumerate() {
            if let Some(y) = y {
                self.constraints.add_apply(s, &y, &mut out);
            }
        }
        out
    }

    fn gather(&self, lambda: &[f64]) -> Vec<Vec<f64>> {
        (0..self.constraints.subdomain_count())
            .map(|s| {
                let mut x = vec![0.0; self.constraints.local_dof_count(s)];
                self.constraints.add_transpose(s, lambda, &mut x);
                x
            })
            .collect()
    }

    /// `u = K^+ (f - B^T lambda) + R alpha`, with `alpha` minimizing the
    /// constraint residual. Fails if the relative jump exceeds `jump_limit`.
    pub fn recover_primal(&self, lambda: &[f64], jump_limit: Option<f64>) -> Result<PrimalRecovery> {
        let bt = self.gather(lambda);
        let rhs: Vec<Vec<f64>> = self
            .loads
            .iter()
            .zip(&bt)
            .map(|(f, b)| f.iter().zip(b).map(|(a, c)| a - c).collect())
            .collect();
        let mut u: Vec<Vec<f64>> = self
            .local_solves(&rhs)
            .into_iter()
            .zip(&rhs)
            .map(|(y, r)| y.unwrap_or_else(|| vec![0.0; r.len()]))
            .collect();
        let mut residual = self.constraints.apply(&u);
        for (r, c) in residual.iter_mut().zip(self.constraints.gap()) {
            *r -= c;
        }
        let alpha = self.coarse.least_squares(&residual);
        let mut offset = 0;
        for (s, us) in u.iter_mut().enumerate() {
            let m = &self.modes[s];
            for k in 0..m.ncols() {
                let a = alpha[offset + k];
                if a != 0.0 {
                    for (ui, ri) in us.iter_mut().zip(m.column(k).iter()) {
                        *ui += a * ri;
                    }
                }
            }
            offset += m.ncols();
        }
        let jump = self.relative_jump(&u);
        if let Some(limit) = jump_limit {
            if jump > limit {
                return Err(Error::NotConverged { jump, limit });
            }
        }
        Ok(PrimalRecovery {
            displacements: u,
            alpha: Some(alpha),
            jump,
        })
    }

    /// `||B u - c|| / ||u||`.
    pub fn relative_jump(&self, u: &[Vec<f64>]) -> f64 {
        let mut r = self.constraints.apply(u);
        for (a, c) in r.iter_mut().zip(self.constraints.gap()) {
            *a -= c;
        }
        let un = u.iter().map(|x| norm(x).powi(2)).sum::<f64>().sqrt();
        let rn = norm(&r);
        if un == 0.0 {
            rn
        } else {
            rn / un
        }
    }
}

impl DualOperator for TfetiSystem {
    fn dim(&self) -> usize {
        self.constraints.len()
    }

    fn subdomain_count(&self) -> usize {
        self.constraints.subdomain_count()
    }

    fn apply(&self, lambda: &[f64]) -> Vec<f64> {
        self.f_applies.fetch_add(1, Ordering::Relaxed);
        self.b_kplus(&self.gather(lambda))
    }

    fn rhs(&self) -> &[f64] {
        &self.d
    }

    fn initial_lambda(&self) -> Vec<f64> {
        self.coarse.lambda0()
    }

    fn project(&self, v: &[f64]) -> Vec<f64> {
        self.coarse.project(v)
    }

    fn precondition_columns(&self, r: &[f64]) -> Vec<Vec<f64>> {
        self.precond.columns(r)
    }

    /// `||G lambda - e|| / (||e|| + ||G||_F ||lambda||)`.
    fn constraint_residual(&self, lambda: &[f64]) -> Option<f64> {
        let g = self.coarse.apply_g(lambda);
        let diff: Vec<f64> = g.iter().zip(self.coarse.e()).map(|(a, b)| a - b).collect();
        let scale = norm(self.coarse.e()) + self.g_norm * norm(lambda);
        Some(if scale == 0.0 { norm(&diff) } else { norm(&diff) / scale })
    }

    fn counters(&self) -> OperatorCounters {
        OperatorCounters {
            f_applies: self.f_applies.load(Ordering::Relaxed),
            local_solves: self.local_solves.load(Ordering::Relaxed) + self.precond.interior_solves(),
        }
    }
}
