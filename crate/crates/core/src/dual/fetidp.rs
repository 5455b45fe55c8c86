//! FETI-DP: corner DOFs are shared primal unknowns, condensed out through
//! the coarse matrix `K~cc = sum B_c^T (K_cc - K_cr K_rr^{-1} K_rc) B_c`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;

use crate::decomposition::{
    build_remainder_constraints, constraints::dirichlet_map, select_corners, ConstraintSet, CornerSet, ScalingWeights,
};
use crate::dual::tfeti::scaling_weights;
use crate::dual::{BuildOptions, DualOperator, JumpPreconditioner, OperatorCounters, PrimalRecovery};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, norm, CsrMatrix, SkylineCholesky};
use crate::precond::build_local;
use crate::problems::Substructures;

/// Factorized blocks of one subdomain after the corner/remainder split.
#[derive(Debug)]
struct SplitFactor {
    krr: SkylineCholesky,
    /// `K_rp` against prescribed DOFs, to move their values to the load.
    krp: CsrMatrix,
    /// `K_cp`.
    kcp: DMatrix<f64>,
    /// `Phi = K_rr^{-1} K_rc`.
    phi: DMatrix<f64>,
    /// `K_cc - K_cr Phi`.
    kcc_tilde: DMatrix<f64>,
}

#[derive(Debug)]
struct SplitSubdomain {
    remainder: Vec<usize>,
    corner: Vec<usize>,
    prescribed: Vec<(usize, f64)>,
    /// Remainder position of each local DOF (`usize::MAX` if not remainder).
    rem_pos: Vec<usize>,
    /// Global primal index of each corner DOF.
    primal: Vec<usize>,
    factor: Arc<SplitFactor>,
    f_r: Vec<f64>,
    f_c: Vec<f64>,
}

pub struct FetidpSystem {
    constraints: ConstraintSet,
    corners: CornerSet,
    weights: ScalingWeights,
    subs: Vec<SplitSubdomain>,
    precond: JumpPreconditioner,
    coarse: Option<Cholesky<f64, Dyn>>,
    n_primal: usize,
    fbar_c: Vec<f64>,
    d: Vec<f64>,
    f_applies: AtomicUsize,
    local_solves: AtomicUsize,
}

fn split_factor(
    k: &crate::linalg::SparseSymMatrix,
    remainder: &[usize],
    corner: &[usize],
    prescribed: &[usize],
    subdomain: usize,
) -> Result<SplitFactor> {
    let krr = cholesky(&k.principal_submatrix(remainder)).map_err(|_| Error::SingularRemainder(subdomain))?;
    let krc = k.submatrix(remainder, corner).to_dense();
    let mut phi = DMatrix::zeros(remainder.len(), corner.len());
    for j in 0..corner.len() {
        let mut col: Vec<f64> = krc.column(j).iter().copied().collect();
        krr.solve_in_place(&mut col);
        phi.set_column(j, &DVector::from_vec(col));
    }
    let kcc = k.principal_submatrix(corner).to_dense();
    let mut kcc_tilde = kcc - krc.transpose() * &phi;
    // Restore exact symmetry lost to rounding.
    let sym = (&kcc_tilde + kcc_tilde.transpose()) * 0.5;
    kcc_tilde = sym;
    Ok(SplitFactor {
        krr,
        krp: k.submatrix(remainder, prescribed),
        kcp: k.submatrix(corner, prescribed).to_dense(),
        phi,
        kcc_tilde,
    })
}

pub fn build_fetidp(subs: &Substructures, opts: &BuildOptions) -> Result<FetidpSystem> {
    let partition = &subs.partition;
    let ns = partition.subdomain_count();
    let corners = select_corners(partition)?;
    let constraints = build_remainder_constraints(partition, &corners, &subs.dirichlet)?;
    let prescribed = dirichlet_map(partition, &subs.dirichlet)?;

    // Global primal numbering over unsupported corner DOFs.
    let mut primal_index = HashMap::new();
    for &g in corners.nodes() {
        for dir in 0..2 {
            if prescribed[2 * g + dir].is_none() {
                let next = primal_index.len();
                primal_index.insert(2 * g + dir, next);
            }
        }
    }
    let n_primal = primal_index.len();

    struct Layout {
        remainder: Vec<usize>,
        corner: Vec<usize>,
        prescribed: Vec<(usize, f64)>,
        primal: Vec<usize>,
    }
    let layouts: Vec<Layout> = (0..ns)
        .map(|s| {
            let n = subs.subdomains[s].mesh.node_count();
            let mut layout = Layout { remainder: vec![], corner: vec![], prescribed: vec![], primal: vec![] };
            for l in 0..n {
                let g = partition.local_to_global(s, l);
                for dir in 0..2 {
                    let dof = 2 * l + dir;
                    if let Some(v) = prescribed[2 * g + dir] {
                        layout.prescribed.push((dof, v));
                    } else if corners.contains(g) {
                        layout.corner.push(dof);
                        layout.primal.push(primal_index[&(2 * g + dir)]);
                    } else {
                        layout.remainder.push(dof);
                    }
                }
            }
            layout
        })
        .collect();

    // Split data depends on the stiffness (module type) and which local
    // DOFs are prescribed.
    let key = |s: usize| {
        let p: Vec<usize> = layouts[s].prescribed.iter().map(|&(d, _)| d).collect();
        if opts.reuse_factorizations {
            (partition.module_type(s), p, 0)
        } else {
            (partition.module_type(s), p, s + 1)
        }
    };
    let keys: Vec<_> = (0..ns).map(key).collect();
    let mut first = HashMap::new();
    for (s, k) in keys.iter().enumerate() {
        first.entry(k.clone()).or_insert(s);
    }
    let mut unique: Vec<_> = first.into_iter().collect();
    unique.sort();
    let built: Vec<_> = unique
        .par_iter()
        .map(|(k, s)| {
            let l = &layouts[*s];
            let p: Vec<usize> = l.prescribed.iter().map(|&(d, _)| d).collect();
            split_factor(&subs.subdomains[*s].stiffness, &l.remainder, &l.corner, &p, *s)
                .map(|f| (k.clone(), Arc::new(f)))
        })
        .collect::<Result<_>>()?;
    let by_key: HashMap<_, _> = built.into_iter().collect();

    let mut split = Vec::with_capacity(ns);
    for (s, layout) in layouts.into_iter().enumerate() {
        let factor = Arc::clone(&by_key[&keys[s]]);
        let f = &subs.subdomains[s].load;
        let up = DVector::from_iterator(layout.prescribed.len(), layout.prescribed.iter().map(|&(_, v)| v));
        let mut f_r: Vec<f64> = layout.remainder.iter().map(|&d| f[d]).collect();
        let mut f_c: Vec<f64> = layout.corner.iter().map(|&d| f[d]).collect();
        if up.iter().any(|&v| v != 0.0) {
            let mut t = vec![0.0; f_r.len()];
            factor.krp.matvec(up.as_slice(), &mut t);
            f_r.iter_mut().zip(&t).for_each(|(a, b)| *a -= b);
            let tc = &factor.kcp * &up;
            f_c.iter_mut().zip(tc.iter()).for_each(|(a, b)| *a -= b);
        }
        let mut rem_pos = vec![usize::MAX; f.len()];
        for (i, &d) in layout.remainder.iter().enumerate() {
            rem_pos[d] = i;
        }
        split.push(SplitSubdomain {
            remainder: layout.remainder,
            corner: layout.corner,
            prescribed: layout.prescribed,
            rem_pos,
            primal: layout.primal,
            factor,
            f_r,
            f_c,
        });
    }

    // Assemble and factorize the primal coarse matrix.
    let mut kbar = DMatrix::zeros(n_primal, n_primal);
    for sd in &split {
        for (a, &pa) in sd.primal.iter().enumerate() {
            for (b, &pb) in sd.primal.iter().enumerate() {
                kbar[(pa, pb)] += sd.factor.kcc_tilde[(a, b)];
            }
        }
    }
    let coarse = if n_primal == 0 {
        None
    } else {
        Some(Cholesky::new(kbar).ok_or(Error::SingularCoarse)?)
    };

    let weights = scaling_weights(opts.scaling, &constraints, |s| subs.subdomains[s].stiffness.diagonal())?;

    let mut pre_cache: HashMap<_, Arc<_>> = HashMap::new();
    let mut locals = Vec::with_capacity(ns);
    for s in 0..ns {
        let boundary: Vec<usize> = constraints.touched_dofs(s).iter().map(|&d| split[s].rem_pos[d]).collect();
        let k = (keys[s].clone(), boundary);
        let local = match pre_cache.get(&k) {
            Some(l) => Arc::clone(l),
            None => {
                let krr = subs.subdomains[s].stiffness.principal_submatrix(&split[s].remainder);
                let l = Arc::new(build_local(opts.precond, &krr, &k.1, s)?);
                pre_cache.insert(k, Arc::clone(&l));
                l
            }
        };
        locals.push(local);
    }
    let precond = JumpPreconditioner::new(&constraints, &weights, locals, |s, dof| split[s].rem_pos[dof]);

    let mut system = FetidpSystem {
        constraints,
        corners,
        weights,
        subs: split,
        precond,
        coarse,
        n_primal,
        fbar_c: vec![0.0; n_primal],
        d: Vec::new(),
        f_applies: AtomicUsize::new(0),
        local_solves: AtomicUsize::new(0),
    };

    // fbar_c = sum B_c^T (f_c - Phi^T f_r); d = sum B_r K_rr^{-1} f_r - F_rc Kbar^{-1} fbar_c.
    let mut fbar = vec![0.0; n_primal];
    let mut d = vec![0.0; system.constraints.len()];
    for (s, sd) in system.subs.iter().enumerate() {
        let fr = DVector::from_column_slice(&sd.f_r);
        let t = sd.factor.phi.transpose() * &fr;
        for (k, &p) in sd.primal.iter().enumerate() {
            fbar[p] += sd.f_c[k] - t[k];
        }
        let y = sd.factor.krr.solve(&sd.f_r);
        system.add_remainder(s, &y, &mut d);
    }
    let a = system.coarse_solve(&fbar);
    let frc_a = system.apply_frc(&a);
    for (di, v) in d.iter_mut().zip(&frc_a) {
        *di -= v;
    }
    system.fbar_c = fbar;
    system.d = d;
    Ok(system)
}

impl FetidpSystem {
    pub fn constraints(&self) -> &ConstraintSet {
        &self.constraints
    }

    pub fn corners(&self) -> &CornerSet {
        &self.corners
    }

    pub fn weights(&self) -> &ScalingWeights {
        &self.weights
    }

    pub fn preconditioner(&self) -> &JumpPreconditioner {
        &self.precond
    }

    pub fn primal_count(&self) -> usize {
        self.n_primal
    }

    pub fn distinct_factorizations(&self) -> usize {
        let mut ptrs: Vec<*const SplitFactor> = self.subs.iter().map(|s| Arc::as_ptr(&s.factor)).collect();
        ptrs.sort_unstable();
        ptrs.dedup();
        ptrs.len()
    }

    fn coarse_solve(&self, b: &[f64]) -> Vec<f64> {
        match &self.coarse {
            Some(c) => c.solve(&DVector::from_column_slice(b)).as_slice().to_vec(),
            None => Vec::new(),
        }
    }

    /// `out += B_r^s y` for a remainder vector `y`.
    fn add_remainder(&self, s: usize, y: &[f64], out: &mut [f64]) {
        let l = self.constraints.local(s);
        let pos = &self.subs[s].rem_pos;
        for k in 0..l.rows.len() {
            out[l.rows[k]] += l.signs[k] * y[pos[l.dofs[k]]];
        }
    }

    /// `(B_r^s)^T lambda` as a remainder vector.
    fn gather(&self, s: usize, lambda: &[f64]) -> Vec<f64> {
        let l = self.constraints.local(s);
        let pos = &self.subs[s].rem_pos;
        let mut x = vec![0.0; self.subs[s].remainder.len()];
        for k in 0..l.rows.len() {
            x[pos[l.dofs[k]]] += l.signs[k] * lambda[l.rows[k]];
        }
        x
    }

    /// `F_rc a = sum_s B_r^s Phi^s B_c^s a`.
    fn apply_frc(&self, a: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.constraints.len()];
        if a.is_empty() {
            return out;
        }
        for (s, sd) in self.subs.iter().enumerate() {
            let ac = DVector::from_iterator(sd.primal.len(), sd.primal.iter().map(|&p| a[p]));
            let y = &sd.factor.phi * ac;
            self.add_remainder(s, y.as_slice(), &mut out);
        }
        out
    }

    /// Recovers corner and remainder displacements from converged
    /// multipliers.
    pub fn recover_primal(&self, lambda: &[f64], jump_limit: Option<f64>) -> Result<PrimalRecovery> {
        // u_c = Kbar^{-1} (fbar_c + F_rc^T lambda)
        let mut rhs = self.fbar_c.clone();
        let xs: Vec<Vec<f64>> = (0..self.subs.len()).map(|s| self.gather(s, lambda)).collect();
        for (sd, x) in self.subs.iter().zip(&xs) {
            let t = sd.factor.phi.transpose() * DVector::from_column_slice(x);
            for (k, &p) in sd.primal.iter().enumerate() {
                rhs[p] += t[k];
            }
        }
        let uc = self.coarse_solve(&rhs);
        let displacements: Vec<Vec<f64>> = self
            .subs
            .par_iter()
            .zip(&xs)
            .map(|(sd, x)| {
                let mut r: Vec<f64> = sd.f_r.iter().zip(x).map(|(f, b)| f - b).collect();
                sd.factor.krr.solve_in_place(&mut r);
                let ucs = DVector::from_iterator(sd.primal.len(), sd.primal.iter().map(|&p| uc[p]));
                let corr = &sd.factor.phi * &ucs;
                let mut u = vec![0.0; sd.rem_pos.len()];
                for (i, &d) in sd.remainder.iter().enumerate() {
                    u[d] = r[i] - corr[i];
                }
                for (k, &d) in sd.corner.iter().enumerate() {
                    u[d] = ucs[k];
                }
                for &(d, v) in &sd.prescribed {
                    u[d] = v;
                }
                u
            })
            .collect();
        let jump = self.relative_jump(&displacements);
        if let Some(limit) = jump_limit {
            if jump > limit {
                return Err(Error::NotConverged { jump, limit });
            }
        }
        Ok(PrimalRecovery {
            displacements,
            alpha: None,
            jump,
        })
    }

    /// `||B_r u|| / ||u||` over the remainder constraints.
    pub fn relative_jump(&self, u: &[Vec<f64>]) -> f64 {
        let r = self.constraints.apply(u);
        let un = u.iter().map(|x| norm(x).powi(2)).sum::<f64>().sqrt();
        if un == 0.0 {
            norm(&r)
        } else {
            norm(&r) / un
        }
    }
}

impl DualOperator for FetidpSystem {
    fn dim(&self) -> usize {
        self.constraints.len()
    }

    fn subdomain_count(&self) -> usize {
        self.subs.len()
    }

    fn apply(&self, lambda: &[f64]) -> Vec<f64> {
        self.f_applies.fetch_add(1, Ordering::Relaxed);
        // Local solves y = K_rr^{-1} x and coarse contributions Phi^T x.
        let local: Vec<Option<(Vec<f64>, DVector<f64>)>> = (0..self.subs.len())
            .into_par_iter()
            .map(|s| {
                let x = self.gather(s, lambda);
                if x.iter().all(|&v| v == 0.0) {
                    return None;
                }
                self.local_solves.fetch_add(1, Ordering::Relaxed);
                let sd = &self.subs[s];
                let g = sd.factor.phi.transpose() * DVector::from_column_slice(&x);
                let mut y = x;
                sd.factor.krr.solve_in_place(&mut y);
                Some((y, g))
            })
            .collect();
        let mut out = vec![0.0; self.constraints.len()];
        let mut rhs = vec![0.0; self.n_primal];
        for (s, item) in local.iter().enumerate() {
            if let Some((y, g)) = item {
                self.add_remainder(s, y, &mut out);
                for (k, &p) in self.subs[s].primal.iter().enumerate() {
                    rhs[p] += g[k];
                }
            }
        }
        let a = self.coarse_solve(&rhs);
        let frc = self.apply_frc(&a);
        for (o, v) in out.iter_mut().zip(&frc) {
            *o += v;
        }
        out
    }

    fn rhs(&self) -> &[f64] {
        &self.d
    }

    fn initial_lambda(&self) -> Vec<f64> {
        vec![0.0; self.constraints.len()]
    }

    fn precondition_columns(&self, r: &[f64]) -> Vec<Vec<f64>> {
        self.precond.columns(r)
    }

    fn counters(&self) -> OperatorCounters {
        OperatorCounters {
            f_applies: self.f_applies.load(Ordering::Relaxed),
            local_solves: self.local_solves.load(Ordering::Relaxed) + self.precond.interior_solves(),
        }
    }
}
