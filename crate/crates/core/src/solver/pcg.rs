use crate::dual::DualOperator;
use crate::error::Result;
use crate::linalg::{axpy, dot, norm};
use crate::solver::{initial_state, residual_metric, BreakdownReason, Recorder, SolveOptions, SolveResult, Status};

/// `z = P M r`.
fn precondition<D: DualOperator + ?Sized>(op: &D, r: &[f64]) -> Vec<f64> {
    op.project(&op.precondition(r))
}

/// Projected PCG with the classic two-term recurrence.
pub fn pcg<D: DualOperator + ?Sized>(op: &D, opts: &SolveOptions) -> Result<SolveResult> {
    let mut rec = Recorder::new(op, opts)?;
    let (mut lambda, mut r) = initial_state(op);
    let mut z = precondition(op, &r);
    let mut rz = dot(&r, &z);
    let eps = residual_metric(&r, &z)?;
    if let Some(status) = rec.record(0, eps, 0, &lambda) {
        return Ok(rec.finish(lambda, status));
    }
    let mut p = z.clone();
    let mut iter = 0;
    loop {
        iter += 1;
        let q = op.apply(&p);
        let pq = dot(&p, &q);
        if !pq.is_finite() {
            return Ok(rec.finish(lambda, Status::Breakdown(BreakdownReason::NonFinite)));
        }
        if pq <= 0.0 {
            return Ok(rec.finish(lambda, Status::Breakdown(BreakdownReason::NonPositiveCurvature)));
        }
        let alpha = rz / pq;
        axpy(alpha, &p, &mut lambda);
        axpy(-alpha, &op.project(&q), &mut r);
        z = precondition(op, &r);
        let eps = residual_metric(&r, &z)?;
        if let Some(status) = rec.record(iter, eps, 1, &lambda) {
            return Ok(rec.finish(lambda, status));
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
}

/// Projected PCG where every new direction is F-orthogonalized against all
/// stored directions, which are kept F-normalized together with `F p`.
pub fn fo_pcg<D: DualOperator + ?Sized>(op: &D, opts: &SolveOptions) -> Result<SolveResult> {
    let mut rec = Recorder::new(op, opts)?;
    let (mut lambda, mut r) = initial_state(op);
    let z = precondition(op, &r);
    let eps = residual_metric(&r, &z)?;
    if let Some(status) = rec.record(0, eps, 0, &lambda) {
        return Ok(rec.finish(lambda, status));
    }
    let mut ps: Vec<Vec<f64>> = Vec::new();
    let mut qs: Vec<Vec<f64>> = Vec::new();
    let mut w = z;
    let mut iter = 0;
    loop {
        iter += 1;
        let mut q = op.apply(&w);
        let wq = dot(&w, &q);
        if !wq.is_finite() {
            return Ok(rec.finish(lambda, Status::Breakdown(BreakdownReason::NonFinite)));
        }
        if wq <= 0.0 {
            return Ok(rec.finish(lambda, Status::Breakdown(BreakdownReason::NonPositiveCurvature)));
        }
        let s = wq.sqrt();
        w.iter_mut().for_each(|v| *v /= s);
        q.iter_mut().for_each(|v| *v /= s);
        if opts.check_invariants {
            let wn = norm(&w);
            let worst = ps
                .iter()
                .map(|p| (dot(&q, p) / (wn * norm(p))).abs())
                .fold(0.0, f64::max);
            rec.diagnostics().conjugacy.push(worst);
        }
        let gamma = dot(&w, &r);
        axpy(gamma, &w, &mut lambda);
        axpy(-gamma, &op.project(&q), &mut r);
        ps.push(w);
        qs.push(q);

        let z = precondition(op, &r);
        let eps = residual_metric(&r, &z)?;
        if let Some(status) = rec.record(iter, eps, 1, &lambda) {
            return Ok(rec.finish(lambda, status));
        }
        w = z;
        for _ in 0..opts.reorth_passes {
            for (p, q) in ps.iter().zip(&qs) {
                let c = dot(q, &w);
                axpy(-c, p, &mut w);
            }
        }
    }
}
