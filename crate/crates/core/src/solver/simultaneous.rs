use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::dual::DualOperator;
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, rank_revealing_cholesky};
use crate::solver::{initial_state, residual_metric, BreakdownReason, Recorder, SolveOptions, SolveResult, Status};

type Block = Vec<Vec<f64>>;

/// Sum of the per-subdomain columns, accumulated in subdomain order.
fn column_sum(cols: &Block, n: usize) -> Vec<f64> {
    let mut z = vec![0.0; n];
    for c in cols {
        for (a, b) in z.iter_mut().zip(c) {
            *a += b;
        }
    }
    z
}

/// `W <- W - W_j (Q_j^T W)` for every stored block, `passes` times.
fn reorthogonalize(w: &mut Block, history: &[(Block, Block)], passes: usize) {
    for _ in 0..passes {
        for (wj, qj) in history {
            w.par_iter_mut().for_each(|col| {
                let psi: Vec<f64> = qj.iter().map(|q| dot(q, col)).collect();
                for (p, c) in wj.iter().zip(psi) {
                    axpy(-c, p, col);
                }
            });
        }
    }
}

/// Simultaneous projected PCG with one search direction per subdomain.
///
/// Each iteration factors `Delta = Q^T W` with diagonal pivoting, drops the
/// dependent directions, and rescales the rest to an F-orthonormal block
/// before the step.
pub fn simultaneous_pcg<D: DualOperator + ?Sized>(op: &D, opts: &SolveOptions) -> Result<SolveResult> {
    let mut rec = Recorder::new(op, opts)?;
    let n = op.dim();
    let (lambda0, mut r) = initial_state(op);
    let mut lambda_t = vec![0.0; n];
    let current = |lt: &[f64]| -> Vec<f64> { lambda0.iter().zip(lt).map(|(a, b)| a + b).collect() };

    let z = op.precondition_columns(&r);
    let eps = residual_metric(&r, &column_sum(&z, n))?;
    if let Some(status) = rec.record(0, eps, 0, &lambda0) {
        return Ok(rec.finish(lambda0.clone(), status));
    }
    let mut w: Block = z.par_iter().map(|c| op.project(c)).collect();
    let mut history: Vec<(Block, Block)> = Vec::new();
    let mut iter = 0;
    loop {
        iter += 1;
        let q: Block = w
            .par_iter()
            .map(|c| if c.iter().all(|&v| v == 0.0) { vec![0.0; n] } else { op.apply(c) })
            .collect();
        let k = w.len();
        let mut delta = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..=i {
                let v = 0.5 * (dot(&q[i], &w[j]) + dot(&q[j], &w[i]));
                delta[(i, j)] = v;
                delta[(j, i)] = v;
            }
        }
        if delta.iter().any(|v| !v.is_finite()) {
            return Ok(rec.finish(current(&lambda_t), Status::Breakdown(BreakdownReason::NonFinite)));
        }
        let chol = match rank_revealing_cholesky(&delta, opts.pivot_tol) {
            Ok(c) => c,
            Err(Error::IndefiniteInput { .. }) => {
                return Ok(rec.finish(current(&lambda_t), Status::Breakdown(BreakdownReason::NonPositiveCurvature)))
            }
            Err(e) => return Err(e),
        };
        let rank = chol.rank;
        if rank == 0 {
            return Ok(rec.finish(current(&lambda_t), Status::Breakdown(BreakdownReason::RankCollapse)));
        }

        // W <- W N^T [L~^{-T}; 0]: column j of the result solves against
        // the retained columns, forward in the triangular factor.
        let l = chol.leading_block();
        let kept = chol.retained();
        let compress = |src: &Block| -> Block {
            let mut out: Block = Vec::with_capacity(rank);
            for j in 0..rank {
                let mut col = src[kept[j]].clone();
                for (m, prev) in out.iter().enumerate().take(j) {
                    axpy(-l[(j, m)], prev, &mut col);
                }
                col.iter_mut().for_each(|v| *v /= l[(j, j)]);
                out.push(col);
            }
            out
        };
        let (wc, qc) = (compress(&w), compress(&q));

        if opts.check_invariants {
            let mut worst = 0.0_f64;
            for i in 0..rank {
                for j in 0..rank {
                    let target = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((dot(&wc[i], &qc[j]) - target).abs());
                }
            }
            rec.diagnostics().orthonormality.push(worst);
        }

        let gamma: Vec<f64> = wc.iter().map(|c| dot(c, &r)).collect();
        let mut step = vec![0.0; n];
        for (c, &g) in qc.iter().zip(&gamma) {
            axpy(g, c, &mut step);
        }
        for (c, &g) in wc.iter().zip(&gamma) {
            axpy(g, c, &mut lambda_t);
        }
        axpy(-1.0, &op.project(&step), &mut r);
        history.push((wc, qc));

        let z = op.precondition_columns(&r);
        let eps = residual_metric(&r, &column_sum(&z, n))?;
        let lambda = current(&lambda_t);
        if let Some(status) = rec.record(iter, eps, rank, &lambda) {
            return Ok(rec.finish(lambda, status));
        }
        w = z.par_iter().map(|c| op.project(c)).collect();
        reorthogonalize(&mut w, &history, opts.reorth_passes);
    }
}
