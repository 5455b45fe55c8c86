//! Minimal SIMP compliance minimization with modular design linking.
//!
//! One density field is kept per module type. Filtered sensitivities are
//! averaged over every occurrence of a type before the optimality-criteria
//! update, so all copies of a module stay identical.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{q4_unit_stiffness, simp_modulus_derivative, DensityField};
use crate::problems::mbb::{mbb_problem, MbbOptions};
use crate::problems::oracle::direct_oracle;
use crate::problems::spec::ProblemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimpOptions {
    pub volfrac: f64,
    /// Sensitivity filter radius in elements.
    pub filter_radius: f64,
    pub move_limit: f64,
    /// Exponent of the optimality-criteria fixed-point ratio.
    pub damping: f64,
    pub rho_min: f64,
}

impl Default for SimpOptions {
    fn default() -> Self {
        Self {
            volfrac: 0.5,
            filter_radius: 1.5,
            move_limit: 0.2,
            damping: 0.5,
            rho_min: 0.0,
        }
    }
}

/// Current design of the optimization loop.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpState {
    pub problem: ProblemSpec,
    /// Compliance of the current design (NaN until solved).
    pub compliance: f64,
    pub iteration: usize,
    pub opts: SimpOptions,
}

/// Snapshots and the compliance of every design visited.
#[derive(Debug, Clone)]
pub struct SnapshotRun {
    pub snapshots: Vec<(usize, ProblemSpec)>,
    /// `compliance[k]` belongs to the design after `k` updates.
    pub compliance: Vec<f64>,
}

impl SimpState {
    pub fn new(mut problem: ProblemSpec, opts: SimpOptions) -> Result<Self> {
        if !(opts.volfrac > 0.0 && opts.volfrac <= 1.0) {
            return Err(Error::DomainError(format!("volume fraction {} outside (0, 1]", opts.volfrac)));
        }
        if !(0.0..opts.volfrac).contains(&opts.rho_min) {
            return Err(Error::DomainError(format!("rho_min {} must lie below the volume fraction", opts.rho_min)));
        }
        if !(opts.filter_radius > 0.0 && opts.move_limit > 0.0 && opts.damping > 0.0) {
            return Err(Error::DomainError("filter radius, move limit and damping must be positive".into()));
        }
        let (nx, ny) = problem.elems;
        for d in problem.type_densities.iter_mut() {
            *d = DensityField::uniform(nx, ny, opts.volfrac)?;
        }
        problem.validate()?;
        Ok(Self {
            problem,
            compliance: f64::NAN,
            iteration: 0,
            opts,
        })
    }

    /// Solves the state equation and returns compliance and per-element
    /// sensitivities on the global grid.
    fn analyze(&self) -> Result<(f64, DensityField, Vec<f64>)> {
        let fail = |e: Error| Error::StateSolveFailed {
            iteration: self.iteration,
            reason: e.to_string(),
        };
        let sol = direct_oracle(&self.problem).map_err(fail)?;
        let rho = self.problem.global_density()?;
        let mat = &self.problem.material;
        let partition = self.problem.partition()?;
        let h = partition.subdomain_mesh(0);
        let ke = q4_unit_stiffness(mat.nu, mat.thickness, h.hx, h.hy);
        let (gx, gy) = (rho.nx(), rho.ny());
        let mut dc = vec![0.0; gx * gy];
        for ej in 0..gy {
            for ei in 0..gx {
                let nodes = [
                    ej * (gx + 1) + ei,
                    ej * (gx + 1) + ei + 1,
                    (ej + 1) * (gx + 1) + ei + 1,
                    (ej + 1) * (gx + 1) + ei,
                ];
                let mut ue = [0.0; 8];
                for (a, &n) in nodes.iter().enumerate() {
                    ue[2 * a] = sol.displacement[2 * n];
                    ue[2 * a + 1] = sol.displacement[2 * n + 1];
                }
                let mut energy = 0.0;
                for a in 0..8 {
                    for b in 0..8 {
                        energy += ue[a] * ke[a][b] * ue[b];
                    }
                }
                dc[ej * gx + ei] = -simp_modulus_derivative(rho.get(ei, ej), mat) * energy;
            }
        }
        let compliance = sol.load.iter().zip(&sol.displacement).map(|(f, u)| f * u).sum();
        Ok((compliance, rho, dc))
    }

    /// Mesh-independency filter on the global grid.
    fn filter(&self, rho: &DensityField, dc: &[f64]) -> Vec<f64> {
        let r = self.opts.filter_radius;
        let reach = r.ceil() as isize;
        let (gx, gy) = (rho.nx() as isize, rho.ny() as isize);
        let mut out = vec![0.0; dc.len()];
        for j in 0..gy {
            for i in 0..gx {
                let mut sum = 0.0;
                let mut wsum = 0.0;
                for l in (j - reach).max(0)..(j + reach + 1).min(gy) {
                    for k in (i - reach).max(0)..(i + reach + 1).min(gx) {
                        let dist = (((i - k).pow(2) + (j - l).pow(2)) as f64).sqrt();
                        let w = (r - dist).max(0.0);
                        let idx = (l * gx + k) as usize;
                        sum += w * rho.values()[idx] * dc[idx];
                        wsum += w;
                    }
                }
                let e = (j * gx + i) as usize;
                out[e] = sum / (rho.values()[e].max(1e-3) * wsum);
            }
        }
        out
    }

    /// Solves the current design, records its compliance and applies one
    /// optimality-criteria update.
    pub fn step(&mut self) -> Result<()> {
        let (compliance, rho, dc) = self.analyze()?;
        self.compliance = compliance;
        let dc = self.filter(&rho, &dc);

        // Average over all occurrences of each module type.
        let (sx, _) = self.problem.grid;
        let (nx, ny) = self.problem.elems;
        let types = self.problem.type_densities.len();
        let mut avg = vec![vec![0.0; nx * ny]; types];
        let mut count = vec![0usize; types];
        for (s, &t) in self.problem.module_types.iter().enumerate() {
            count[t] += 1;
            let (px, py) = (s % sx, s / sx);
            for j in 0..ny {
                for i in 0..nx {
                    avg[t][j * nx + i] += dc[(py * ny + j) * rho.nx() + px * nx + i];
                }
            }
        }
        for (a, &c) in avg.iter_mut().zip(&count) {
            a.iter_mut().for_each(|v| *v /= c.max(1) as f64);
        }

        let old: Vec<Vec<f64>> = self.problem.type_densities.iter().map(|d| d.values().to_vec()).collect();
        let total: f64 = count.iter().sum::<usize>() as f64 * (nx * ny) as f64;
        let o = self.opts;
        let update = |lmid: f64| -> Vec<Vec<f64>> {
            old.iter()
                .zip(&avg)
                .map(|(x, g)| {
                    x.iter()
                        .zip(g)
                        .map(|(&x, &g)| {
                            let ratio = ((-g).max(0.0) / lmid).powf(o.damping);
                            (x * ratio)
                                .min(x + o.move_limit)
                                .min(1.0)
                                .max(x - o.move_limit)
                                .max(o.rho_min)
                        })
                        .collect()
                })
                .collect()
        };
        let volume = |x: &[Vec<f64>]| -> f64 {
            x.iter().zip(&count).map(|(v, &c)| c as f64 * v.iter().sum::<f64>()).sum::<f64>() / total
        };

        // Bisection on the Lagrange multiplier; volume decreases with lmid.
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        while volume(&update(hi)) > o.volfrac && hi < 1e300 {
            hi *= 10.0;
        }
        let mut next = update(hi);
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            next = update(mid);
            let v = volume(&next);
            if (v - o.volfrac).abs() <= 1e-6 {
                break;
            }
            if v > o.volfrac {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        for (d, v) in self.problem.type_densities.iter_mut().zip(next) {
            *d = DensityField::new(nx, ny, v)?;
        }
        self.iteration += 1;
        Ok(())
    }

    /// Global volume fraction of the current design.
    pub fn volume_fraction(&self) -> f64 {
        let total: f64 = self.problem.module_types.iter().map(|&t| self.problem.type_densities[t].mean()).sum();
        total / self.problem.module_types.len() as f64
    }

    /// Compliance of the current design without updating it.
    pub fn evaluate(&mut self) -> Result<f64> {
        self.compliance = self.analyze()?.0;
        Ok(self.compliance)
    }
}

/// Runs the SIMP loop from the uniform design and captures the designs
/// after each requested number of updates.
pub fn mbb_modular_snapshot(iterations: &[usize], mbb: &MbbOptions, simp: &SimpOptions) -> Result<SnapshotRun> {
    let mut state = SimpState::new(mbb_problem(mbb)?, *simp)?;
    let last = iterations.iter().copied().max().unwrap_or(0);
    let mut snapshots = Vec::new();
    let mut compliance = Vec::with_capacity(last + 1);
    loop {
        if iterations.contains(&state.iteration) {
            let mut p = state.problem.clone();
            p.name = format!("mbb-snapshot-{}", state.iteration);
            snapshots.push((state.iteration, p));
        }
        if state.iteration == last {
            compliance.push(state.evaluate()?);
            break;
        }
        state.step()?;
        compliance.push(state.compliance);
    }
    Ok(SnapshotRun { snapshots, compliance })
}
