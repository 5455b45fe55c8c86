//! The twelve solver variants: method x scaling x direction strategy, each
//! run end to end and checked against the direct oracle.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::decomposition::ScalingKind;
use crate::dual::{build_fetidp, build_tfeti, BuildOptions};
use crate::error::{Error, Result};
use crate::precond::PrecondKind;
use crate::problems::{relative_error, GlobalSolution, Substructures};
use crate::solver::{solve, DirectionMode, SolveOptions, SolveResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Tfeti,
    Fetidp,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Tfeti, Method::Fetidp];

    pub fn label(self) -> &'static str {
        match self {
            Method::Tfeti => "tfeti",
            Method::Fetidp => "fetidp",
        }
    }
}

fn scaling_label(s: ScalingKind) -> &'static str {
    match s {
        ScalingKind::Multiplicity => "mult",
        ScalingKind::K => "k",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Variant {
    pub method: Method,
    pub scaling: ScalingKind,
    pub directions: DirectionMode,
}

impl Variant {
    pub fn new(method: Method, scaling: ScalingKind, directions: DirectionMode) -> Self {
        Self { method, scaling, directions }
    }

    /// All twelve combinations in a fixed order.
    pub fn all() -> Vec<Variant> {
        let mut out = Vec::with_capacity(12);
        for method in Method::ALL {
            for scaling in [ScalingKind::Multiplicity, ScalingKind::K] {
                for directions in DirectionMode::ALL {
                    out.push(Variant::new(method, scaling, directions));
                }
            }
        }
        out
    }

    /// File-friendly label such as `fetidp-k-rrs`.
    pub fn label(&self) -> String {
        format!("{}-{}-{}", self.method.label(), scaling_label(self.scaling), self.directions.label())
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::all()
            .into_iter()
            .find(|v| v.label() == s)
            .ok_or_else(|| Error::Config(format!("unknown variant '{s}'")))
    }
}

/// Result of one variant run.
#[derive(Debug, Clone)]
pub struct VariantOutcome {
    pub variant: Variant,
    pub solve: SolveResult,
    pub dual_dim: usize,
    /// Relative L2 error of the recovered displacement against the oracle.
    pub oracle_error: Option<f64>,
    /// Relative interface jump of the recovered displacement.
    pub jump: f64,
    pub displacements: Vec<Vec<f64>>,
}

/// Builds the dual system of `variant`, solves it and recovers the primal
/// field. The oracle comparison is skipped when `oracle` is `None`.
pub fn run_variant(
    subs: &Substructures,
    variant: Variant,
    precond: PrecondKind,
    opts: &SolveOptions,
    oracle: Option<&GlobalSolution>,
) -> Result<VariantOutcome> {
    let build = BuildOptions {
        scaling: variant.scaling,
        precond,
        reuse_factorizations: true,
    };
    let opts = SolveOptions {
        directions: variant.directions,
        ..*opts
    };
    let (solve_result, dual_dim, recovery) = match variant.method {
        Method::Tfeti => {
            let sys = build_tfeti(subs, &build)?;
            let res = solve(&sys, &opts)?;
            let rec = sys.recover_primal(&res.lambda, None)?;
            (res, sys.constraints().len(), rec)
        }
        Method::Fetidp => {
            let sys = build_fetidp(subs, &build)?;
            let res = solve(&sys, &opts)?;
            let rec = sys.recover_primal(&res.lambda, None)?;
            (res, sys.constraints().len(), rec)
        }
    };
    let oracle_error = oracle.map(|o| relative_error(&subs.partition, &recovery.displacements, &o.displacement));
    Ok(VariantOutcome {
        variant,
        solve: solve_result,
        dual_dim,
        oracle_error,
        jump: recovery.jump,
        displacements: recovery.displacements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_distinct_labels() {
        let all = Variant::all();
        assert_eq!(all.len(), 12);
        let mut labels: Vec<String> = all.iter().map(Variant::label).collect();
        labels.sort();
        labels.dedup();
        assert_eq!(labels.len(), 12);
        for v in all {
            assert_eq!(v.label().parse::<Variant>().unwrap(), v);
        }
        assert!("tfeti-x-rrs".parse::<Variant>().is_err());
    }
}
