//! Signed Boolean constraint rows `sum_s B^s u^s = c`.

use serde::{Deserialize, Serialize};

use crate::decomposition::corners::CornerSet;
use crate::decomposition::partition::Partition;
use crate::error::{Error, Result};

/// Prescribed displacement of one global DOF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirichletCondition {
    pub node: usize,
    pub direction: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Interface,
    Dirichlet,
}

/// One nonzero of a constraint row: `sign` at local DOF `dof` of `subdomain`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowEntry {
    pub subdomain: usize,
    pub dof: usize,
    pub sign: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintRow {
    pub kind: RowKind,
    pub entries: Vec<RowEntry>,
    pub gap: f64,
    /// Every subdomain copy `(subdomain, local dof)` of the constrained DOF.
    pub owners: Vec<(usize, usize)>,
}

impl ConstraintRow {
    pub fn multiplicity(&self) -> usize {
        self.owners.len()
    }
}

/// Nonzeros of `B^s`: parallel lists of row index, local DOF and sign.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LocalRows {
    pub rows: Vec<usize>,
    pub dofs: Vec<usize>,
    pub signs: Vec<f64>,
    /// Entry position within the row's `entries` (for weight lookup).
    pub slots: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ConstraintSet {
    rows: Vec<ConstraintRow>,
    local: Vec<LocalRows>,
    local_dofs: Vec<usize>,
}

/// Total-FETI constraints: pairwise interface rows at every shared DOF and
/// Dirichlet rows for prescribed DOFs.
///
/// A prescribed DOF gets one row per subdomain copy and no interface rows:
/// each copy is pinned to the prescribed value directly, which already makes
/// the copies agree.
pub fn build_constraints(partition: &Partition, dirichlet: &[DirichletCondition]) -> Result<ConstraintSet> {
    ConstraintSet::build(partition, dirichlet, None)
}

/// FETI-DP constraints: pairwise rows on shared DOFs that are neither
/// primal corner DOFs nor prescribed. Supports are eliminated elsewhere, so
/// there are no Dirichlet rows and the gap is zero.
pub fn build_remainder_constraints(
    partition: &Partition,
    corners: &CornerSet,
    dirichlet: &[DirichletCondition],
) -> Result<ConstraintSet> {
    ConstraintSet::build(partition, dirichlet, Some(corners))
}

/// Looks up prescribed values per global DOF, rejecting unknown nodes.
pub(crate) fn dirichlet_map(
    partition: &Partition,
    dirichlet: &[DirichletCondition],
) -> Result<Vec<Option<f64>>> {
    let mut values = vec![None; 2 * partition.global_node_count()];
    for d in dirichlet {
        if d.node >= partition.global_node_count() || d.direction > 1 {
            let (gnx, _) = partition.global_node_grid();
            return Err(Error::NodeNotFound(d.node % gnx.max(1), d.node / gnx.max(1)));
        }
        let slot = &mut values[2 * d.node + d.direction];
        if slot.is_some() {
            return Err(Error::DomainError(format!(
                "node {} direction {} prescribed twice",
                d.node, d.direction
            )));
        }
        *slot = Some(d.value);
    }
    Ok(values)
}

impl ConstraintSet {
    fn build(
        partition: &Partition,
        dirichlet: &[DirichletCondition],
        corners: Option<&CornerSet>,
    ) -> Result<Self> {
        let prescribed = dirichlet_map(partition, dirichlet)?;
        let mut rows = Vec::new();
        for g in 0..partition.global_node_count() {
            let owners = partition.owners(g);
            for dir in 0..2 {
                let copies: Vec<(usize, usize)> =
                    owners.iter().map(|&(s, l)| (s, 2 * l + dir)).collect();
                if let Some(value) = prescribed[2 * g + dir] {
                    if corners.is_none() {
                        for &(s, dof) in &copies {
                            rows.push(ConstraintRow {
                                kind: RowKind::Dirichlet,
                                entries: vec![RowEntry { subdomain: s, dof, sign: 1.0 }],
                                gap: value,
                                owners: copies.clone(),
                            });
                        }
                    }
                    continue;
                }
                if copies.len() < 2 || corners.is_some_and(|c| c.contains(g)) {
                    continue;
                }
                for a in 0..copies.len() {
                    for b in a + 1..copies.len() {
                        rows.push(ConstraintRow {
                            kind: RowKind::Interface,
                            entries: vec![
                                RowEntry { subdomain: copies[a].0, dof: copies[a].1, sign: 1.0 },
                                RowEntry { subdomain: copies[b].0, dof: copies[b].1, sign: -1.0 },
                            ],
                            gap: 0.0,
                            owners: copies.clone(),
                        });
                    }
                }
            }
        }
        let n = partition.subdomain_count();
        let mut local = vec![LocalRows::default(); n];
        for (r, row) in rows.iter().enumerate() {
            for (slot, e) in row.entries.iter().enumerate() {
                let l = &mut local[e.subdomain];
                l.rows.push(r);
                l.dofs.push(e.dof);
                l.signs.push(e.sign);
                l.slots.push(slot);
            }
        }
        let local_dofs = (0..n).map(|s| partition.subdomain_mesh(s).dof_count()).collect();
        Ok(Self { rows, local, local_dofs })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[ConstraintRow] {
        &self.rows
    }

    pub fn subdomain_count(&self) -> usize {
        self.local.len()
    }

    pub fn local(&self, s: usize) -> &LocalRows {
        &self.local[s]
    }

    pub fn local_dof_count(&self, s: usize) -> usize {
        self.local_dofs[s]
    }

    pub fn gap(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.gap).collect()
    }

    pub fn count(&self, kind: RowKind) -> usize {
        self.rows.iter().filter(|r| r.kind == kind).count()
    }

    /// Local DOFs of subdomain `s` touched by any constraint, sorted.
    pub fn touched_dofs(&self, s: usize) -> Vec<usize> {
        let mut d = self.local[s].dofs.clone();
        d.sort_unstable();
        d.dedup();
        d
    }

    /// `out += (B^s)^T lambda` on local DOFs of `s`.
    pub fn add_transpose(&self, s: usize, lambda: &[f64], out: &mut [f64]) {
        let l = &self.local[s];
        for k in 0..l.rows.len() {
            out[l.dofs[k]] += l.signs[k] * lambda[l.rows[k]];
        }
    }

    /// `out += B^s u` into the dual vector.
    pub fn add_apply(&self, s: usize, u: &[f64], out: &mut [f64]) {
        let l = &self.local[s];
        for k in 0..l.rows.len() {
            out[l.rows[k]] += l.signs[k] * u[l.dofs[k]];
        }
    }

    /// `B u` for per-subdomain vectors `u`.
    pub fn apply(&self, u: &[Vec<f64>]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (s, us) in u.iter().enumerate() {
            self.add_apply(s, us, &mut out);
        }
        out
    }

    /// Dense `B` with subdomain blocks concatenated in subdomain order.
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let offsets = self.offsets();
        let mut b = nalgebra::DMatrix::zeros(self.len(), offsets[self.local.len()]);
        for (r, row) in self.rows.iter().enumerate() {
            for e in &row.entries {
                b[(r, offsets[e.subdomain] + e.dof)] = e.sign;
            }
        }
        b
    }

    /// Column offsets of each subdomain block in [`ConstraintSet::to_dense`].
    pub fn offsets(&self) -> Vec<usize> {
        let mut o = vec![0];
        for &n in &self.local_dofs {
            o.push(o.last().unwrap() + n);
        }
        o
    }
}
