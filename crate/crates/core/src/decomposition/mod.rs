//! Regular partitions, constraint rows, coarse spaces, corner sets and
//! interface scaling.

pub mod coarse;
pub mod constraints;
pub mod corners;
pub mod partition;
pub mod rigid;
pub mod scaling;

pub use coarse::{build_coarse_space, CoarseSpace};
pub use constraints::{
    build_constraints, build_remainder_constraints, ConstraintRow, ConstraintSet, DirichletCondition, LocalRows,
    RowEntry, RowKind,
};
pub use corners::{select_corners, CornerSet};
pub use partition::{build_partition, Partition};
pub use rigid::rigid_body_modes;
pub use scaling::{admissibility_defect, k_scaling, multiplicity_scaling, ScalingKind, ScalingWeights};
