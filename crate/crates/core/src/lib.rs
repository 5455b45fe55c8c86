//! Total-FETI and FETI-DP substructuring solvers for heterogeneous 2D
//! elasticity on regular grids of square modules.

pub mod decomposition;
pub mod dual;
pub mod error;
pub mod fem;
pub mod linalg;
pub mod precond;
pub mod problems;
pub mod solver;
pub mod variant;

pub use error::{Error, Result};
