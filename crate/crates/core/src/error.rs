use thiserror::Error;

/// Errors raised by the substructuring library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not positive definite: pivot {pivot:e} at row {row}")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("matrix is indefinite: pivot {pivot:e} below -{threshold:e}")]
    IndefiniteInput { pivot: f64, threshold: f64 },
    #[error("right-hand side is not orthogonal to the nullspace (mode {mode}: {projection:e} > {bound:e})")]
    IncompatibleRhs {
        mode: usize,
        projection: f64,
        bound: f64,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("value outside its admissible domain: {0}")]
    DomainError(String),
    #[error("edge does not lie on the mesh boundary: {0}")]
    EdgeNotOnBoundary(String),
    #[error("node ({0}, {1}) is not part of the mesh")]
    NodeNotFound(usize, usize),
    #[error("subdomain {0} keeps a singular remainder block with the chosen corners")]
    InsufficientCorners(usize),
    #[error("non-positive stiffness diagonal {value:e} at subdomain {subdomain}, dof {dof}")]
    ZeroStiffnessDiagonal {
        subdomain: usize,
        dof: usize,
        value: f64,
    },
    #[error("interior block of subdomain {0} is singular")]
    SingularInterior(usize),
    #[error("coarse rigid-body system G G^T is singular")]
    CoarseSingular,
    #[error("remainder block of subdomain {0} is singular")]
    SingularRemainder(usize),
    #[error("assembled primal coarse matrix is singular")]
    SingularCoarse,
    #[error("global stiffness matrix is singular (insufficient supports)")]
    SingularGlobal,
    #[error("multipliers not converged: relative jump {jump:e} exceeds {limit:e}")]
    NotConverged { jump: f64, limit: f64 },
    #[error("negative inner product r^T z = {value:e} (bound {bound:e})")]
    NegativeInnerProduct { value: f64, bound: f64 },
    #[error("state solve failed at optimization iteration {iteration}: {reason}")]
    StateSolveFailed { iteration: usize, reason: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
