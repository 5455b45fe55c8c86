//! Benchmark problems: layered and inclusion cantilevers, modular MBB
//! snapshots from a SIMP loop, and the global direct solve they are checked
//! against.

pub mod academic;
pub mod io;
pub mod mbb;
pub mod oracle;
pub mod simp;
pub mod spec;

pub use academic::{
    academic_preset, grid3x3_layered, grid4x4_inclusion, laminated_beam, AcademicOptions, ACADEMIC_PRESETS,
    DEFAULT_CONTRAST,
};
pub use io::{read_problem, write_problem, write_snapshot};
pub use mbb::{mbb_problem, MbbOptions};
pub use oracle::{direct_oracle, relative_error, restrict_to_subdomains, GlobalSolution};
pub use simp::{mbb_modular_snapshot, SimpOptions, SimpState, SnapshotRun};
pub use spec::{PointLoad, ProblemSpec, Substructures, TractionLoad};
