//! Structured Q4 finite elements for plane-stress elasticity with SIMP
//! stiffness interpolation.

pub mod assembly;
pub mod density;
pub mod element;
pub mod material;
pub mod mesh;

pub use assembly::{apply_traction, assemble_subdomain, edge_nodes, element_moduli, EdgeSpec, SubdomainSystem};
pub use density::DensityField;
pub use element::{q4_element_stiffness, q4_unit_stiffness, ElementMatrix};
pub use material::{simp_modulus, simp_modulus_derivative, Material};
pub use mesh::StructuredMesh;
