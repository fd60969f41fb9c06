//! Meshes, quadrature, continuous Lagrange spaces and sparse linear algebra.

pub mod mesh;
pub mod quadrature;
pub mod reference;
pub mod space;
pub mod sparse;

pub use mesh::{build_interval_mesh, build_triangulated_rectangle, Mesh, TrianglePattern};
pub use space::{Constraints, FeSpace, MassOperators, QpContext, QuadratureTable};
pub use sparse::{cg_csr, cg_solve, CgOptions, CsrMatrix};
