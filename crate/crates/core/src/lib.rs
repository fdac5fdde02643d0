//! Dimension-generic finite element infrastructure on structured cube grids.
//!
//! The crate is organized bottom-up:
//!
//! - [`dense`]: scalar field abstraction (real, complex, SIMD-style lanes)
//!   and small dense vectors/matrices used for geometry and matrix blocks.
//! - [`geometry`]: reference cubes, geometry maps, quadrature rules.
//! - [`grid`]: hierarchical adaptive cube grids with views, intersections,
//!   index sets, persistent ids and nonconforming local refinement.
//! - [`linalg`]: blocked sparse matrices, block vectors, linear operators.
//! - [`solvers`]: preconditioners, Krylov solvers, INI-style configuration.
//! - [`localfe`]: local Lagrange finite elements on cubes.
//! - [`basis`]: tree-structured global function space bases over grid views.

pub mod basis;
pub mod dense;
pub mod geometry;
pub mod grid;
pub mod linalg;
pub mod localfe;
pub mod solvers;
