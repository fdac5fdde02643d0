//! Reference cubes, geometry maps and quadrature.
//!
//! Coordinates live in a fixed-capacity [`Point`] so that code can be generic
//! over the run-time dimension `d <= MAX_DIM` without allocating. The
//! reference element of the `d`-cube enumerates sub-entities of every
//! codimension by (axis combination, side bits); geometry maps transform its
//! local coordinates to world space either as axis-aligned boxes or as
//! multilinear interpolants of corner positions.

mod map;
mod point;
mod quadrature;
mod reference;

pub use map::GeometryMap;
pub use point::{Point, MAX_DIM};
pub use quadrature::{quadrature_rule, QuadPoint, QuadratureRule, MAX_QUADRATURE_ORDER};
pub use reference::{reference_cube, reference_element, ReferenceElement, SubEntity};

use thiserror::Error;

/// Topology of a reference element. Only cubes are backed by grids and
/// quadrature here; the simplex variant exists so that foreign topologies can
/// be represented and rejected cleanly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Topology {
    Cube,
    Simplex,
}

/// Dimension plus topology tag of an entity.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct GeometryType {
    dim: u8,
    topology: Topology,
}

impl GeometryType {
    pub fn cube(dim: usize) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds capacity {MAX_DIM}");
        GeometryType { dim: dim as u8, topology: Topology::Cube }
    }

    pub fn simplex(dim: usize) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds capacity {MAX_DIM}");
        GeometryType { dim: dim as u8, topology: Topology::Simplex }
    }

    pub fn vertex() -> Self {
        Self::cube(0)
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn is_cube(&self) -> bool {
        self.topology == Topology::Cube
    }

    pub fn is_simplex(&self) -> bool {
        self.topology == Topology::Simplex
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }
}

impl std::fmt::Debug for GeometryType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.topology {
            Topology::Cube => write!(f, "cube({})", self.dim),
            Topology::Simplex => write!(f, "simplex({})", self.dim),
        }
    }
}

/// Errors from geometry queries.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("unsupported topology {0:?}: only cube reference elements are implemented")]
    UnsupportedTopology(GeometryType),
    #[error("quadrature order {order} exceeds the supported maximum {max}")]
    UnsupportedOrder { order: usize, max: usize },
    #[error("local coordinate inversion did not converge within {0} Newton iterations")]
    InversionDiverged(usize),
    #[error("singular Jacobian encountered during coordinate inversion")]
    SingularJacobian,
}
