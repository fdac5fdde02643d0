//! Entities and persistent identifiers.
//!
//! Every entity of the hierarchy — cells, faces, edges, vertices — is
//! encoded by its refinement level and its *doubled coordinates* on that
//! level: on level `l`, axis `a` of the grid carries `macro_a * 2^l` cells,
//! and the doubled lattice `0 ..= 2 * macro_a * 2^l` addresses cell centers
//! with odd numbers and cell boundaries with even ones. An entity pins an
//! axis exactly when its doubled coordinate on that axis is even, so the
//! codimension is the number of even coordinates and the combinatorics of
//! the reference cube apply directly.
//!
//! The encoding has two properties the grid relies on:
//!
//! * two cells sharing a sub-entity compute the *same* doubled coordinates
//!   for it, so shared entities canonicalize themselves, and
//! * scaling the doubled coordinates to a fixed virtual level yields an
//!   identifier that is invariant under refinement and coarsening, equal
//!   for geometric copies on different levels (a vertex and its copy one
//!   level up) and distinct for everything else.

use crate::geometry::{reference_cube, GeometryType};

/// Largest usable grid dimension.
pub const MAX_GRID_DIM: usize = 4;

/// Deepest refinement level the id encoding supports.
pub const MAX_LEVEL: usize = 40;

/// A grid entity: level plus doubled coordinates. Copyable and independent
/// of the grid object; anything that needs stored state (leaf status,
/// geometry, marks) goes through the grid or a view.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Entity {
    dim: u8,
    level: u8,
    dc: [u64; MAX_GRID_DIM],
}

impl Entity {
    pub(crate) fn new(dim: usize, level: usize, dc: [u64; MAX_GRID_DIM]) -> Self {
        Entity { dim: dim as u8, level: level as u8, dc }
    }

    /// Cell (codimension zero) entity from per-axis cell coordinates.
    pub(crate) fn cell(dim: usize, level: usize, coords: [u64; MAX_GRID_DIM]) -> Self {
        let mut dc = [0u64; MAX_GRID_DIM];
        for a in 0..dim {
            dc[a] = 2 * coords[a] + 1;
        }
        Entity::new(dim, level, dc)
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn level(&self) -> usize {
        self.level as usize
    }

    pub(crate) fn doubled(&self) -> &[u64] {
        &self.dc[..self.dim as usize]
    }

    /// Per-axis cell coordinates; the entity must be a cell.
    pub(crate) fn cell_coords(&self) -> [u64; MAX_GRID_DIM] {
        debug_assert_eq!(self.codim(), 0);
        let mut c = [0u64; MAX_GRID_DIM];
        for a in 0..self.dim as usize {
            c[a] = (self.dc[a] - 1) / 2;
        }
        c
    }

    pub fn codim(&self) -> usize {
        self.doubled().iter().filter(|&&v| v % 2 == 0).count()
    }

    /// Dimension of the entity itself.
    pub fn my_dim(&self) -> usize {
        self.dim() - self.codim()
    }

    pub fn geometry_type(&self) -> GeometryType {
        GeometryType::cube(self.my_dim())
    }

    /// The `i`-th codimension-`c` sub-entity, numbered like the reference
    /// cube. Only cells carry sub-entities.
    pub fn sub_entity(&self, i: usize, c: usize) -> Entity {
        assert_eq!(self.codim(), 0, "sub-entities are enumerated from cells");
        assert!(c <= self.dim(), "codimension out of range");
        if c == 0 {
            assert_eq!(i, 0);
            return *self;
        }
        let sub = reference_cube(self.dim()).sub_entity(i, c);
        let mut dc = self.dc;
        for a in 0..self.dim() {
            if sub.fixed_mask & (1 << a) != 0 {
                // odd center coordinate +/- 1 gives the pinned boundary
                dc[a] = dc[a] - 1 + 2 * sub.side_of_axis(a) as u64;
            }
        }
        Entity::new(self.dim(), self.level(), dc)
    }

    /// Number of codimension-`c` sub-entities.
    pub fn sub_entities(&self, c: usize) -> usize {
        assert_eq!(self.codim(), 0);
        reference_cube(self.dim()).size(c)
    }

    /// Father cell one level up; `None` on level zero. The father of a cell
    /// always exists structurally; whether it is stored is the grid's
    /// business.
    pub fn father(&self) -> Option<Entity> {
        assert_eq!(self.codim(), 0, "fathers are defined for cells");
        if self.level == 0 {
            return None;
        }
        let c = self.cell_coords();
        let mut f = [0u64; MAX_GRID_DIM];
        for a in 0..self.dim() {
            f[a] = c[a] >> 1;
        }
        Some(Entity::cell(self.dim(), self.level() - 1, f))
    }

    /// The `k`-th potential child cell (binary corner numbering).
    pub(crate) fn child(&self, k: usize) -> Entity {
        debug_assert_eq!(self.codim(), 0);
        let c = self.cell_coords();
        let mut ch = [0u64; MAX_GRID_DIM];
        for a in 0..self.dim() {
            ch[a] = 2 * c[a] + ((k >> a) & 1) as u64;
        }
        Entity::cell(self.dim(), self.level() + 1, ch)
    }

    /// Position of the cell within its father, per axis (0 or 1).
    pub(crate) fn child_bits(&self) -> [u64; MAX_GRID_DIM] {
        let c = self.cell_coords();
        let mut b = [0u64; MAX_GRID_DIM];
        for a in 0..self.dim() {
            b[a] = c[a] & 1;
        }
        b
    }

    /// Persistent identifier: doubled coordinates scaled to the deepest
    /// supported level. Injective over all entities of one codimension that
    /// are not geometric copies of each other; copies share the id.
    pub fn id(&self) -> GlobalId {
        let shift = (MAX_LEVEL - self.level()) as u32;
        let mut coords = [0u64; MAX_GRID_DIM];
        for a in 0..self.dim() {
            coords[a] = self.dc[a] << shift;
        }
        GlobalId { codim: self.codim() as u8, coords }
    }
}

/// Persistent, refinement-invariant entity identifier. Ordered and hashable
/// so it can key containers that survive grid modification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GlobalId {
    pub(crate) codim: u8,
    pub(crate) coords: [u64; MAX_GRID_DIM],
}

impl GlobalId {
    pub fn codim(&self) -> usize {
        self.codim as usize
    }
}

impl std::fmt::Display for GlobalId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "c{}", self.codim)?;
        for c in self.coords {
            write!(f, ":{c:x}")?;
        }
        Ok(())
    }
}
