//! Grid views and index sets.
//!
//! A view is a consistent snapshot of either the leaf mesh or one level of
//! the hierarchy. It enumerates cells in a deterministic order (level
//! ascending, coordinates lexicographic) and assigns consecutive zero-based
//! indices per codimension to every entity reachable as a sub-entity of a
//! view cell. Sub-entities shared between cells — including cells on
//! different levels of the leaf view — canonicalize to one index because
//! the index is keyed on the level-independent id coordinates.
//!
//! Views borrow the grid, so the borrow checker retires them before any
//! grid modification; an index set can never silently go stale.

use std::collections::BTreeMap;

use super::entity::{Entity, MAX_GRID_DIM};
use super::hierarchical::HierarchicalGrid;
use super::intersection::{build_intersections, Intersection};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViewKind {
    Leaf,
    Level(usize),
}

struct SubIndex {
    index: BTreeMap<[u64; MAX_GRID_DIM], u32>,
    reps: Vec<Entity>,
}

pub struct GridView<'g> {
    grid: &'g HierarchicalGrid,
    kind: ViewKind,
    cells: Vec<Entity>,
    cell_index: BTreeMap<(u8, [u64; MAX_GRID_DIM]), u32>,
    /// Per codimension 1..=dim, shifted by one.
    sub: Vec<SubIndex>,
}

impl<'g> GridView<'g> {
    pub(crate) fn build(grid: &'g HierarchicalGrid, kind: ViewKind) -> Self {
        let dim = grid.dim();
        let mut cells = Vec::new();
        for (li, level) in grid.levels.iter().enumerate() {
            match kind {
                ViewKind::Leaf => {
                    for (coord, st) in &level.cells {
                        if !st.has_children {
                            cells.push(Entity::cell(dim, li, *coord));
                        }
                    }
                }
                ViewKind::Level(l) if l == li => {
                    for coord in level.cells.keys() {
                        cells.push(Entity::cell(dim, li, *coord));
                    }
                }
                ViewKind::Level(_) => {}
            }
        }
        let mut cell_index = BTreeMap::new();
        for (i, c) in cells.iter().enumerate() {
            let mut dc = [0u64; MAX_GRID_DIM];
            dc[..dim].copy_from_slice(c.doubled());
            cell_index.insert((c.level() as u8, dc), i as u32);
        }
        let mut sub: Vec<SubIndex> = (1..=dim)
            .map(|_| SubIndex { index: BTreeMap::new(), reps: Vec::new() })
            .collect();
        for cell in &cells {
            for c in 1..=dim {
                let s = &mut sub[c - 1];
                for k in 0..cell.sub_entities(c) {
                    let e = cell.sub_entity(k, c);
                    let next = s.reps.len() as u32;
                    if let std::collections::btree_map::Entry::Vacant(v) =
                        s.index.entry(e.id().coords)
                    {
                        v.insert(next);
                        s.reps.push(e);
                    }
                }
            }
        }
        GridView { grid, kind, cells, cell_index, sub }
    }

    pub fn grid(&self) -> &'g HierarchicalGrid {
        self.grid
    }

    pub fn kind(&self) -> ViewKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// Number of entities of the given codimension in the view.
    pub fn size(&self, codim: usize) -> usize {
        if codim == 0 {
            self.cells.len()
        } else {
            self.sub[codim - 1].reps.len()
        }
    }

    /// Cells in deterministic view order.
    pub fn cells(&self) -> impl Iterator<Item = Entity> + '_ {
        self.cells.iter().copied()
    }

    /// Entities of one codimension, ordered by index.
    pub fn entities(&self, codim: usize) -> impl Iterator<Item = Entity> + '_ {
        let slice = if codim == 0 { &self.cells } else { &self.sub[codim - 1].reps };
        slice.iter().copied()
    }

    /// Consecutive zero-based index of an entity within its codimension.
    /// Panics when the entity is not part of the view.
    pub fn index(&self, e: &Entity) -> usize {
        self.try_index(e).expect("entity is not part of this view")
    }

    pub fn try_index(&self, e: &Entity) -> Option<usize> {
        if e.codim() == 0 {
            let mut dc = [0u64; MAX_GRID_DIM];
            dc[..e.dim()].copy_from_slice(e.doubled());
            self.cell_index.get(&(e.level() as u8, dc)).map(|&i| i as usize)
        } else {
            self.sub[e.codim() - 1].index.get(&e.id().coords).map(|&i| i as usize)
        }
    }

    /// Index of sub-entity `(k, c)` of a view cell.
    pub fn sub_index(&self, cell: &Entity, k: usize, c: usize) -> usize {
        self.index(&cell.sub_entity(k, c))
    }

    pub fn contains(&self, e: &Entity) -> bool {
        self.try_index(e).is_some()
    }

    /// The intersections of a view cell with its neighbours and the domain
    /// boundary, ordered by facet and sub-facet.
    pub fn intersections(&self, cell: &Entity) -> Vec<Intersection> {
        build_intersections(self.grid, self.kind, cell)
    }

    /// Total undeformed or deformed volume of the view cells.
    pub fn volume(&self) -> f64 {
        self.cells().map(|c| self.grid.geometry(&c).volume()).sum()
    }
}

/// Maps the entities of selected codimensions to one consecutive range,
/// grouped by codimension in ascending order.
pub struct Mapper {
    offsets: Vec<Option<usize>>,
    size: usize,
}

impl Mapper {
    pub fn new(view: &GridView, codims: &[usize]) -> Self {
        let dim = view.dim();
        let mut offsets = vec![None; dim + 1];
        let mut size = 0;
        for c in 0..=dim {
            if codims.contains(&c) {
                offsets[c] = Some(size);
                size += view.size(c);
            }
        }
        Mapper { offsets, size }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Mapped index of an entity; panics when its codimension is not part
    /// of the layout.
    pub fn index(&self, view: &GridView, e: &Entity) -> usize {
        let off = self.offsets[e.codim()].expect("codimension not covered by the mapper");
        off + view.index(e)
    }

    pub fn sub_index(&self, view: &GridView, cell: &Entity, k: usize, c: usize) -> usize {
        let off = self.offsets[c].expect("codimension not covered by the mapper");
        off + view.sub_index(cell, k, c)
    }
}
