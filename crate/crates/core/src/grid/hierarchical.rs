//! The hierarchical cube grid.
//!
//! A forest of cell trees over a structured macro grid: level 0 carries
//! `macro_0 x ... x macro_{d-1}` congruent cells on an axis-aligned box,
//! refinement replaces a cell by its `2^d` congruent children, and the set
//! of leaves forms the computational mesh. Refinement is local; a closure
//! step keeps the leaf mesh 2:1 balanced across facets, i.e. facet
//! neighbours never differ by more than one level. Coarsening removes a
//! complete sibling group and is vetoed when it would break that balance.
//!
//! Geometrically the grid covers `[lower, upper]`; an optional coordinate
//! map deforms it, turning cell geometries from axis-aligned boxes into
//! multilinear images of the mapped cell corners.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::geometry::{GeometryMap, Point};

use super::entity::{Entity, GlobalId, MAX_GRID_DIM, MAX_LEVEL};
use super::view::{GridView, ViewKind};

type CellCoord = [u64; MAX_GRID_DIM];
type CellKey = (u8, CellCoord);

#[derive(Clone, Copy, Default)]
pub(crate) struct CellState {
    pub(crate) has_children: bool,
    pub(crate) is_new: bool,
    pub(crate) might_vanish: bool,
    pub(crate) mark: i8,
}

#[derive(Default)]
pub(crate) struct Level {
    pub(crate) cells: BTreeMap<CellCoord, CellState>,
}

struct AdaptPlan {
    /// Leaf cells to refine, closed under the 2:1 balance condition.
    refine: std::collections::BTreeSet<CellKey>,
    /// Fathers whose complete child group gets removed.
    coarsen: Vec<CellKey>,
}

type CoordinateMap = Arc<dyn Fn(&Point) -> Point + Send + Sync>;

pub struct HierarchicalGrid {
    dim: usize,
    macro_cells: [u64; MAX_GRID_DIM],
    lower: Point,
    upper: Point,
    map: Option<CoordinateMap>,
    pub(crate) levels: Vec<Level>,
    plan: Option<AdaptPlan>,
}

impl HierarchicalGrid {
    /// Structured grid of `cells[a]` cells per axis on the box
    /// `[lower, upper]`.
    pub fn new(dim: usize, cells: &[usize], lower: Point, upper: Point) -> Self {
        assert!((1..=MAX_GRID_DIM).contains(&dim), "grid dimension must be 1..={MAX_GRID_DIM}");
        assert_eq!(cells.len(), dim);
        assert_eq!(lower.dim(), dim);
        assert_eq!(upper.dim(), dim);
        for a in 0..dim {
            assert!(cells[a] >= 1, "at least one cell per axis");
            assert!(upper[a] > lower[a], "degenerate box on axis {a}");
        }
        let mut macro_cells = [1u64; MAX_GRID_DIM];
        for a in 0..dim {
            macro_cells[a] = cells[a] as u64;
        }
        let mut level0 = Level::default();
        let mut c = [0u64; MAX_GRID_DIM];
        loop {
            level0.cells.insert(c, CellState::default());
            let mut a = 0;
            loop {
                if a == dim {
                    return HierarchicalGrid {
                        dim,
                        macro_cells,
                        lower,
                        upper,
                        map: None,
                        levels: vec![level0],
                        plan: None,
                    };
                }
                c[a] += 1;
                if c[a] < macro_cells[a] {
                    break;
                }
                c[a] = 0;
                a += 1;
            }
        }
    }

    /// Unit cube grid with `n` cells per axis.
    pub fn unit(dim: usize, n: usize) -> Self {
        HierarchicalGrid::new(dim, &vec![n; dim], Point::zeros(dim), Point::splat(dim, 1.0))
    }

    /// Applies a coordinate map: all geometries become multilinear images
    /// of the mapped cell corners.
    pub fn with_coordinate_map(
        mut self,
        map: impl Fn(&Point) -> Point + Send + Sync + 'static,
    ) -> Self {
        self.map = Some(Arc::new(map));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_coordinate_map(&self) -> bool {
        self.map.is_some()
    }

    /// Finest level that currently holds cells.
    pub fn max_level(&self) -> usize {
        self.levels.len() - 1
    }

    /// Number of cells per axis on `level`.
    pub(crate) fn cells_on_level(&self, level: usize, axis: usize) -> u64 {
        self.macro_cells[axis] << level
    }

    pub(crate) fn cell_state(&self, level: usize, coord: &CellCoord) -> Option<&CellState> {
        self.levels.get(level).and_then(|l| l.cells.get(coord))
    }

    fn state_of(&self, e: &Entity) -> &CellState {
        assert_eq!(e.codim(), 0, "per-cell state queries need a cell");
        self.cell_state(e.level(), &e.cell_coords()).expect("cell is not part of this grid")
    }

    /// Is the entity stored in the hierarchy? Cells by direct lookup,
    /// sub-entities if any cell on their level touches them.
    pub fn contains(&self, e: &Entity) -> bool {
        if e.dim() != self.dim {
            return false;
        }
        if e.codim() == 0 {
            return self.cell_state(e.level(), &e.cell_coords()).is_some();
        }
        let Some(level) = self.levels.get(e.level()) else { return false };
        // candidate cells: doubled coordinates of an adjacent cell differ
        // by +/-1 on pinned axes and match on free axes
        let dc = e.doubled();
        let mut cand = [0u64; MAX_GRID_DIM];
        let pinned: Vec<usize> = (0..self.dim).filter(|&a| dc[a] % 2 == 0).collect();
        'cells: for pick in 0..(1usize << pinned.len()) {
            for a in 0..self.dim {
                cand[a] = if dc[a] % 2 == 1 {
                    (dc[a] - 1) / 2
                } else {
                    let k = pinned.iter().position(|&p| p == a).unwrap();
                    let side = (pick >> k) & 1;
                    if side == 0 {
                        if dc[a] == 0 {
                            continue 'cells;
                        }
                        dc[a] / 2 - 1
                    } else {
                        if dc[a] / 2 >= self.cells_on_level(e.level(), a) {
                            continue 'cells;
                        }
                        dc[a] / 2
                    }
                };
            }
            if level.cells.contains_key(&cand) {
                return true;
            }
        }
        false
    }

    pub fn is_leaf(&self, e: &Entity) -> bool {
        !self.state_of(e).has_children
    }

    /// Was this cell created by the most recent adapt call (and not yet
    /// acknowledged by `post_adapt`)?
    pub fn is_new(&self, e: &Entity) -> bool {
        self.state_of(e).is_new
    }

    /// Set by `pre_adapt` on cells that the pending adapt may remove.
    pub fn might_vanish(&self, e: &Entity) -> bool {
        self.state_of(e).might_vanish
    }

    pub fn father(&self, e: &Entity) -> Option<Entity> {
        e.father()
    }

    /// Stored children of a cell, in binary corner order; empty for leaves.
    pub fn children(&self, e: &Entity) -> Vec<Entity> {
        if self.is_leaf(e) {
            return Vec::new();
        }
        (0..1usize << self.dim).map(|k| e.child(k)).collect()
    }

    pub fn global_id(&self, e: &Entity) -> GlobalId {
        e.id()
    }

    /// Width of a level-`level` cell along `axis`, before any coordinate
    /// map.
    fn cell_width(&self, level: usize, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / self.cells_on_level(level, axis) as f64
    }

    /// Position of a doubled lattice coordinate in the undeformed box.
    fn lattice_position(&self, level: usize, axis: usize, dc: u64) -> f64 {
        self.lower[axis] + 0.5 * dc as f64 * self.cell_width(level, axis)
    }

    /// World geometry of an entity. Axis-aligned boxes without a
    /// coordinate map, multilinear images of the mapped corners with one.
    pub fn geometry(&self, e: &Entity) -> GeometryMap {
        assert_eq!(e.dim(), self.dim);
        let dc = e.doubled();
        let free: Vec<usize> = (0..self.dim).filter(|&a| dc[a] % 2 == 1).collect();
        if self.map.is_none() && e.codim() == 0 {
            let mut lo = Point::zeros(self.dim);
            let mut hi = Point::zeros(self.dim);
            for a in 0..self.dim {
                lo[a] = self.lattice_position(e.level(), a, dc[a] - 1);
                hi[a] = self.lattice_position(e.level(), a, dc[a] + 1);
            }
            return GeometryMap::axis_box(lo, hi);
        }
        let n = 1usize << free.len();
        let mut corners = Vec::with_capacity(n);
        for k in 0..n {
            let mut p = Point::zeros(self.dim);
            for a in 0..self.dim {
                let d = if dc[a] % 2 == 0 {
                    dc[a]
                } else {
                    let bit = (k >> free.iter().position(|&f| f == a).unwrap()) & 1;
                    dc[a] - 1 + 2 * bit as u64
                };
                p[a] = self.lattice_position(e.level(), a, d);
            }
            corners.push(match &self.map {
                Some(f) => f(&p),
                None => p,
            });
        }
        GeometryMap::multilinear(free.len(), corners)
    }

    /// Embedding of a cell into the reference cube of its father.
    pub fn geometry_in_father(&self, e: &Entity) -> GeometryMap {
        assert_eq!(e.codim(), 0);
        assert!(e.level() > 0, "level-zero cells have no father");
        let bits = e.child_bits();
        let mut lo = Point::zeros(self.dim);
        let mut hi = Point::zeros(self.dim);
        for a in 0..self.dim {
            lo[a] = 0.5 * bits[a] as f64;
            hi[a] = lo[a] + 0.5;
        }
        GeometryMap::axis_box(lo, hi)
    }

    pub fn leaf_view(&self) -> GridView<'_> {
        GridView::build(self, ViewKind::Leaf)
    }

    pub fn level_view(&self, level: usize) -> GridView<'_> {
        assert!(level <= self.max_level(), "level {level} does not exist");
        GridView::build(self, ViewKind::Level(level))
    }

    // ------------------------------------------------------------ adaptation

    /// Sets the adaptation mark of a leaf cell: positive to refine,
    /// negative to coarsen, zero to keep. Marks on non-leaf cells are
    /// ignored by the adaptation pass.
    pub fn mark(&mut self, mark: i8, e: &Entity) {
        assert_eq!(e.codim(), 0, "only cells can be marked");
        let coord = e.cell_coords();
        let state = self
            .levels
            .get_mut(e.level())
            .and_then(|l| l.cells.get_mut(&coord))
            .expect("cell is not part of this grid");
        state.mark = mark.signum();
        self.plan = None;
    }

    pub fn get_mark(&self, e: &Entity) -> i8 {
        self.state_of(e).mark
    }

    /// Closes the set of positively marked leaves under the 2:1 facet
    /// balance condition: refining a cell whose facet neighbour is one
    /// level coarser forces that neighbour to refine as well, cascading
    /// down.
    fn refine_closure(&self) -> std::collections::BTreeSet<CellKey> {
        let mut set = std::collections::BTreeSet::new();
        let mut work: Vec<CellKey> = Vec::new();
        for (li, level) in self.levels.iter().enumerate() {
            for (coord, st) in &level.cells {
                if !st.has_children && st.mark > 0 {
                    let key = (li as u8, *coord);
                    set.insert(key);
                    work.push(key);
                }
            }
        }
        while let Some((li, coord)) = work.pop() {
            let l = li as usize;
            for a in 0..self.dim {
                for side in 0..2u64 {
                    let mut n = coord;
                    if side == 0 {
                        if n[a] == 0 {
                            continue;
                        }
                        n[a] -= 1;
                    } else {
                        n[a] += 1;
                        if n[a] >= self.cells_on_level(l, a) {
                            continue;
                        }
                    }
                    if self.cell_state(l, &n).is_some() {
                        continue; // same level or finer: balance kept
                    }
                    // neighbour region is a coarser leaf: force-refine it
                    debug_assert!(l > 0, "level-zero neighbours always exist");
                    let mut f = n;
                    for x in f.iter_mut() {
                        *x >>= 1;
                    }
                    let key = ((l - 1) as u8, f);
                    debug_assert!(
                        self.cell_state(l - 1, &f).map(|s| !s.has_children).unwrap_or(false),
                        "balance invariant violated before adaptation"
                    );
                    if set.insert(key) {
                        work.push(key);
                    }
                }
            }
        }
        set
    }

    /// Complete sibling groups of coarsening candidates, after the balance
    /// veto. Returns the fathers.
    fn coarsen_groups(&self, refine: &std::collections::BTreeSet<CellKey>) -> Vec<CellKey> {
        let kids = 1usize << self.dim;
        let mut fathers = std::collections::BTreeSet::new();
        for (li, level) in self.levels.iter().enumerate().skip(1) {
            'cells: for (coord, st) in &level.cells {
                if st.has_children || st.mark >= 0 {
                    continue;
                }
                let mut f = *coord;
                for x in f.iter_mut() {
                    *x >>= 1;
                }
                if fathers.contains(&(li as u8 - 1, f)) {
                    continue;
                }
                // the whole sibling group must consist of leaves marked for
                // coarsening that no closure step wants refined
                let mut group = Vec::with_capacity(kids);
                for k in 0..kids {
                    let mut c = f;
                    for (a, x) in c.iter_mut().enumerate().take(self.dim) {
                        *x = 2 * *x + ((k >> a) & 1) as u64;
                    }
                    match self.cell_state(li, &c) {
                        Some(s) if !s.has_children && s.mark < 0 => {
                            if refine.contains(&(li as u8, c)) {
                                continue 'cells;
                            }
                            group.push(c);
                        }
                        _ => continue 'cells,
                    }
                }
                // balance veto: after coarsening, the father is a leaf on
                // level li-1; any neighbour leaf on level li+1 (existing
                // children or pending refinement next door) would violate
                // the 2:1 condition
                for c in &group {
                    for a in 0..self.dim {
                        for side in 0..2u64 {
                            let mut n = *c;
                            if side == 0 {
                                if n[a] == 0 {
                                    continue;
                                }
                                n[a] -= 1;
                            } else {
                                n[a] += 1;
                                if n[a] >= self.cells_on_level(li, a) {
                                    continue;
                                }
                            }
                            if n[a] >> 1 == f[a] {
                                continue; // sibling-internal facet
                            }
                            if let Some(s) = self.cell_state(li, &n) {
                                if s.has_children || refine.contains(&(li as u8, n)) {
                                    continue 'cells;
                                }
                            }
                        }
                    }
                }
                fathers.insert((li as u8 - 1, f));
            }
        }
        fathers.into_iter().collect()
    }

    fn compute_plan(&self) -> AdaptPlan {
        let refine = self.refine_closure();
        let coarsen = self.coarsen_groups(&refine);
        AdaptPlan { refine, coarsen }
    }

    /// Evaluates the pending marks. Returns whether any cell might be
    /// removed by the following `adapt`, and flags those cells.
    pub fn pre_adapt(&mut self) -> bool {
        let plan = self.compute_plan();
        let kids = 1usize << self.dim;
        for (li, f) in &plan.coarsen {
            let l = *li as usize + 1;
            for k in 0..kids {
                let mut c = *f;
                for (a, x) in c.iter_mut().enumerate().take(self.dim) {
                    *x = 2 * *x + ((k >> a) & 1) as u64;
                }
                self.levels[l].cells.get_mut(&c).expect("planned child missing").might_vanish =
                    true;
            }
        }
        let coarsening = !plan.coarsen.is_empty();
        self.plan = Some(plan);
        coarsening
    }

    /// Executes the marked refinement (with balance closure) and
    /// coarsening (with veto). Returns whether any cell was refined. New
    /// cells carry the `is_new` flag until `post_adapt`.
    pub fn adapt(&mut self) -> bool {
        let plan = self.plan.take().unwrap_or_else(|| self.compute_plan());
        let kids = 1usize << self.dim;
        let refined = !plan.refine.is_empty();

        for (li, coord) in &plan.refine {
            let l = *li as usize;
            assert!(l + 1 <= MAX_LEVEL, "maximum refinement depth {MAX_LEVEL} exceeded");
            if self.levels.len() == l + 1 {
                self.levels.push(Level::default());
            }
            self.levels[l].cells.get_mut(coord).expect("planned cell missing").has_children =
                true;
            for k in 0..kids {
                let mut c = *coord;
                for (a, x) in c.iter_mut().enumerate().take(self.dim) {
                    *x = 2 * *x + ((k >> a) & 1) as u64;
                }
                self.levels[l + 1]
                    .cells
                    .insert(c, CellState { is_new: true, ..CellState::default() });
            }
        }

        for (li, f) in &plan.coarsen {
            let l = *li as usize;
            for k in 0..kids {
                let mut c = *f;
                for (a, x) in c.iter_mut().enumerate().take(self.dim) {
                    *x = 2 * *x + ((k >> a) & 1) as u64;
                }
                self.levels[l + 1].cells.remove(&c);
            }
            self.levels[l].cells.get_mut(f).expect("father missing").has_children = false;
        }

        while self.levels.len() > 1 && self.levels.last().unwrap().cells.is_empty() {
            self.levels.pop();
        }
        for level in &mut self.levels {
            for st in level.cells.values_mut() {
                st.mark = 0;
            }
        }
        refined
    }

    /// Clears the bookkeeping flags of the adaptation cycle.
    pub fn post_adapt(&mut self) {
        for level in &mut self.levels {
            for st in level.cells.values_mut() {
                st.is_new = false;
                st.might_vanish = false;
            }
        }
        self.plan = None;
    }

    /// Refines every leaf cell, `times` times.
    pub fn global_refine(&mut self, times: usize) {
        for _ in 0..times {
            let kids = 1usize << self.dim;
            let top = self.levels.len();
            for l in 0..top {
                assert!(l + 1 <= MAX_LEVEL, "maximum refinement depth {MAX_LEVEL} exceeded");
                let leaves: Vec<CellCoord> = self.levels[l]
                    .cells
                    .iter()
                    .filter(|(_, s)| !s.has_children)
                    .map(|(c, _)| *c)
                    .collect();
                if leaves.is_empty() {
                    continue;
                }
                if self.levels.len() == l + 1 {
                    self.levels.push(Level::default());
                }
                for coord in leaves {
                    self.levels[l].cells.get_mut(&coord).unwrap().has_children = true;
                    for k in 0..kids {
                        let mut c = coord;
                        for (a, x) in c.iter_mut().enumerate().take(self.dim) {
                            *x = 2 * *x + ((k >> a) & 1) as u64;
                        }
                        self.levels[l + 1]
                            .cells
                            .insert(c, CellState { is_new: true, ..CellState::default() });
                    }
                }
            }
        }
    }

    /// All ids of stored entities of one codimension, for container
    /// compaction.
    pub(crate) fn collect_ids(&self, codim: usize) -> std::collections::BTreeSet<GlobalId> {
        let mut ids = std::collections::BTreeSet::new();
        for (li, level) in self.levels.iter().enumerate() {
            for coord in level.cells.keys() {
                let cell = Entity::cell(self.dim, li, *coord);
                if codim == 0 {
                    ids.insert(cell.id());
                } else {
                    for k in 0..cell.sub_entities(codim) {
                        ids.insert(cell.sub_entity(k, codim).id());
                    }
                }
            }
        }
        ids
    }
}
