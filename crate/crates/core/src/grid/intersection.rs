//! Intersections between a cell and its neighbours or the domain boundary.
//!
//! Each intersection is a flat piece of a cell facet. On the leaf view the
//! pieces come in three matching flavours: full facets between same-level
//! neighbours, the half-facet pieces a coarse cell shares with its finer
//! facet neighbours (one intersection per fine neighbour), and their
//! mirror images seen from the fine side. The pieces seen from both sides
//! of a facet tile it exactly, which is what makes conservation-style
//! surface sums cancel on interior facets.
//!
//! The world geometry of an intersection is constructed as the composition
//! of the inside cell's geometry with the embedding into the inside
//! reference cube, so the three maps are consistent by construction rather
//! than by floating-point accident.

use crate::geometry::{GeometryMap, Point};

use super::entity::{Entity, MAX_GRID_DIM};
use super::hierarchical::HierarchicalGrid;
use super::view::ViewKind;

/// Sub-box of a facet along its free axes.
#[derive(Clone, Copy)]
enum Patch {
    /// The whole facet.
    Full,
    /// The half-facet quadrant selected by one bit per axis.
    Half([u64; MAX_GRID_DIM]),
}

pub struct Intersection {
    inside: Entity,
    outside: Option<Entity>,
    boundary: bool,
    axis: usize,
    side: usize,
    in_lo: Point,
    in_hi: Point,
    out_lo: Point,
    out_hi: Point,
    mu: GeometryMap,
    normal: Point,
}

impl Intersection {
    pub fn inside(&self) -> Entity {
        self.inside
    }

    /// The neighbouring cell, absent on the boundary (and on level views
    /// where no same-level neighbour exists).
    pub fn outside(&self) -> Option<Entity> {
        self.outside
    }

    /// Lies on the domain boundary.
    pub fn boundary(&self) -> bool {
        self.boundary
    }

    pub fn neighbor(&self) -> bool {
        self.outside.is_some()
    }

    /// Facet number in the inside cell's reference cube.
    pub fn index_in_inside(&self) -> usize {
        2 * self.axis + self.side
    }

    /// Facet number in the outside cell's reference cube.
    pub fn index_in_outside(&self) -> Option<usize> {
        self.outside.map(|_| 2 * self.axis + 1 - self.side)
    }

    /// World geometry of the intersection patch.
    pub fn geometry(&self) -> &GeometryMap {
        &self.mu
    }

    /// Embedding into the reference cube of the inside cell.
    pub fn geometry_in_inside(&self) -> GeometryMap {
        embed(self.inside.dim(), self.axis, &self.in_lo, &self.in_hi)
    }

    /// Embedding into the reference cube of the outside cell.
    pub fn geometry_in_outside(&self) -> Option<GeometryMap> {
        self.outside.map(|_| embed(self.inside.dim(), self.axis, &self.out_lo, &self.out_hi))
    }

    /// Unit outer normal (pointing from inside to outside) at the patch
    /// center.
    pub fn center_unit_outer_normal(&self) -> Point {
        self.normal
    }
}

/// Multilinear embedding of the facet patch `[lo, hi]` (degenerate along
/// `axis`) into the reference cube, corners in binary order over the free
/// axes, lowest axis fastest.
fn embed(dim: usize, axis: usize, lo: &Point, hi: &Point) -> GeometryMap {
    let free: Vec<usize> = (0..dim).filter(|&a| a != axis).collect();
    let mut corners = Vec::with_capacity(1 << free.len());
    for k in 0..(1usize << free.len()) {
        let mut p = *lo;
        for (i, &a) in free.iter().enumerate() {
            if (k >> i) & 1 == 1 {
                p[a] = hi[a];
            }
        }
        corners.push(p);
    }
    GeometryMap::multilinear(dim - 1, corners)
}

fn patch_box(dim: usize, axis: usize, side: usize, patch: Patch) -> (Point, Point) {
    let mut lo = Point::zeros(dim);
    let mut hi = Point::zeros(dim);
    for a in 0..dim {
        if a == axis {
            lo[a] = side as f64;
            hi[a] = side as f64;
        } else {
            match patch {
                Patch::Full => {
                    lo[a] = 0.0;
                    hi[a] = 1.0;
                }
                Patch::Half(bits) => {
                    lo[a] = 0.5 * bits[a] as f64;
                    hi[a] = lo[a] + 0.5;
                }
            }
        }
    }
    (lo, hi)
}

#[allow(clippy::too_many_arguments)]
fn make(
    grid: &HierarchicalGrid,
    inside: Entity,
    outside: Option<Entity>,
    boundary: bool,
    axis: usize,
    side: usize,
    in_patch: Patch,
    out_patch: Patch,
) -> Intersection {
    let dim = grid.dim();
    let (in_lo, in_hi) = patch_box(dim, axis, side, in_patch);
    let (out_lo, out_hi) = patch_box(dim, axis, 1 - side, out_patch);
    let inside_geo = grid.geometry(&inside);

    // world patch = inside geometry composed with the inside embedding
    let eta = embed(dim, axis, &in_lo, &in_hi);
    let corners: Vec<Point> =
        (0..eta.num_corners()).map(|k| inside_geo.global(&eta.corner(k))).collect();
    let mu = GeometryMap::multilinear(dim - 1, corners);

    // outer normal from the inverse-transpose Jacobian at the facet center
    let mut center = Point::splat(dim, 0.5);
    for a in 0..dim {
        center[a] = 0.5 * (in_lo[a] + in_hi[a]);
    }
    let jac_t = inside_geo.jacobian(&center).transposed();
    let mut nref = crate::dense::SmallVector::zeros(dim);
    nref[axis] = if side == 0 { -1.0 } else { 1.0 };
    let y = jac_t.solve(&nref).expect("degenerate cell Jacobian");
    let mut normal = Point::zeros(dim);
    let len = y.two_norm();
    for a in 0..dim {
        normal[a] = y[a] / len;
    }

    Intersection { inside, outside, boundary, axis, side, in_lo, in_hi, out_lo, out_hi, mu, normal }
}

pub(crate) fn build_intersections(
    grid: &HierarchicalGrid,
    kind: ViewKind,
    cell: &Entity,
) -> Vec<Intersection> {
    assert_eq!(cell.codim(), 0, "intersections are built per cell");
    let dim = grid.dim();
    let level = cell.level();
    let coords = cell.cell_coords();
    let mut out = Vec::with_capacity(2 * dim);

    for axis in 0..dim {
        for side in 0..2usize {
            let mut n = coords;
            let off_domain = if side == 0 {
                if n[axis] == 0 {
                    true
                } else {
                    n[axis] -= 1;
                    false
                }
            } else {
                n[axis] += 1;
                n[axis] >= grid.cells_on_level(level, axis)
            };
            if off_domain {
                out.push(make(grid, *cell, None, true, axis, side, Patch::Full, Patch::Full));
                continue;
            }

            match grid.cell_state(level, &n) {
                Some(state) => {
                    let same_level = match kind {
                        ViewKind::Level(_) => true,
                        ViewKind::Leaf => !state.has_children,
                    };
                    if same_level {
                        let nb = Entity::cell(dim, level, n);
                        out.push(make(
                            grid,
                            *cell,
                            Some(nb),
                            false,
                            axis,
                            side,
                            Patch::Full,
                            Patch::Full,
                        ));
                    } else {
                        // finer neighbours: the children of `n` adjacent to
                        // the shared facet, each a leaf by 2:1 balance
                        for k in 0..(1usize << (dim - 1)) {
                            let mut bits = [0u64; MAX_GRID_DIM];
                            let mut child = [0u64; MAX_GRID_DIM];
                            let mut ki = 0;
                            for a in 0..dim {
                                let b = if a == axis {
                                    (1 - side) as u64
                                } else {
                                    let b = ((k >> ki) & 1) as u64;
                                    bits[a] = b;
                                    ki += 1;
                                    b
                                };
                                child[a] = 2 * n[a] + b;
                            }
                            debug_assert!(
                                grid.cell_state(level + 1, &child)
                                    .map(|s| !s.has_children)
                                    .unwrap_or(false),
                                "2:1 balance violated at a refined facet"
                            );
                            let nb = Entity::cell(dim, level + 1, child);
                            out.push(make(
                                grid,
                                *cell,
                                Some(nb),
                                false,
                                axis,
                                side,
                                Patch::Half(bits),
                                Patch::Full,
                            ));
                        }
                    }
                }
                None => match kind {
                    ViewKind::Level(_) => {
                        // no neighbour on this level: not a domain boundary,
                        // simply nothing on the other side of the view
                        out.push(make(grid, *cell, None, false, axis, side, Patch::Full, Patch::Full));
                    }
                    ViewKind::Leaf => {
                        // coarser neighbour: the father region of `n`
                        let mut f = n;
                        for x in f.iter_mut() {
                            *x >>= 1;
                        }
                        debug_assert!(
                            grid.cell_state(level - 1, &f)
                                .map(|s| !s.has_children)
                                .unwrap_or(false),
                            "2:1 balance violated at a coarse facet"
                        );
                        let nb = Entity::cell(dim, level - 1, f);
                        // which quadrant of the coarse facet we cover
                        let mut bits = [0u64; MAX_GRID_DIM];
                        for a in 0..dim {
                            if a != axis {
                                bits[a] = coords[a] & 1;
                            }
                        }
                        out.push(make(
                            grid,
                            *cell,
                            Some(nb),
                            false,
                            axis,
                            side,
                            Patch::Full,
                            Patch::Half(bits),
                        ));
                    }
                },
            }
        }
    }
    out
}
