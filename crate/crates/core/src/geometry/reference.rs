//! Reference cube combinatorics.
//!
//! A codimension-`c` sub-entity of the `d`-cube is a face on which `c` of the
//! `d` coordinate axes are pinned to a side (0 or 1) while the remaining
//! `d - c` axes stay free. Sub-entities are numbered by enumerating the axis
//! combinations lexicographically and, within a combination, counting the
//! side bits in binary (bit `j` belongs to the `j`-th smallest pinned axis).
//!
//! Consequences of this numbering:
//! - corners follow binary counting: corner `k` has coordinate `bit_i(k)`
//!   along axis `i`;
//! - facets in 2-D come out in the order left, right, bottom, top.

use std::sync::OnceLock;

use super::{GeometryError, GeometryType, Point, MAX_DIM};

/// Raw combinatorial description of a sub-entity: which axes are pinned and
/// to which side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SubEntity {
    /// Bit `a` set: axis `a` is pinned.
    pub fixed_mask: u8,
    /// Bit `j` gives the side of the `j`-th smallest pinned axis.
    pub sides: u8,
}

impl SubEntity {
    /// Side of pinned axis `axis` (0 or 1). Panics if the axis is free.
    pub fn side_of_axis(&self, axis: usize) -> usize {
        assert!(self.fixed_mask & (1 << axis) != 0, "axis {axis} is not pinned");
        let pos = (self.fixed_mask & ((1 << axis) - 1)).count_ones();
        ((self.sides >> pos) & 1) as usize
    }
}

/// Reference element of the `d`-cube with full sub-entity tables.
pub struct ReferenceElement {
    dim: usize,
    /// `subs[c]` lists the codimension-`c` sub-entities in canonical order.
    subs: Vec<Vec<SubEntity>>,
    /// `contain[c][i][cc - c]` lists, ascending, the codim-`cc` sub-entities
    /// contained in sub-entity `(i, c)`.
    contain: Vec<Vec<Vec<Vec<usize>>>>,
}

/// All `c`-element subsets of `0..d` in lexicographic order, as bit masks.
fn combinations(d: usize, c: usize) -> Vec<u8> {
    fn rec(d: usize, c: usize, start: usize, cur: u8, out: &mut Vec<u8>) {
        if c == 0 {
            out.push(cur);
            return;
        }
        for a in start..=d - c {
            rec(d, c - 1, a + 1, cur | (1 << a), out);
        }
    }
    let mut out = Vec::new();
    if c <= d {
        rec(d, c, 0, 0, &mut out);
    }
    out
}

impl ReferenceElement {
    fn build(dim: usize) -> Self {
        let mut subs: Vec<Vec<SubEntity>> = Vec::with_capacity(dim + 1);
        for c in 0..=dim {
            let mut list = Vec::new();
            for mask in combinations(dim, c) {
                for sides in 0..(1u8 << c) {
                    list.push(SubEntity { fixed_mask: mask, sides });
                }
            }
            subs.push(list);
        }

        let mut contain: Vec<Vec<Vec<Vec<usize>>>> = Vec::with_capacity(dim + 1);
        for c in 0..=dim {
            let mut per_entity = Vec::with_capacity(subs[c].len());
            for s in &subs[c] {
                let mut per_cc = Vec::with_capacity(dim + 1 - c);
                for cc in c..=dim {
                    let mut found: Vec<usize> = subs[cc]
                        .iter()
                        .enumerate()
                        .filter(|(_, t)| {
                            // t refines s: every axis pinned in s is pinned in
                            // t to the same side
                            t.fixed_mask & s.fixed_mask == s.fixed_mask
                                && (0..dim).all(|a| {
                                    s.fixed_mask >> a & 1 == 0
                                        || t.side_of_axis(a) == s.side_of_axis(a)
                                })
                        })
                        .map(|(i, _)| i)
                        .collect();
                    found.sort_unstable();
                    per_cc.push(found);
                }
                per_entity.push(per_cc);
            }
            contain.push(per_entity);
        }

        ReferenceElement { dim, subs, contain }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of sub-entities of codimension `c`: `C(d, c) * 2^c`.
    pub fn size(&self, c: usize) -> usize {
        self.subs[c].len()
    }

    /// Geometry type of any codim-`c` sub-entity.
    pub fn geometry_type(&self, c: usize) -> GeometryType {
        GeometryType::cube(self.dim - c)
    }

    pub fn sub_entity(&self, i: usize, c: usize) -> SubEntity {
        self.subs[c][i]
    }

    /// Canonical index of the sub-entity with the given pinned axes/sides.
    pub fn sub_index(&self, s: SubEntity) -> usize {
        let c = s.fixed_mask.count_ones() as usize;
        self.subs[c]
            .iter()
            .position(|t| *t == s)
            .expect("sub-entity key out of range")
    }

    /// Indices of the codim-`cc` sub-entities contained in sub-entity
    /// `(i, c)`, ascending. Requires `c <= cc <= dim`.
    pub fn sub_entities(&self, i: usize, c: usize, cc: usize) -> &[usize] {
        assert!(c <= cc && cc <= self.dim, "containment query needs c <= cc <= dim");
        &self.contain[c][i][cc - c]
    }

    /// Position of corner `k` (binary counting).
    pub fn corner(&self, k: usize) -> Point {
        assert!(k < 1 << self.dim);
        let mut p = Point::zeros(self.dim);
        for a in 0..self.dim {
            p[a] = (k >> a & 1) as f64;
        }
        p
    }

    /// Barycenter of sub-entity `(i, c)`: pinned axes sit on their side, free
    /// axes at 1/2.
    pub fn position(&self, i: usize, c: usize) -> Point {
        let s = self.subs[c][i];
        let mut p = Point::splat(self.dim, 0.5);
        for a in 0..self.dim {
            if s.fixed_mask >> a & 1 == 1 {
                p[a] = s.side_of_axis(a) as f64;
            }
        }
        p
    }
}

/// Reference element of the `dim`-cube, cached for the crate lifetime.
pub fn reference_cube(dim: usize) -> &'static ReferenceElement {
    static REFS: OnceLock<Vec<ReferenceElement>> = OnceLock::new();
    let refs = REFS.get_or_init(|| (0..=MAX_DIM).map(ReferenceElement::build).collect());
    &refs[dim]
}

/// Reference element for a geometry type; non-cube topologies are
/// representable but have no reference element here.
pub fn reference_element(gt: GeometryType) -> Result<&'static ReferenceElement, GeometryError> {
    if !gt.is_cube() {
        return Err(GeometryError::UnsupportedTopology(gt));
    }
    Ok(reference_cube(gt.dim()))
}
