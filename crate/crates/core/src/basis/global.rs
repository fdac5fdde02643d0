//! Global bases over grid views: construction, size queries, local views,
//! subspaces, interpolation and discrete-function evaluation.

use std::ops::Range;
use std::sync::Arc;

use super::tree::IndexTree;
use super::{BasisDescriptor, BasisError, CoeffVec, MultiIndex, Strategy};
use crate::dense::SmallVector;
use crate::geometry::Point;
use crate::grid::{Entity, GridView, MAX_GRID_DIM};
use crate::localfe::{lagrange_element, CubeLagrange};

/// One scalar Lagrange space instantiated over the view: the local element,
/// the digits identifying the leaf inside the index tree, and offsets that
/// assign consecutive indices to the entity-attached DOFs.
struct LeafSpace {
    fe: Arc<CubeLagrange>,
    /// Leading digits contributed by blocked ancestors.
    prefix: Vec<u32>,
    /// Offset inside the terminal digit contributed by flat ancestors.
    offset: usize,
    /// Position among the scalar components (AST leaves in DFS order).
    component: usize,
    /// Per codimension: (base offset, DOFs per entity).
    slots: [Option<(usize, usize)>; MAX_GRID_DIM + 1],
    /// Scalar dimension of this leaf's space on the view.
    total: usize,
}

/// A function-space basis over the leaf entities of one grid view.
///
/// Degrees of freedom are attached to grid entities through the local
/// element's coefficient keys; elements sharing an entity therefore share
/// the DOFs sitting on it. The basis borrows the view, so it must be
/// rebuilt (on a fresh view) after the grid adapts.
pub struct GlobalBasis<'a> {
    view: &'a GridView<'a>,
    descriptor: BasisDescriptor,
    tree: IndexTree,
    leaves: Vec<LeafSpace>,
}

/// Builds the global basis described by `descriptor` over `view`.
pub fn make_basis<'a>(
    view: &'a GridView<'a>,
    descriptor: &BasisDescriptor,
) -> Result<GlobalBasis<'a>, BasisError> {
    let dim = view.dim();
    if !(1..=3).contains(&dim) {
        return Err(BasisError::UnsupportedDimension { dim });
    }
    let mut leaves = Vec::new();
    let tree = build(view, descriptor, &mut Vec::new(), 0, &mut leaves)?;
    Ok(GlobalBasis { view, descriptor: descriptor.clone(), tree, leaves })
}

/// Recursive descriptor instantiation. Blocked nodes extend the digit
/// prefix; flat nodes shift their children inside the shared terminal
/// digit, which requires the children to be single-digit themselves.
fn build(
    view: &GridView,
    desc: &BasisDescriptor,
    prefix: &mut Vec<u32>,
    offset: usize,
    leaves: &mut Vec<LeafSpace>,
) -> Result<IndexTree, BasisError> {
    match desc {
        BasisDescriptor::Lagrange { order } => {
            if !(1..=2).contains(order) {
                return Err(BasisError::UnsupportedLeaf { order: *order });
            }
            let fe = lagrange_element(view.dim(), *order);
            let (slots, total) = scalar_layout(view, &fe);
            leaves.push(LeafSpace {
                fe,
                prefix: prefix.clone(),
                offset,
                component: leaves.len(),
                slots,
                total,
            });
            Ok(IndexTree::Terminal { size: total })
        }
        BasisDescriptor::Power { child, multiplicity, strategy } => {
            if *multiplicity == 0 {
                return Err(BasisError::EmptyNode);
            }
            build_children(view, prefix, offset, leaves, *strategy, vec![
                child.as_ref();
                *multiplicity
            ])
        }
        BasisDescriptor::Composite { children, strategy } => {
            if children.is_empty() {
                return Err(BasisError::EmptyNode);
            }
            build_children(view, prefix, offset, leaves, *strategy, children.iter().collect())
        }
    }
}

fn build_children(
    view: &GridView,
    prefix: &mut Vec<u32>,
    offset: usize,
    leaves: &mut Vec<LeafSpace>,
    strategy: Strategy,
    children: Vec<&BasisDescriptor>,
) -> Result<IndexTree, BasisError> {
    match strategy {
        Strategy::BlockedLexicographic => {
            let mut trees = Vec::with_capacity(children.len());
            for (k, child) in children.into_iter().enumerate() {
                prefix.push(k as u32);
                let t = build(view, child, prefix, 0, leaves)?;
                prefix.pop();
                trees.push(t);
            }
            Ok(IndexTree::Blocked { children: trees })
        }
        Strategy::FlatLexicographic => {
            let mut size = 0;
            for child in children {
                match build(view, child, prefix, offset + size, leaves)? {
                    IndexTree::Terminal { size: s } => size += s,
                    IndexTree::Blocked { .. } => return Err(BasisError::FlatOverNested),
                }
            }
            Ok(IndexTree::Terminal { size })
        }
    }
}

/// Consecutive index layout for one scalar space: DOFs are grouped by
/// codimension (ascending), each entity holding the element's per-entity
/// DOF count.
fn scalar_layout(
    view: &GridView,
    fe: &CubeLagrange,
) -> ([Option<(usize, usize)>; MAX_GRID_DIM + 1], usize) {
    let mut per = [0usize; MAX_GRID_DIM + 1];
    for j in 0..fe.size() {
        let key = fe.local_key(j);
        let c = key.codim as usize;
        per[c] = per[c].max(key.index as usize + 1);
    }
    let mut slots = [None; MAX_GRID_DIM + 1];
    let mut base = 0;
    for (c, &n) in per.iter().enumerate().take(view.dim() + 1) {
        if n > 0 {
            slots[c] = Some((base, n));
            base += view.size(c) * n;
        }
    }
    (slots, base)
}

impl<'a> GlobalBasis<'a> {
    pub fn view(&self) -> &'a GridView<'a> {
        self.view
    }

    pub fn descriptor(&self) -> &BasisDescriptor {
        &self.descriptor
    }

    /// Total number of basis functions (summed over all blocks).
    pub fn dimension(&self) -> usize {
        self.tree.total()
    }

    /// Number of values the digit after `prefix` can take; 0 if the prefix
    /// already addresses a complete index.
    pub fn size(&self, prefix: &[u32]) -> Result<usize, BasisError> {
        self.tree.size_at(prefix)
    }

    /// Number of scalar components of functions in this space.
    pub fn components(&self) -> usize {
        self.leaves.len()
    }

    /// Basis functions per element.
    pub fn local_size(&self) -> usize {
        self.leaves.iter().map(|l| l.fe.size()).sum()
    }

    /// Global multi-index of basis function `j` of `leaf` on `cell`.
    fn multi_index(&self, leaf: &LeafSpace, cell: &Entity, j: usize) -> MultiIndex {
        let key = leaf.fe.local_key(j);
        let (base, per) = leaf.slots[key.codim as usize].expect("every key codimension has a slot");
        let sub = self.view.sub_index(cell, key.sub_entity as usize, key.codim as usize);
        let scalar = base + sub * per + key.index as usize;
        let mut digits = Vec::with_capacity(leaf.prefix.len() + 1);
        digits.extend_from_slice(&leaf.prefix);
        digits.push((leaf.offset + scalar) as u32);
        MultiIndex::new(digits)
    }

    /// Zero coefficient container in this basis's layout.
    pub fn zero_coefficients(&self) -> CoeffVec {
        match &self.tree {
            IndexTree::Terminal { size } => CoeffVec::Flat(vec![0.0; *size]),
            IndexTree::Blocked { children } => {
                CoeffVec::Nested(children.iter().map(|c| vec![0.0; c.total()]).collect())
            }
        }
    }

    /// Checks that a container matches this basis's layout.
    pub fn check_coefficients(&self, coeffs: &CoeffVec) -> Result<(), BasisError> {
        let ok = match (&self.tree, coeffs) {
            (IndexTree::Terminal { size }, CoeffVec::Flat(v)) => v.len() == *size,
            (IndexTree::Blocked { children }, CoeffVec::Nested(blocks)) => {
                blocks.len() == children.len()
                    && children.iter().zip(blocks).all(|(c, b)| b.len() == c.total())
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(BasisError::CoefficientShape)
        }
    }

    /// Storage slot of a multi-index: top-level block (for nested layouts)
    /// and position inside it.
    fn locate(&self, mi: &MultiIndex) -> (Option<usize>, usize) {
        match &self.tree {
            IndexTree::Terminal { .. } => {
                (None, self.tree.flatten(mi).expect("multi-index must address the basis"))
            }
            IndexTree::Blocked { children } => {
                let c = mi[0] as usize;
                assert!(c < children.len(), "multi-index must address the basis");
                (Some(c), children[c].flatten(&mi[1..]).expect("multi-index must address the basis"))
            }
        }
    }

    /// Coefficient addressed by a multi-index.
    pub fn coeff(&self, coeffs: &CoeffVec, mi: &MultiIndex) -> f64 {
        match (self.locate(mi), coeffs) {
            ((None, i), CoeffVec::Flat(v)) => v[i],
            ((Some(c), i), CoeffVec::Nested(blocks)) => blocks[c][i],
            _ => panic!("coefficient container does not match the basis layout"),
        }
    }

    /// Mutable coefficient addressed by a multi-index.
    pub fn coeff_mut<'c>(&self, coeffs: &'c mut CoeffVec, mi: &MultiIndex) -> &'c mut f64 {
        match (self.locate(mi), coeffs) {
            ((None, i), CoeffVec::Flat(v)) => &mut v[i],
            ((Some(c), i), CoeffVec::Nested(blocks)) => &mut blocks[c][i],
            _ => panic!("coefficient container does not match the basis layout"),
        }
    }

    /// Fresh unbound local view.
    pub fn local_view(&self) -> LocalView<'_> {
        let mut starts = Vec::with_capacity(self.leaves.len() + 1);
        starts.push(0);
        let mut acc = 0;
        for leaf in &self.leaves {
            acc += leaf.fe.size();
            starts.push(acc);
        }
        LocalView { basis: self, cell: None, indices: Vec::new(), starts }
    }

    /// Restriction to the descriptor subtree addressed by `path`: the index
    /// layout stays that of the full basis, but iteration and interpolation
    /// only touch the addressed components.
    pub fn subspace(&self, path: &[u32]) -> Result<SubspaceBasis<'_>, BasisError> {
        let mut desc = &self.descriptor;
        let mut first = 0usize;
        for &k in path {
            let k = k as usize;
            first += match desc {
                BasisDescriptor::Power { child, multiplicity, .. } if k < *multiplicity => {
                    k * child.components()
                }
                BasisDescriptor::Composite { children, .. } if k < children.len() => {
                    children[..k].iter().map(|c| c.components()).sum()
                }
                _ => return Err(BasisError::InvalidPath { path: path.to_vec() }),
            };
            desc = desc.child(k).expect("validated above");
        }
        Ok(SubspaceBasis { basis: self, leaf_range: first..first + desc.components() })
    }

    /// Lagrange interpolation: every DOF coefficient becomes `f` evaluated
    /// at the DOF's world node position, components routed by tree position
    /// (`f` returns one value per scalar component, in DFS leaf order).
    pub fn interpolate(
        &self,
        coeffs: &mut CoeffVec,
        f: impl Fn(&Point) -> Vec<f64>,
    ) -> Result<(), BasisError> {
        self.interpolate_leaves(0..self.leaves.len(), coeffs, &f)
    }

    fn interpolate_leaves(
        &self,
        range: Range<usize>,
        coeffs: &mut CoeffVec,
        f: &dyn Fn(&Point) -> Vec<f64>,
    ) -> Result<(), BasisError> {
        self.check_coefficients(coeffs)?;
        let ncomp = range.len();
        for cell in self.view.cells() {
            let geo = self.view.grid().geometry(&cell);
            for leaf in &self.leaves[range.clone()] {
                for j in 0..leaf.fe.size() {
                    let x = geo.global(&leaf.fe.node(j));
                    let values = f(&x);
                    if values.len() != ncomp {
                        return Err(BasisError::RangeDimension {
                            expected: ncomp,
                            got: values.len(),
                        });
                    }
                    let mi = self.multi_index(leaf, &cell, j);
                    *self.coeff_mut(coeffs, &mi) = values[leaf.component - range.start];
                }
            }
        }
        Ok(())
    }

    /// Value of the discrete function at `xhat` on `cell`, one entry per
    /// scalar component.
    pub fn evaluate(&self, coeffs: &CoeffVec, cell: &Entity, xhat: &Point) -> Vec<f64> {
        self.check_coefficients(coeffs).expect("coefficient container matches the basis");
        let mut out = vec![0.0; self.leaves.len()];
        let mut vals = Vec::new();
        for leaf in &self.leaves {
            leaf.fe.evaluate(xhat, &mut vals);
            let mut acc = 0.0;
            for (j, v) in vals.iter().enumerate() {
                acc += self.coeff(coeffs, &self.multi_index(leaf, cell, j)) * v;
            }
            out[leaf.component] = acc;
        }
        out
    }

    /// World-coordinate gradient of the discrete function at `xhat` on
    /// `cell`, one gradient per scalar component.
    pub fn evaluate_gradient(&self, coeffs: &CoeffVec, cell: &Entity, xhat: &Point) -> Vec<Point> {
        self.check_coefficients(coeffs).expect("coefficient container matches the basis");
        let dim = self.view.dim();
        let geo = self.view.grid().geometry(cell);
        let jt = geo.jacobian(xhat).transposed();
        let mut out = Vec::with_capacity(self.leaves.len());
        let mut grads = Vec::new();
        for leaf in &self.leaves {
            leaf.fe.jacobian(xhat, &mut grads);
            let mut acc = Point::zeros(dim);
            for (j, g) in grads.iter().enumerate() {
                acc.axpy(self.coeff(coeffs, &self.multi_index(leaf, cell, j)), g);
            }
            let world = jt
                .solve(&SmallVector::from_slice(acc.as_slice()))
                .expect("cell geometries are regular");
            out.push(Point::from_slice(world.as_slice()));
        }
        out
    }
}

/// Bindable view of the basis on one element: enumerates the element's
/// basis functions consecutively from 0 (leaves in DFS order) and maps
/// local indices to global multi-indices.
pub struct LocalView<'b> {
    basis: &'b GlobalBasis<'b>,
    cell: Option<Entity>,
    indices: Vec<MultiIndex>,
    /// Local start of each leaf's range, plus the total as final entry.
    starts: Vec<usize>,
}

impl<'b> LocalView<'b> {
    /// Binds to a cell of the basis's view, (re)computing the
    /// local-to-global table. The same view can rebind any number of times.
    pub fn bind(&mut self, cell: Entity) {
        assert!(self.basis.view.contains(&cell), "element is not part of the basis view");
        assert_eq!(cell.codim(), 0, "local views bind to cells");
        self.indices.clear();
        for leaf in &self.basis.leaves {
            for j in 0..leaf.fe.size() {
                self.indices.push(self.basis.multi_index(leaf, &cell, j));
            }
        }
        self.cell = Some(cell);
    }

    pub fn unbind(&mut self) {
        self.cell = None;
        self.indices.clear();
    }

    pub fn is_bound(&self) -> bool {
        self.cell.is_some()
    }

    /// The bound element.
    pub fn element(&self) -> Entity {
        self.cell.expect("local view is not bound")
    }

    /// Number of basis functions on the bound-to element.
    pub fn size(&self) -> usize {
        *self.starts.last().unwrap()
    }

    /// Global multi-index of a local basis function.
    pub fn global_index(&self, local: usize) -> &MultiIndex {
        assert!(self.cell.is_some(), "local view is not bound");
        &self.indices[local]
    }

    /// The root of the localized descriptor tree.
    pub fn root(&self) -> LocalNode<'_> {
        LocalNode { desc: &self.basis.descriptor, dim: self.basis.view.dim(), local_start: 0 }
    }

    /// Descends from the root along `path`.
    pub fn child(&self, path: &[u32]) -> LocalNode<'_> {
        let mut node = self.root();
        for &k in path {
            node = node.child(k as usize);
        }
        node
    }
}

/// A node of the localized descriptor tree: knows the consecutive range of
/// element-local indices its subtree occupies.
pub struct LocalNode<'b> {
    desc: &'b BasisDescriptor,
    dim: usize,
    local_start: usize,
}

impl<'b> LocalNode<'b> {
    pub fn descriptor(&self) -> &'b BasisDescriptor {
        self.desc
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.desc, BasisDescriptor::Lagrange { .. })
    }

    /// Basis functions in this subtree on the bound element.
    pub fn size(&self) -> usize {
        self.desc.local_size(self.dim)
    }

    /// Element-local index of this subtree's `i`-th basis function; for
    /// leaf nodes `i` is the local element's own numbering.
    pub fn local_index(&self, i: usize) -> usize {
        assert!(i < self.size(), "index {i} out of range for a subtree of size {}", self.size());
        self.local_start + i
    }

    /// The k-th child node.
    pub fn child(&self, k: usize) -> LocalNode<'b> {
        let child = self.desc.child(k).expect("path does not address a descriptor node");
        let skipped = match self.desc {
            BasisDescriptor::Power { child, .. } => k * child.local_size(self.dim),
            BasisDescriptor::Composite { children, .. } => {
                children[..k].iter().map(|c| c.local_size(self.dim)).sum()
            }
            BasisDescriptor::Lagrange { .. } => unreachable!("leaves have no children"),
        };
        LocalNode { desc: child, dim: self.dim, local_start: self.local_start + skipped }
    }
}

/// Restriction of a basis to one descriptor subtree. Indices keep the
/// parent layout; interpolation only writes the addressed components.
pub struct SubspaceBasis<'b> {
    basis: &'b GlobalBasis<'b>,
    leaf_range: Range<usize>,
}

impl<'b> SubspaceBasis<'b> {
    /// Scalar components covered by this subspace.
    pub fn components(&self) -> usize {
        self.leaf_range.len()
    }

    /// Basis functions per element in this subspace.
    pub fn local_size(&self) -> usize {
        self.basis.leaves[self.leaf_range.clone()].iter().map(|l| l.fe.size()).sum()
    }

    /// Number of basis functions addressed by this subspace.
    pub fn dimension(&self) -> usize {
        self.basis.leaves[self.leaf_range.clone()].iter().map(|l| l.total).sum()
    }

    /// Interpolates into the addressed components only; all other blocks
    /// of the coefficient container stay untouched. `f` returns one value
    /// per subspace component.
    pub fn interpolate(
        &self,
        coeffs: &mut CoeffVec,
        f: impl Fn(&Point) -> Vec<f64>,
    ) -> Result<(), BasisError> {
        self.basis.interpolate_leaves(self.leaf_range.clone(), coeffs, &f)
    }
}
