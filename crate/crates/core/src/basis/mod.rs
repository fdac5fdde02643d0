//! Tree-structured global function-space bases over grid views.
//!
//! A [`BasisDescriptor`] is a small AST: scalar Lagrange leaves combined by
//! `power` (m copies of one child) and `composite` (heterogeneous children)
//! nodes. Each inner node picks a [`Strategy`] for laying out indices:
//!
//! - *flat-lexicographic* merges the children into one consecutive index
//!   range (child k is offset by the sizes of children 0..k),
//! - *blocked-lexicographic* prepends the child number as an extra digit,
//!   so indices become genuine multi-indices.
//!
//! [`make_basis`] instantiates a descriptor over a [`GridView`]: every leaf
//! becomes a scalar space whose degrees of freedom are attached to grid
//! entities through the local element's coefficient keys, which identifies
//! shared DOFs across neighbouring elements and yields C⁰ spaces on
//! conforming views. [`GlobalBasis`] answers size queries per prefix,
//! hands out bindable [`LocalView`]s with the three-stage
//! per-leaf → local → global index mapping, restricts to
//! [`SubspaceBasis`] views addressed by tree paths, interpolates
//! world-coordinate functions, and evaluates discrete functions and their
//! gradients.
//!
//! [`GridView`]: crate::grid::GridView

mod coeff;
mod global;
mod tree;

pub use coeff::CoeffVec;
pub use global::{make_basis, GlobalBasis, LocalNode, LocalView, SubspaceBasis};

use thiserror::Error;

/// Index layout of an inner descriptor node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Children share one digit position; child k is offset by the total
    /// sizes of children 0..k. Requires children with single-digit indices.
    FlatLexicographic,
    /// The child number is prepended as the leading digit; the child's
    /// own digits follow.
    BlockedLexicographic,
}

/// AST describing a function space: scalar Lagrange leaves combined by
/// power and composite nodes.
#[derive(Clone, Debug)]
pub enum BasisDescriptor {
    /// Scalar continuous Lagrange space of the given order.
    Lagrange { order: usize },
    /// `multiplicity` identical copies of one child space.
    Power { child: Box<BasisDescriptor>, multiplicity: usize, strategy: Strategy },
    /// Heterogeneous product of child spaces.
    Composite { children: Vec<BasisDescriptor>, strategy: Strategy },
}

impl BasisDescriptor {
    pub fn lagrange(order: usize) -> Self {
        BasisDescriptor::Lagrange { order }
    }

    pub fn power(child: BasisDescriptor, multiplicity: usize, strategy: Strategy) -> Self {
        BasisDescriptor::Power { child: Box::new(child), multiplicity, strategy }
    }

    pub fn composite(children: Vec<BasisDescriptor>, strategy: Strategy) -> Self {
        BasisDescriptor::Composite { children, strategy }
    }

    /// Number of children in the AST (copies for power nodes).
    pub fn num_children(&self) -> usize {
        match self {
            BasisDescriptor::Lagrange { .. } => 0,
            BasisDescriptor::Power { multiplicity, .. } => *multiplicity,
            BasisDescriptor::Composite { children, .. } => children.len(),
        }
    }

    /// The k-th AST child (all power children alias the same subtree).
    pub fn child(&self, k: usize) -> Option<&BasisDescriptor> {
        match self {
            BasisDescriptor::Lagrange { .. } => None,
            BasisDescriptor::Power { child, multiplicity, .. } => {
                (k < *multiplicity).then_some(child.as_ref())
            }
            BasisDescriptor::Composite { children, .. } => children.get(k),
        }
    }

    /// Number of scalar components (AST leaves counted with multiplicity).
    pub fn components(&self) -> usize {
        match self {
            BasisDescriptor::Lagrange { .. } => 1,
            BasisDescriptor::Power { child, multiplicity, .. } => {
                multiplicity * child.components()
            }
            BasisDescriptor::Composite { children, .. } => {
                children.iter().map(|c| c.components()).sum()
            }
        }
    }

    /// Basis functions per element contributed by this subtree.
    pub fn local_size(&self, dim: usize) -> usize {
        match self {
            BasisDescriptor::Lagrange { order } => (order + 1).pow(dim as u32),
            BasisDescriptor::Power { child, multiplicity, .. } => {
                multiplicity * child.local_size(dim)
            }
            BasisDescriptor::Composite { children, .. } => {
                children.iter().map(|c| c.local_size(dim)).sum()
            }
        }
    }
}

/// Global multi-index: at least one digit; blocked strategies add leading
/// digits, flat strategies keep a single digit.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(digits: Vec<u32>) -> Self {
        assert!(!digits.is_empty(), "multi-indices have at least one digit");
        MultiIndex(digits)
    }

    pub fn digits(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl std::ops::Deref for MultiIndex {
    type Target = [u32];
    fn deref(&self) -> &[u32] {
        &self.0
    }
}

impl std::fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (k, d) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

impl From<&[u32]> for MultiIndex {
    fn from(digits: &[u32]) -> Self {
        MultiIndex::new(digits.to_vec())
    }
}

/// Errors raised while building or using a global basis.
#[derive(Debug, Error)]
pub enum BasisError {
    #[error("unsupported Lagrange order {order}: continuous spaces need order 1 or 2")]
    UnsupportedLeaf { order: usize },
    #[error("unsupported grid dimension {dim}: bases cover dimensions 1 to 3")]
    UnsupportedDimension { dim: usize },
    #[error("inner descriptor nodes need at least one child")]
    EmptyNode,
    #[error("flat-lexicographic nodes require children with single-digit indices")]
    FlatOverNested,
    #[error("prefix {prefix:?} does not address an index-tree node")]
    InvalidPrefix { prefix: Vec<u32> },
    #[error("path {path:?} does not address a descriptor node")]
    InvalidPath { path: Vec<u32> },
    #[error("coefficient container does not match the basis layout")]
    CoefficientShape,
    #[error("function range has {got} components, the basis expects {expected}")]
    RangeDimension { expected: usize, got: usize },
}
