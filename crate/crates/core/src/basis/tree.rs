//! Index tree: the shape of the multi-index set of a global basis.

use super::BasisError;

/// Sizes of the index set, organised as announced by the strategies:
/// terminal nodes hold one digit position of the given extent, blocked
/// nodes spend a digit on choosing a child.
#[derive(Clone, Debug)]
pub(crate) enum IndexTree {
    Terminal { size: usize },
    Blocked { children: Vec<IndexTree> },
}

impl IndexTree {
    /// Total number of basis functions below this node.
    pub fn total(&self) -> usize {
        match self {
            IndexTree::Terminal { size } => *size,
            IndexTree::Blocked { children } => children.iter().map(|c| c.total()).sum(),
        }
    }

    /// Number of distinct values the digit right after `prefix` can take;
    /// 0 if the prefix addresses a complete index.
    pub fn size_at(&self, prefix: &[u32]) -> Result<usize, BasisError> {
        let invalid = || BasisError::InvalidPrefix { prefix: prefix.to_vec() };
        match self {
            IndexTree::Terminal { size } => match prefix {
                [] => Ok(*size),
                [d] if (*d as usize) < *size => Ok(0),
                _ => Err(invalid()),
            },
            IndexTree::Blocked { children } => match prefix {
                [] => Ok(children.len()),
                [d, rest @ ..] => children
                    .get(*d as usize)
                    .ok_or_else(invalid)?
                    .size_at(rest)
                    .map_err(|_| invalid()),
            },
        }
    }

    /// Position of a complete multi-index in the lexicographic flattening
    /// of this subtree.
    pub fn flatten(&self, digits: &[u32]) -> Result<usize, BasisError> {
        let invalid = || BasisError::InvalidPrefix { prefix: digits.to_vec() };
        match self {
            IndexTree::Terminal { size } => match digits {
                [d] if (*d as usize) < *size => Ok(*d as usize),
                _ => Err(invalid()),
            },
            IndexTree::Blocked { children } => match digits {
                [d, rest @ ..] => {
                    let c = *d as usize;
                    if c >= children.len() {
                        return Err(invalid());
                    }
                    let before: usize = children[..c].iter().map(|t| t.total()).sum();
                    Ok(before + children[c].flatten(rest).map_err(|_| invalid())?)
                }
                [] => Err(invalid()),
            },
        }
    }
}
