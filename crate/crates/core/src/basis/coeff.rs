//! Coefficient containers matching the two root layouts.

/// Coefficients of a discrete function. Bases whose root index is a single
/// digit use one flat vector; bases with a blocked root use one flat vector
/// per top-level block (deeper blocking is flattened lexicographically
/// inside its block).
#[derive(Clone, Debug, PartialEq)]
pub enum CoeffVec {
    Flat(Vec<f64>),
    Nested(Vec<Vec<f64>>),
}

impl CoeffVec {
    /// Total number of scalar coefficients.
    pub fn total_len(&self) -> usize {
        match self {
            CoeffVec::Flat(v) => v.len(),
            CoeffVec::Nested(blocks) => blocks.iter().map(|b| b.len()).sum(),
        }
    }

    /// The flat storage, if this is a single-vector container.
    pub fn as_flat(&self) -> Option<&[f64]> {
        match self {
            CoeffVec::Flat(v) => Some(v),
            CoeffVec::Nested(_) => None,
        }
    }

    pub fn as_flat_mut(&mut self) -> Option<&mut [f64]> {
        match self {
            CoeffVec::Flat(v) => Some(v),
            CoeffVec::Nested(_) => None,
        }
    }

    /// The per-block storage, if this is a nested container.
    pub fn as_nested(&self) -> Option<&[Vec<f64>]> {
        match self {
            CoeffVec::Flat(_) => None,
            CoeffVec::Nested(blocks) => Some(blocks),
        }
    }

    pub fn as_nested_mut(&mut self) -> Option<&mut [Vec<f64>]> {
        match self {
            CoeffVec::Flat(_) => None,
            CoeffVec::Nested(blocks) => Some(blocks),
        }
    }

    /// Sets every coefficient to zero, keeping the layout.
    pub fn fill_zero(&mut self) {
        match self {
            CoeffVec::Flat(v) => v.fill(0.0),
            CoeffVec::Nested(blocks) => blocks.iter_mut().for_each(|b| b.fill(0.0)),
        }
    }
}
