use std::collections::BTreeSet;

/// Insert-only sparsity pattern under construction.
///
/// Construction is two-phase: insert block positions here, then [`lock`]
/// into an immutable [`SparsityPattern`]. The builder is consumed by
/// locking, so the pattern of a finished matrix can never change.
///
/// [`lock`]: PatternBuilder::lock
#[derive(Clone, Debug)]
pub struct PatternBuilder {
    rows: usize,
    cols: usize,
    sets: Vec<BTreeSet<u32>>,
}

impl PatternBuilder {
    pub fn new(rows: usize, cols: usize) -> Self {
        PatternBuilder { rows, cols, sets: vec![BTreeSet::new(); rows] }
    }

    /// Registers block position `(i, j)`. Duplicate inserts are idempotent.
    pub fn insert(&mut self, i: usize, j: usize) {
        assert!(i < self.rows && j < self.cols, "pattern insert out of bounds");
        self.sets[i].insert(j as u32);
    }

    pub fn lock(self) -> SparsityPattern {
        let mut row_ptr = Vec::with_capacity(self.rows + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0usize);
        for set in &self.sets {
            col_idx.extend(set.iter().copied());
            row_ptr.push(col_idx.len());
        }
        SparsityPattern { rows: self.rows, cols: self.cols, row_ptr, col_idx }
    }
}

/// Immutable compressed-row block sparsity pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsityPattern {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
}

impl SparsityPattern {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Column indices of row `i`, strictly increasing.
    pub fn row(&self, i: usize) -> &[u32] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    /// Flat entry index of `(i, j)`, if present.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let base = self.row_ptr[i];
        self.row(i).binary_search(&(j as u32)).ok().map(|k| base + k)
    }

    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }
}
