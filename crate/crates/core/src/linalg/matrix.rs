use std::sync::Arc;

use crate::dense::{Field, SmallMatrix};

use super::{BlockVector, LinalgError, SparsityPattern};

/// Sparse matrix of dense `m x m` blocks over a locked sparsity pattern.
///
/// Values exist for exactly the pattern entries. Writing to a position
/// outside the pattern is a recoverable error (assemblers may probe);
/// reading one is a programming error and panics.
#[derive(Clone, Debug)]
pub struct BlockMatrix<S> {
    pattern: Arc<SparsityPattern>,
    m: usize,
    data: Vec<S>,
}

impl<S: Field> BlockMatrix<S> {
    pub fn zeros(pattern: Arc<SparsityPattern>, block_size: usize) -> Self {
        assert!(block_size >= 1, "block size must be positive");
        let n = pattern.nnz() * block_size * block_size;
        BlockMatrix { pattern, m: block_size, data: vec![S::zero(); n] }
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    pub fn block_size(&self) -> usize {
        self.m
    }

    /// Number of block rows.
    pub fn rows(&self) -> usize {
        self.pattern.rows()
    }

    /// Number of block columns.
    pub fn cols(&self) -> usize {
        self.pattern.cols()
    }

    pub fn flat_rows(&self) -> usize {
        self.pattern.rows() * self.m
    }

    pub fn flat_cols(&self) -> usize {
        self.pattern.cols() * self.m
    }

    fn block_slice(&self, k: usize) -> &[S] {
        let s = self.m * self.m;
        &self.data[k * s..(k + 1) * s]
    }

    fn block_slice_mut(&mut self, k: usize) -> &mut [S] {
        let s = self.m * self.m;
        &mut self.data[k * s..(k + 1) * s]
    }

    /// Mutable access to the raw block at `(i, j)`, row-major `m*m` scalars.
    /// Off-pattern positions report [`LinalgError::OffPattern`].
    pub fn entry_mut(&mut self, i: usize, j: usize) -> Result<&mut [S], LinalgError> {
        match self.pattern.position(i, j) {
            Some(k) => Ok(self.block_slice_mut(k)),
            None => Err(LinalgError::OffPattern { row: i, col: j }),
        }
    }

    /// Adds a small matrix into block `(i, j)`.
    pub fn add_to_block(&mut self, i: usize, j: usize, b: &SmallMatrix<S>) -> Result<(), LinalgError> {
        assert_eq!(b.rows(), self.m);
        assert_eq!(b.cols(), self.m);
        let dst = self.entry_mut(i, j)?;
        for (d, s) in dst.iter_mut().zip(b.as_slice()) {
            *d += *s;
        }
        Ok(())
    }

    /// Overwrites block `(i, j)`.
    pub fn set_block(&mut self, i: usize, j: usize, b: &SmallMatrix<S>) -> Result<(), LinalgError> {
        assert_eq!(b.rows(), self.m);
        assert_eq!(b.cols(), self.m);
        let dst = self.entry_mut(i, j)?;
        dst.copy_from_slice(b.as_slice());
        Ok(())
    }

    /// Copy of block `(i, j)`. Reading off-pattern is a contract violation.
    pub fn block(&self, i: usize, j: usize) -> SmallMatrix<S> {
        self.try_block(i, j)
            .unwrap_or_else(|| panic!("read of off-pattern entry ({i}, {j})"))
    }

    pub fn try_block(&self, i: usize, j: usize) -> Option<SmallMatrix<S>> {
        self.pattern.position(i, j).map(|k| {
            let raw = self.block_slice(k);
            SmallMatrix::from_fn(self.m, self.m, |r, c| raw[r * self.m + c])
        })
    }

    /// Iterates `(block column, raw block)` pairs of row `i` in ascending
    /// column order.
    pub fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, &[S])> + '_ {
        let range = self.pattern.row_range(i);
        let cols = self.pattern.row(i);
        let s = self.m * self.m;
        cols.iter()
            .zip(range)
            .map(move |(&j, k)| (j as usize, &self.data[k * s..(k + 1) * s]))
    }

    pub fn set_zero(&mut self) {
        for v in &mut self.data {
            *v = S::zero();
        }
    }

    /// `y = A x`.
    pub fn apply(&self, x: &BlockVector<S>, y: &mut BlockVector<S>) {
        y.set_zero();
        self.usmv(S::one(), x, y);
    }

    /// `y += alpha * A x`.
    pub fn usmv(&self, alpha: S, x: &BlockVector<S>, y: &mut BlockVector<S>) {
        assert_eq!(x.n_blocks(), self.cols(), "usmv: x shape mismatch");
        assert_eq!(y.n_blocks(), self.rows(), "usmv: y shape mismatch");
        assert_eq!(x.block_size(), self.m);
        assert_eq!(y.block_size(), self.m);
        let m = self.m;
        let mut acc = vec![S::zero(); m];
        for i in 0..self.rows() {
            for v in &mut acc {
                *v = S::zero();
            }
            for (j, blk) in self.row_entries(i) {
                let xb = x.block(j);
                for r in 0..m {
                    let mut s = S::zero();
                    for c in 0..m {
                        s += blk[r * m + c] * xb[c];
                    }
                    acc[r] += s;
                }
            }
            let out = y.block_mut(i);
            for r in 0..m {
                out[r] += alpha * acc[r];
            }
        }
    }

    /// Lifts a scalar-block matrix into lane scalars by broadcasting every
    /// entry, so `L` right-hand sides can be processed in lock-step.
    pub fn broadcast<T: Field>(&self, lift: impl Fn(S) -> T) -> BlockMatrix<T> {
        BlockMatrix {
            pattern: self.pattern.clone(),
            m: self.m,
            data: self.data.iter().map(|&v| lift(v)).collect(),
        }
    }
}
