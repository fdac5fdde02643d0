use crate::dense::{Field, RealField};

/// Vector of `n` dense blocks with `block_size` scalars each, stored flat.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockVector<S> {
    data: Vec<S>,
    block: usize,
}

impl<S: Field> BlockVector<S> {
    pub fn zeros(n_blocks: usize, block_size: usize) -> Self {
        assert!(block_size >= 1, "block size must be positive");
        BlockVector { data: vec![S::zero(); n_blocks * block_size], block: block_size }
    }

    /// Wraps flat storage; the length must be a multiple of the block size.
    pub fn from_flat(data: Vec<S>, block_size: usize) -> Self {
        assert!(block_size >= 1);
        assert_eq!(data.len() % block_size, 0, "flat length not a block multiple");
        BlockVector { data, block: block_size }
    }

    pub fn n_blocks(&self) -> usize {
        self.data.len() / self.block
    }

    pub fn block_size(&self) -> usize {
        self.block
    }

    pub fn flat_len(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn into_flat(self) -> Vec<S> {
        self.data
    }

    pub fn block(&self, i: usize) -> &[S] {
        &self.data[i * self.block..(i + 1) * self.block]
    }

    pub fn block_mut(&mut self, i: usize) -> &mut [S] {
        &mut self.data[i * self.block..(i + 1) * self.block]
    }

    pub fn set_zero(&mut self) {
        for v in &mut self.data {
            *v = S::zero();
        }
    }

    pub fn copy_from(&mut self, rhs: &BlockVector<S>) {
        assert_eq!(self.data.len(), rhs.data.len());
        self.data.copy_from_slice(&rhs.data);
    }

    /// `self += alpha * x`.
    pub fn axpy(&mut self, alpha: S, x: &BlockVector<S>) {
        assert_eq!(self.data.len(), x.data.len(), "axpy: length mismatch");
        for (v, w) in self.data.iter_mut().zip(x.data.iter()) {
            *v += alpha * *w;
        }
    }

    /// `self = beta * self + x` — the update form used by conjugate
    /// direction methods.
    pub fn scale_add(&mut self, beta: S, x: &BlockVector<S>) {
        assert_eq!(self.data.len(), x.data.len(), "scale_add: length mismatch");
        for (v, w) in self.data.iter_mut().zip(x.data.iter()) {
            *v = beta * *v + *w;
        }
    }

    pub fn scale(&mut self, s: S) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// Euclidean scalar product; conjugates the first argument.
    pub fn dot(&self, rhs: &BlockVector<S>) -> S {
        assert_eq!(self.data.len(), rhs.data.len(), "dot: length mismatch");
        let mut s = S::zero();
        for (v, w) in self.data.iter().zip(rhs.data.iter()) {
            s += v.conj() * *w;
        }
        s
    }

    /// Euclidean norm as a real scalar (per lane for lane scalars).
    pub fn two_norm(&self) -> S::Real {
        let mut s = <S::Real as Field>::zero();
        for v in &self.data {
            s += v.abs_sq();
        }
        s.sqrt()
    }

    /// Largest modulus over all entries and lanes.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.max_abs()))
    }
}
