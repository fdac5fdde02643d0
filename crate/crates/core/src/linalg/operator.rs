use crate::dense::Field;

use super::{BlockMatrix, BlockVector};

/// Abstract linear map between block vectors.
///
/// Matrices implement this directly; matrix-free operators provide only the
/// action and answer `None` from [`matrix`](LinearOperator::matrix), which
/// lets matrix-based consumers (e.g. factorizing preconditioners) fail with
/// a clean error instead of silently misbehaving.
pub trait LinearOperator<S: Field> {
    fn block_rows(&self) -> usize;
    fn block_cols(&self) -> usize;
    fn block_size(&self) -> usize;
    /// `y = A x`.
    fn apply(&self, x: &BlockVector<S>, y: &mut BlockVector<S>);
    /// `y += alpha * A x`.
    fn usmv(&self, alpha: S, x: &BlockVector<S>, y: &mut BlockVector<S>);
    /// Backing matrix, when one exists.
    fn matrix(&self) -> Option<&BlockMatrix<S>> {
        None
    }
}

impl<S: Field> LinearOperator<S> for BlockMatrix<S> {
    fn block_rows(&self) -> usize {
        self.rows()
    }
    fn block_cols(&self) -> usize {
        self.cols()
    }
    fn block_size(&self) -> usize {
        BlockMatrix::block_size(self)
    }
    fn apply(&self, x: &BlockVector<S>, y: &mut BlockVector<S>) {
        BlockMatrix::apply(self, x, y);
    }
    fn usmv(&self, alpha: S, x: &BlockVector<S>, y: &mut BlockVector<S>) {
        BlockMatrix::usmv(self, alpha, x, y);
    }
    fn matrix(&self) -> Option<&BlockMatrix<S>> {
        Some(self)
    }
}

/// Matrix-free operator defined by its fused update kernel
/// `kernel(alpha, x, y)` computing `y += alpha * A x`.
pub struct OnTheFlyOperator<S, F> {
    rows: usize,
    cols: usize,
    block: usize,
    kernel: F,
    _marker: std::marker::PhantomData<fn(S)>,
}

impl<S, F> OnTheFlyOperator<S, F>
where
    S: Field,
    F: Fn(S, &BlockVector<S>, &mut BlockVector<S>),
{
    pub fn new(rows: usize, cols: usize, block_size: usize, kernel: F) -> Self {
        OnTheFlyOperator { rows, cols, block: block_size, kernel, _marker: std::marker::PhantomData }
    }
}

impl<S, F> LinearOperator<S> for OnTheFlyOperator<S, F>
where
    S: Field,
    F: Fn(S, &BlockVector<S>, &mut BlockVector<S>),
{
    fn block_rows(&self) -> usize {
        self.rows
    }
    fn block_cols(&self) -> usize {
        self.cols
    }
    fn block_size(&self) -> usize {
        self.block
    }
    fn apply(&self, x: &BlockVector<S>, y: &mut BlockVector<S>) {
        y.set_zero();
        (self.kernel)(S::one(), x, y);
    }
    fn usmv(&self, alpha: S, x: &BlockVector<S>, y: &mut BlockVector<S>) {
        (self.kernel)(alpha, x, y);
    }
}

/// Scalar product abstraction used by the Krylov solvers.
pub trait ScalarProduct<S: Field> {
    fn dot(&self, x: &BlockVector<S>, y: &BlockVector<S>) -> S;
    fn norm(&self, x: &BlockVector<S>) -> S::Real;
}

/// The standard euclidean product; conjugates its first argument.
#[derive(Clone, Copy, Debug, Default)]
pub struct EuclideanProduct;

impl<S: Field> ScalarProduct<S> for EuclideanProduct {
    fn dot(&self, x: &BlockVector<S>, y: &BlockVector<S>) -> S {
        x.dot(y)
    }
    fn norm(&self, x: &BlockVector<S>) -> S::Real {
        x.two_norm()
    }
}
