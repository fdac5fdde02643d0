//! Preconditioners.
//!
//! A preconditioner approximates the inverse action of an operator. All
//! implementations here are immutable after construction and linear in their
//! input, as the Krylov methods require. The matrix-based ones (Jacobi,
//! SSOR, ILU(0)) extract the backing matrix at construction time and report
//! a clean error when handed a matrix-free operator.

use std::sync::Arc;

use crate::dense::{Field, SmallMatrix};
use crate::linalg::{BlockMatrix, BlockVector, LinearOperator, SparsityPattern};

use super::SolverError;

/// Approximate inverse action used inside the Krylov loops.
///
/// `pre`/`post` bracket a solve and default to no-ops; `apply` computes
/// `v ≈ A⁻¹ d` and must be linear in `d`.
pub trait Preconditioner<S: Field> {
    fn pre(&self, _x: &mut BlockVector<S>, _b: &mut BlockVector<S>) {}
    fn apply(&self, v: &mut BlockVector<S>, d: &BlockVector<S>);
    fn post(&self, _x: &mut BlockVector<S>) {}
}

/// No preconditioning: `v = d`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Identity;

impl<S: Field> Preconditioner<S> for Identity {
    fn apply(&self, v: &mut BlockVector<S>, d: &BlockVector<S>) {
        v.copy_from(d);
    }
}

/// Richardson damping: `v = omega * d`.
#[derive(Clone, Copy, Debug)]
pub struct Richardson {
    pub omega: f64,
}

impl<S: Field> Preconditioner<S> for Richardson {
    fn apply(&self, v: &mut BlockVector<S>, d: &BlockVector<S>) {
        v.copy_from(d);
        v.scale(S::from_f64(self.omega));
    }
}

fn required_matrix<'a, S: Field>(
    op: &'a dyn LinearOperator<S>,
) -> Result<&'a BlockMatrix<S>, SolverError> {
    let a = op.matrix().ok_or(SolverError::MatrixRequired)?;
    assert_eq!(a.rows(), a.cols(), "preconditioners need a square matrix");
    Ok(a)
}

fn inverted_diagonal<S: Field>(a: &BlockMatrix<S>) -> Result<Vec<SmallMatrix<S>>, SolverError> {
    (0..a.rows())
        .map(|i| {
            a.try_block(i, i)
                .ok_or(SolverError::MissingDiagonal { row: i })?
                .inverse()
                .map_err(|_| SolverError::SingularBlock { row: i })
        })
        .collect()
}

/// `acc -= blk * x` on raw row-major block storage.
fn block_mv_sub<S: Field>(m: usize, blk: &[S], x: &[S], acc: &mut [S]) {
    for r in 0..m {
        let mut s = S::zero();
        for c in 0..m {
            s += blk[r * m + c] * x[c];
        }
        acc[r] -= s;
    }
}

/// Block Jacobi with a configurable number of sweeps.
///
/// Each sweep performs `v += D⁻¹ (d - A v)` starting from `v = 0`, which
/// keeps the operator linear and symmetric for symmetric `A`.
pub struct Jacobi<'a, S: Field> {
    a: &'a BlockMatrix<S>,
    inv_diag: Vec<SmallMatrix<S>>,
    sweeps: usize,
}

impl<'a, S: Field> Jacobi<'a, S> {
    pub fn new(op: &'a dyn LinearOperator<S>, sweeps: usize) -> Result<Self, SolverError> {
        assert!(sweeps >= 1, "at least one sweep required");
        let a = required_matrix(op)?;
        Ok(Jacobi { a, inv_diag: inverted_diagonal(a)?, sweeps })
    }
}

impl<S: Field> Preconditioner<S> for Jacobi<'_, S> {
    fn apply(&self, v: &mut BlockVector<S>, d: &BlockVector<S>) {
        let m = self.a.block_size();
        v.set_zero();
        let mut r = d.clone();
        for sweep in 0..self.sweeps {
            if sweep > 0 {
                r.copy_from(d);
                self.a.usmv(-S::one(), v, &mut r);
            }
            for i in 0..self.a.rows() {
                let ri = r.block(i).to_vec();
                let vi = v.block_mut(i);
                for rr in 0..m {
                    let mut s = S::zero();
                    for cc in 0..m {
                        s += self.inv_diag[i][(rr, cc)] * ri[cc];
                    }
                    vi[rr] += s;
                }
            }
        }
    }
}

/// Symmetric successive over-relaxation: a forward Gauss–Seidel style sweep
/// followed by a backward one, with relaxation factor `omega`, repeated
/// `sweeps` times from `v = 0`.
pub struct Ssor<'a, S: Field> {
    a: &'a BlockMatrix<S>,
    inv_diag: Vec<SmallMatrix<S>>,
    omega: S,
    sweeps: usize,
}

impl<'a, S: Field> Ssor<'a, S> {
    pub fn new(op: &'a dyn LinearOperator<S>, omega: f64, sweeps: usize) -> Result<Self, SolverError> {
        assert!(sweeps >= 1, "at least one sweep required");
        assert!(omega > 0.0 && omega < 2.0, "SSOR needs omega in (0, 2)");
        let a = required_matrix(op)?;
        Ok(Ssor { a, inv_diag: inverted_diagonal(a)?, omega: S::from_f64(omega), sweeps })
    }

    fn relax_row(&self, i: usize, v: &mut BlockVector<S>, d: &BlockVector<S>, work: &mut [S]) {
        let m = self.a.block_size();
        work.copy_from_slice(d.block(i));
        for (j, blk) in self.a.row_entries(i) {
            block_mv_sub(m, blk, v.block(j), work);
        }
        let vi = v.block_mut(i);
        for rr in 0..m {
            let mut s = S::zero();
            for cc in 0..m {
                s += self.inv_diag[i][(rr, cc)] * work[cc];
            }
            vi[rr] += self.omega * s;
        }
    }
}

impl<S: Field> Preconditioner<S> for Ssor<'_, S> {
    fn apply(&self, v: &mut BlockVector<S>, d: &BlockVector<S>) {
        let m = self.a.block_size();
        v.set_zero();
        let mut work = vec![S::zero(); m];
        for _ in 0..self.sweeps {
            for i in 0..self.a.rows() {
                self.relax_row(i, v, d, &mut work);
            }
            for i in (0..self.a.rows()).rev() {
                self.relax_row(i, v, d, &mut work);
            }
        }
    }
}

/// Incomplete LU factorization without fill-in: the factors live on exactly
/// the sparsity pattern of `A`. On block tridiagonal matrices the
/// factorization is complete, so the preconditioner inverts them exactly.
pub struct Ilu0<S: Field> {
    pattern: Arc<SparsityPattern>,
    m: usize,
    /// Factor storage on the pattern: strictly lower positions hold unit-L
    /// entries, diagonal and upper positions hold U.
    lu: Vec<S>,
    inv_diag: Vec<SmallMatrix<S>>,
}

impl<S: Field> Ilu0<S> {
    pub fn new(op: &dyn LinearOperator<S>) -> Result<Self, SolverError> {
        let a = required_matrix(op)?;
        let pattern = a.pattern().clone();
        let m = a.block_size();
        let n = pattern.rows();
        let sz = m * m;

        // copy values in pattern order
        let mut lu = vec![S::zero(); pattern.nnz() * sz];
        for i in 0..n {
            for ((_, blk), k) in a.row_entries(i).zip(pattern.row_range(i)) {
                lu[k * sz..(k + 1) * sz].copy_from_slice(blk);
            }
        }

        let block_of = |lu: &[S], k: usize| {
            SmallMatrix::from_fn(m, m, |r, c| lu[k * sz + r * m + c])
        };

        let mut inv_diag: Vec<SmallMatrix<S>> = Vec::with_capacity(n);
        for i in 0..n {
            let row_cols: Vec<usize> = pattern.row(i).iter().map(|&c| c as usize).collect();
            for &k in row_cols.iter().filter(|&&k| k < i) {
                let pk = pattern.position(i, k).expect("iterating the row itself");
                // L_ik = A_ik * U_kk^{-1}
                let lik = block_of(&lu, pk).matmul(&inv_diag[k]);
                lu[pk * sz..(pk + 1) * sz].copy_from_slice(lik.as_slice());
                // eliminate: A_ij -= L_ik * U_kj for on-pattern j > k
                for &j in pattern.row(k).iter().filter(|&&j| (j as usize) > k) {
                    let j = j as usize;
                    if let Some(pij) = pattern.position(i, j) {
                        let pkj = pattern.position(k, j).expect("iterating row k");
                        let update = lik.matmul(&block_of(&lu, pkj));
                        for (dst, s) in lu[pij * sz..(pij + 1) * sz].iter_mut().zip(update.as_slice())
                        {
                            *dst -= *s;
                        }
                    }
                }
            }
            let pii = pattern
                .position(i, i)
                .ok_or(SolverError::MissingDiagonal { row: i })?;
            inv_diag.push(
                block_of(&lu, pii)
                    .inverse()
                    .map_err(|_| SolverError::SingularBlock { row: i })?,
            );
        }

        Ok(Ilu0 { pattern, m, lu, inv_diag })
    }
}

impl<S: Field> Preconditioner<S> for Ilu0<S> {
    fn apply(&self, v: &mut BlockVector<S>, d: &BlockVector<S>) {
        let m = self.m;
        let sz = m * m;
        let n = self.pattern.rows();
        // forward: L w = d with unit diagonal, w stored in v
        for i in 0..n {
            let mut wi = d.block(i).to_vec();
            for (&j, k) in self.pattern.row(i).iter().zip(self.pattern.row_range(i)) {
                let j = j as usize;
                if j >= i {
                    break;
                }
                block_mv_sub(m, &self.lu[k * sz..(k + 1) * sz], v.block(j), &mut wi);
            }
            v.block_mut(i).copy_from_slice(&wi);
        }
        // backward: U v = w
        let mut work = vec![S::zero(); m];
        for i in (0..n).rev() {
            work.copy_from_slice(v.block(i));
            for (&j, k) in self.pattern.row(i).iter().zip(self.pattern.row_range(i)) {
                let j = j as usize;
                if j <= i {
                    continue;
                }
                block_mv_sub(m, &self.lu[k * sz..(k + 1) * sz], v.block(j), &mut work);
            }
            let vi = v.block_mut(i);
            for rr in 0..m {
                let mut s = S::zero();
                for cc in 0..m {
                    s += self.inv_diag[i][(rr, cc)] * work[cc];
                }
                vi[rr] = s;
            }
        }
    }
}
