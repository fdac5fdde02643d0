//! Blocked sparse linear algebra.
//!
//! Vectors and matrices are organized in small dense blocks of a fixed size
//! `m`; the scalar case is simply `m = 1`. Sparsity patterns are built in a
//! two-phase scheme — an insert-only builder is locked into an immutable
//! compressed-row pattern — and matrices then carry values for exactly the
//! locked entries. Solvers talk to matrices through the [`LinearOperator`]
//! trait, so matrix-free operators plug in transparently.

mod matrix;
mod mm;
mod operator;
mod pattern;
mod vector;

pub use matrix::BlockMatrix;
pub use mm::{read_matrix_market, write_matrix_market};
pub use operator::{EuclideanProduct, LinearOperator, OnTheFlyOperator, ScalarProduct};
pub use pattern::{PatternBuilder, SparsityPattern};
pub use vector::BlockVector;

use thiserror::Error;

/// Errors from sparse matrix construction and serialization.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("entry ({row}, {col}) is not in the sparsity pattern")]
    OffPattern { row: usize, col: usize },
    #[error("matrix market parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("shape mismatch: {0}")]
    Shape(String),
}
