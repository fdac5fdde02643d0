//! Dense building blocks: the scalar [`Field`] abstraction and small
//! vectors/matrices.
//!
//! Everything in the blocked sparse algebra and the Krylov solvers is generic
//! over [`Field`]. Three families of scalars implement it:
//!
//! - `f64` — the workhorse,
//! - [`num_complex::Complex64`] — complex systems,
//! - [`Lanes<L>`](lanes::Lanes) — an array of `L` reals computed in lock-step,
//!   so one solver run processes `L` right-hand sides at once.

mod field;
pub mod lanes;
mod small;

pub use field::{Field, Mask, RealField};
pub use lanes::{all_true, any_true, cond, LaneMask, Lanes};
pub use small::{SmallMatrix, SmallVector};

use thiserror::Error;

/// Errors from dense kernels.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DenseError {
    /// A matrix inverse or solve hit a zero pivot.
    #[error("singular matrix")]
    Singular,
}
