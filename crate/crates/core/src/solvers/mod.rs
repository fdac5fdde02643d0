//! Iterative solvers and preconditioners.
//!
//! All solvers share one convergence protocol:
//!
//! - the iteration tracks the usual recursively updated defect norm;
//! - when that norm claims the relative reduction target is met, the true
//!   defect is recomputed from scratch, and convergence is reported only if
//!   the recomputed value confirms it — otherwise the iteration continues;
//! - numerical breakdowns (vanishing inner products, indefinite directions)
//!   set a flag on the result instead of crashing.
//!
//! Every solver works for any [`Field`](crate::dense::Field) scalar,
//! including lane scalars: `Lanes<L>` right-hand sides run `L` solves in
//! lock-step with lane-wise step sizes, and termination requires every lane
//! to reach its target.

mod factory;
mod krylov;
mod paramtree;
mod precond;

pub use factory::{solver_from_tree, ConfiguredSolver, SolverKind};
pub use krylov::{solve_bicgstab, solve_cg, solve_gmres, solve_gradient, solve_loop};
pub use paramtree::{ConfigError, ParameterTree};
pub use precond::{Identity, Jacobi, Preconditioner, Richardson, Ssor, Ilu0};

use thiserror::Error;

/// Errors from preconditioner construction.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("preconditioner requires a matrix-backed operator")]
    MatrixRequired,
    #[error("singular diagonal block at block row {row}")]
    SingularBlock { row: usize },
    #[error("missing diagonal entry at block row {row}")]
    MissingDiagonal { row: usize },
}

/// Which side a solver applies its preconditioner on. All solvers here
/// precondition from the left; GMRes therefore reports preconditioned
/// defect norms, and the result records this so the numbers can be
/// interpreted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrecondSide {
    Left,
}

/// Iteration control shared by all solvers.
#[derive(Clone, Debug)]
pub struct IterControl {
    /// Relative defect reduction target, in (0, 1).
    pub reduction: f64,
    /// Maximum number of iterations, at least 1.
    pub maxit: usize,
    /// 0: silent; 1: per-iteration defect line on stderr; 2: adds a summary.
    pub verbose: u32,
}

impl Default for IterControl {
    fn default() -> Self {
        IterControl { reduction: 1e-8, maxit: 1000, verbose: 0 }
    }
}

impl IterControl {
    pub(crate) fn validate(&self) {
        assert!(self.maxit >= 1, "maxit must be at least 1");
        assert!(
            self.reduction > 0.0 && self.reduction < 1.0,
            "reduction must lie strictly between 0 and 1, got {}",
            self.reduction
        );
    }
}

/// Outcome and statistics of a solver run.
///
/// `reduction` is `final_defect / initial_defect`; `converged` implies the
/// recomputed true defect satisfies the requested reduction. Defect norms
/// are reduced over lanes by taking the worst lane.
#[derive(Clone, Debug)]
pub struct SolverResult {
    pub converged: bool,
    pub iterations: usize,
    pub initial_defect: f64,
    pub final_defect: f64,
    pub reduction: f64,
    /// Wall-clock seconds spent in the solver.
    pub elapsed: f64,
    /// A numerical breakdown ended the iteration early.
    pub breakdown: bool,
    pub preconditioning: PrecondSide,
}
