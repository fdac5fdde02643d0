//! Poisson convergence study on the unit square with the manufactured
//! solution `u = sin(πx₀)·sin(πx₁)`, `f = 2π²·u`, homogeneous Dirichlet
//! boundary. Assembles an order-1 or order-2 Lagrange discretization per
//! uniform refinement level and reports discretization errors and solver
//! iteration counts.

use std::f64::consts::PI;

use boxfem::basis::{make_basis, BasisDescriptor, CoeffVec};
use boxfem::geometry::Point;
use boxfem::grid::HierarchicalGrid;
use boxfem::linalg::BlockVector;
use boxfem::solvers::ParameterTree;

use crate::assemble::{assemble, solution_errors, solve_system};
use crate::{AppError, RunConfig};

/// Manufactured solution.
pub fn exact(x: &Point) -> f64 {
    (PI * x[0]).sin() * (PI * x[1]).sin()
}

/// Gradient of the manufactured solution.
pub fn exact_gradient(x: &Point) -> Point {
    Point::from_slice(&[
        PI * (PI * x[0]).cos() * (PI * x[1]).sin(),
        PI * (PI * x[0]).sin() * (PI * x[1]).cos(),
    ])
}

/// Matching right hand side `f = −Δu = 2π²·u`.
pub fn load(x: &Point) -> f64 {
    2.0 * PI * PI * exact(x)
}

/// One solved refinement level of the study.
pub struct LevelResult {
    pub h: f64,
    pub dofs: usize,
    pub iterations: usize,
    pub l2_error: f64,
    pub h1_error: f64,
}

/// Assembles and solves one uniform level with `n` cells per axis.
pub fn solve_level(
    n: usize,
    order: usize,
    tree: &ParameterTree,
    section: &str,
    threads: usize,
) -> Result<LevelResult, AppError> {
    let grid = HierarchicalGrid::unit(2, n);
    let view = grid.leaf_view();
    let basis = make_basis(&view, &BasisDescriptor::lagrange(order))?;
    let sys = assemble(&basis, &load, &|_| 0.0, threads)?;
    let mut x = BlockVector::zeros(basis.dimension(), 1);
    let result = solve_system(&sys, tree, section, &mut x)?;

    // Galerkin consistency: after convergence the residual component along
    // every basis direction must be negligible against the load.
    let mut r = BlockVector::zeros(basis.dimension(), 1);
    r.copy_from(&sys.rhs);
    sys.matrix.usmv(-1.0, &x, &mut r);
    let b_norm = sys.rhs.two_norm();
    assert!(
        r.max_abs() < 1e-8 * b_norm,
        "Galerkin residual check failed: max |r_i| = {} vs ‖b‖ = {}",
        r.max_abs(),
        b_norm
    );

    let coeffs = CoeffVec::Flat(x.as_slice().to_vec());
    let (l2, h1) = solution_errors(&basis, &coeffs, &exact, &exact_gradient);
    Ok(LevelResult {
        h: 1.0 / n as f64,
        dofs: basis.dimension(),
        iterations: result.iterations,
        l2_error: l2,
        h1_error: h1,
    })
}

pub fn run(cfg: &RunConfig, tree: &ParameterTree, out: &mut dyn std::io::Write) -> Result<(), AppError> {
    let order: usize = tree.get_or("poisson.order", 1)?;
    if !(1..=2).contains(&order) {
        return Err(AppError::Config(format!(
            "poisson.order must be 1 or 2, got {order}"
        )));
    }
    let threads: usize = tree.get_or("poisson.threads", 1)?;
    let section = cfg.solver_section();
    writeln!(out, "h,dofs,iterations,l2_error,h1_error")?;
    for level in 0..=cfg.refine() {
        let n = cfg.cells() << level;
        let r = solve_level(n, order, tree, section, threads)?;
        writeln!(
            out,
            "{},{},{},{},{}",
            r.h, r.dofs, r.iterations, r.l2_error, r.h1_error
        )?;
    }
    Ok(())
}
