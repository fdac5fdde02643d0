//! Scalar Poisson assembly on leaf views: element matrices, hanging-node
//! constraints, Dirichlet conditions and the solve driver.
//!
//! The global basis exposes unconstrained entity DOFs; conformity across
//! nonconforming (2:1 balanced) refinement is restored here by expressing
//! each hanging vertex as a multilinear average of the coarse facet corners
//! it lies on, and expanding those constraints during assembly (both in the
//! sparsity pattern and in the numeric scatter). Constrained rows are kept
//! as identity rows and filled in after the solve.

use boxfem::basis::{CoeffVec, GlobalBasis};
use boxfem::geometry::{quadrature_rule, GeometryMap, Point};
use boxfem::grid::GridView;
use boxfem::linalg::{BlockMatrix, BlockVector, PatternBuilder};
use boxfem::localfe::CubeLagrange;
use boxfem::solvers::{
    solver_from_tree, Identity, Ilu0, Jacobi, ParameterTree, Preconditioner, SolverResult, Ssor,
};
use std::collections::BTreeMap;
use std::sync::Arc;

use crate::AppError;

/// Per-DOF constraint table: `None` marks a free DOF, `Some(masters)` a
/// hanging DOF whose value is the weighted sum of its master DOFs.
pub type Constraints = Vec<Option<Vec<(usize, f64)>>>;

/// Detects hanging vertices of a leaf view and returns, per vertex index,
/// the interpolation weights tying it to the corners of the coarse facet it
/// sits on. Assumes axis-aligned cell geometries (no coordinate wrapping).
///
/// With 2:1 balance every constraint references same-level masters; masters
/// that are themselves hanging (possible across several coarse facets in 3D)
/// are substituted until only free vertices remain.
pub fn hanging_constraints(view: &GridView) -> Constraints {
    let d = view.dim();
    let mut out: Constraints = vec![None; view.size(d)];
    for cell in view.cells() {
        for is in view.intersections(&cell) {
            let Some(outside) = is.outside() else { continue };
            // Only a finer cell against a coarser neighbor creates hanging
            // vertices, and they live on the fine side of the facet.
            if outside.level() >= cell.level() {
                continue;
            }
            let ogeo = view.grid().geometry(&outside);
            let lo = ogeo.corner(0);
            let hi = ogeo.corner(ogeo.num_corners() - 1);
            let k_in = is.index_in_inside();
            let (axis, side) = (k_in / 2, k_in % 2);
            for k in 0..(1usize << d) {
                if (k >> axis) & 1 != side {
                    continue;
                }
                let vertex = cell.sub_entity(k, d);
                let vi = view.index(&vertex);
                if out[vi].is_some() {
                    continue;
                }
                let x = view.grid().geometry(&vertex).corner(0);
                // Position within the coarse cell, per free facet axis. A
                // vertex coinciding with a coarse corner is conforming.
                let mut hanging = false;
                let mut t = [0.0f64; boxfem::grid::MAX_GRID_DIM];
                for b in 0..d {
                    if b == axis {
                        continue;
                    }
                    let s = (x[b] - lo[b]) / (hi[b] - lo[b]);
                    if (s - s.round()).abs() > 1e-9 {
                        hanging = true;
                    }
                    t[b] = s;
                }
                if !hanging {
                    continue;
                }
                let mut masters = Vec::new();
                for m in 0..(1usize << d) {
                    if (m >> axis) & 1 != 1 - side {
                        continue;
                    }
                    let mut w = 1.0;
                    for b in 0..d {
                        if b != axis {
                            w *= if (m >> b) & 1 == 1 { t[b] } else { 1.0 - t[b] };
                        }
                    }
                    if w > 1e-12 {
                        masters.push((view.index(&outside.sub_entity(m, d)), w));
                    }
                }
                out[vi] = Some(masters);
            }
        }
    }
    resolve_transitive(&mut out);
    out
}

/// Replaces masters that are themselves hanging by their own masters until
/// every constraint references only free vertices.
fn resolve_transitive(out: &mut Constraints) {
    loop {
        let mut changed = false;
        for i in 0..out.len() {
            let Some(masters) = &out[i] else { continue };
            if masters.iter().all(|(m, _)| out[*m].is_none()) {
                continue;
            }
            let mut flat: BTreeMap<usize, f64> = BTreeMap::new();
            for (m, w) in masters.clone() {
                match &out[m] {
                    Some(inner) => {
                        for (mm, ww) in inner {
                            *flat.entry(*mm).or_default() += w * ww;
                        }
                    }
                    None => *flat.entry(m).or_default() += w,
                }
            }
            out[i] = Some(flat.into_iter().collect());
            changed = true;
        }
        if !changed {
            break;
        }
    }
}

/// Element stiffness matrix `∫_E ∇φ_i·∇φ_j dx` in row-major layout,
/// integrated with a rule of order `2k` (exact for multilinear geometries).
pub fn element_stiffness(fe: &CubeLagrange, geo: &GeometryMap) -> Vec<f64> {
    let n = fe.size();
    let rule = quadrature_rule(fe.geometry_type(), 2 * fe.order()).expect("assembly rule");
    let mut a = vec![0.0; n * n];
    let mut ref_grads = Vec::new();
    let mut world = Vec::with_capacity(n);
    for q in rule.points() {
        let jt = geo.jacobian(&q.position).transposed();
        let ie = geo.integration_element(&q.position);
        fe.jacobian(&q.position, &mut ref_grads);
        world.clear();
        for g in &ref_grads {
            let rhs = boxfem::dense::SmallVector::from_slice(g.as_slice());
            let sol = jt.solve(&rhs).expect("regular cell geometry");
            world.push(Point::from_slice(sol.as_slice()));
        }
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] += q.weight * ie * world[i].dot(&world[j]);
            }
        }
    }
    a
}

/// Element load vector `∫_E f φ_i dx`, integrated with order `2k + 2`.
pub fn element_load(fe: &CubeLagrange, geo: &GeometryMap, f: &dyn Fn(&Point) -> f64) -> Vec<f64> {
    let n = fe.size();
    let rule = quadrature_rule(fe.geometry_type(), 2 * fe.order() + 2).expect("assembly rule");
    let mut b = vec![0.0; n];
    let mut vals = Vec::new();
    for q in rule.points() {
        let ie = geo.integration_element(&q.position);
        let x = geo.global(&q.position);
        let fx = f(&x);
        fe.evaluate(&q.position, &mut vals);
        for i in 0..n {
            b[i] += q.weight * ie * fx * vals[i];
        }
    }
    b
}

/// Assembled linear system together with its constraint bookkeeping.
pub struct System {
    pub matrix: BlockMatrix<f64>,
    pub rhs: BlockVector<f64>,
    /// Hanging-DOF constraints (identity rows in the matrix).
    pub constraints: Constraints,
    /// Dirichlet marker per DOF.
    pub boundary: Vec<bool>,
    /// Dirichlet value per DOF (meaningful where `boundary` is set).
    pub boundary_value: Vec<f64>,
}

/// Assembles the Poisson stiffness matrix and load vector for a scalar
/// Lagrange basis, applying hanging-node constraints and Dirichlet boundary
/// conditions (row replacement with symmetric column elimination).
///
/// `threads > 1` partitions the leaf elements into contiguous ranges that
/// worker threads accumulate into private matrices, merged serially in range
/// order afterwards; for a fixed thread count the result is deterministic.
pub fn assemble(
    basis: &GlobalBasis,
    f: &(dyn Fn(&Point) -> f64 + Sync),
    g: &(dyn Fn(&Point) -> f64 + Sync),
    threads: usize,
) -> Result<System, AppError> {
    let view = basis.view();
    let n = basis.dimension();
    let fe = boxfem::localfe::lagrange_element(view.dim(), basis_order(basis));

    // Hanging constraints are indexed by vertex, which for an order-1 basis
    // coincides with the DOF digit; pad to the full DOF count so higher
    // orders (conforming views only) index safely.
    let mut constraints = hanging_constraints(view);
    if constraints.iter().any(Option::is_some) && fe.order() != 1 {
        return Err(AppError::Config(
            "hanging-node constraints are only implemented for order-1 bases".into(),
        ));
    }
    constraints.resize(n, None);

    // Dirichlet DOFs: local shape nodes sitting on a boundary facet.
    let (boundary, boundary_value) = boundary_dofs(basis, &fe, g);
    // Where a hanging vertex also lies on the boundary (possible for edge
    // midpoints of boundary-touching coarse faces in 3D), the boundary
    // condition wins.
    for (i, c) in constraints.iter_mut().enumerate() {
        if boundary[i] {
            *c = None;
        }
    }

    let cells: Vec<_> = view.cells().collect();
    let cell_dofs = collect_cell_dofs(basis, &cells);

    // Sparsity pattern over constraint-expanded index sets, plus identity
    // diagonals for the constrained rows themselves.
    let mut builder = PatternBuilder::new(n, n);
    let mut expanded = Vec::new();
    for dofs in &cell_dofs {
        expanded.clear();
        for &d in dofs {
            match &constraints[d] {
                Some(ms) => expanded.extend(ms.iter().map(|&(m, _)| m)),
                None => expanded.push(d),
            }
        }
        for &r in &expanded {
            for &c in &expanded {
                builder.insert(r, c);
            }
        }
    }
    for (i, c) in constraints.iter().enumerate() {
        if c.is_some() {
            builder.insert(i, i);
        }
    }
    let pattern = Arc::new(builder.lock());

    let mut matrix = BlockMatrix::zeros(pattern.clone(), 1);
    let mut rhs = BlockVector::zeros(n, 1);

    let threads = threads.max(1).min(cells.len().max(1));
    if threads == 1 {
        assemble_range(
            basis, &fe, &cells, &cell_dofs, 0..cells.len(), &constraints, f, &mut matrix, &mut rhs,
        );
    } else {
        let chunk = cells.len().div_ceil(threads);
        let mut parts: Vec<(BlockMatrix<f64>, BlockVector<f64>)> = Vec::new();
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for t in 0..threads {
                let lo = t * chunk;
                let hi = ((t + 1) * chunk).min(cells.len());
                let pattern = pattern.clone();
                let (cells, cell_dofs, constraints) = (&cells, &cell_dofs, &constraints);
                let fe = &fe;
                handles.push(scope.spawn(move || {
                    let mut m = BlockMatrix::zeros(pattern, 1);
                    let mut b = BlockVector::zeros(n, 1);
                    assemble_range(basis, fe, cells, cell_dofs, lo..hi, constraints, f, &mut m, &mut b);
                    (m, b)
                }));
            }
            for h in handles {
                parts.push(h.join().expect("assembly worker panicked"));
            }
        });
        // Serial merge in range order keeps every entry's accumulation
        // sequence independent of thread scheduling.
        for (m, b) in &parts {
            for i in 0..n {
                let cols: Vec<(usize, f64)> =
                    m.row_entries(i).map(|(j, v)| (j, v[0])).collect();
                for (j, v) in cols {
                    matrix.entry_mut(i, j).expect("shared pattern")[0] += v;
                }
            }
            rhs.axpy(1.0, b);
        }
    }

    // Constrained rows become identity rows with zero load; the true value
    // is reconstructed from the masters after the solve.
    for (i, c) in constraints.iter().enumerate() {
        if c.is_some() {
            matrix.entry_mut(i, i).expect("diagonal present")[0] = 1.0;
            rhs.block_mut(i)[0] = 0.0;
        }
    }

    apply_dirichlet(&mut matrix, &mut rhs, &boundary, &boundary_value);

    Ok(System { matrix, rhs, constraints, boundary, boundary_value })
}

/// Numeric assembly of one contiguous cell range.
#[allow(clippy::too_many_arguments)]
fn assemble_range(
    basis: &GlobalBasis,
    fe: &CubeLagrange,
    cells: &[boxfem::grid::Entity],
    cell_dofs: &[Vec<usize>],
    range: std::ops::Range<usize>,
    constraints: &Constraints,
    f: &(dyn Fn(&Point) -> f64 + Sync),
    matrix: &mut BlockMatrix<f64>,
    rhs: &mut BlockVector<f64>,
) {
    let view = basis.view();
    let k = fe.size();
    for ci in range {
        let geo = view.grid().geometry(&cells[ci]);
        let a_loc = element_stiffness(fe, &geo);
        let b_loc = element_load(fe, &geo, &|x| f(x));
        let dofs = &cell_dofs[ci];
        for i in 0..k {
            for (gi, wi) in expand(constraints, dofs[i]) {
                rhs.block_mut(gi)[0] += wi * b_loc[i];
                for j in 0..k {
                    for (gj, wj) in expand(constraints, dofs[j]) {
                        matrix.entry_mut(gi, gj).expect("pattern covers expansion")[0] +=
                            wi * wj * a_loc[i * k + j];
                    }
                }
            }
        }
    }
}

/// Constraint expansion of one DOF: itself with weight 1 when free, the
/// master list when hanging.
fn expand(constraints: &Constraints, d: usize) -> Vec<(usize, f64)> {
    match constraints.get(d) {
        Some(Some(ms)) => ms.clone(),
        _ => vec![(d, 1.0)],
    }
}

/// Global DOF digits per cell, in local shape-function order.
fn collect_cell_dofs(basis: &GlobalBasis, cells: &[boxfem::grid::Entity]) -> Vec<Vec<usize>> {
    let mut lv = basis.local_view();
    let mut out = Vec::with_capacity(cells.len());
    for cell in cells {
        lv.bind(*cell);
        out.push((0..lv.size()).map(|i| lv.global_index(i)[0] as usize).collect());
    }
    out
}

/// Marks DOFs whose shape node lies on a boundary facet and evaluates the
/// prescribed value there. Node positions on the reference cube are exact
/// lattice fractions, so the facet test is an exact comparison.
fn boundary_dofs(
    basis: &GlobalBasis,
    fe: &CubeLagrange,
    g: &(dyn Fn(&Point) -> f64 + Sync),
) -> (Vec<bool>, Vec<f64>) {
    let view = basis.view();
    let n = basis.dimension();
    let mut on_boundary = vec![false; n];
    let mut value = vec![0.0; n];
    let mut lv = basis.local_view();
    for cell in view.cells() {
        let mut facets: Vec<usize> = Vec::new();
        for is in view.intersections(&cell) {
            if is.boundary() {
                facets.push(is.index_in_inside());
            }
        }
        if facets.is_empty() {
            continue;
        }
        lv.bind(cell);
        let geo = view.grid().geometry(&cell);
        for j in 0..fe.size() {
            let node = fe.node(j);
            for &kf in &facets {
                let (axis, side) = (kf / 2, kf % 2);
                if node[axis] == side as f64 {
                    let d = lv.global_index(j)[0] as usize;
                    if !on_boundary[d] {
                        on_boundary[d] = true;
                        value[d] = g(&geo.global(&node));
                    }
                }
            }
        }
    }
    (on_boundary, value)
}

/// Dirichlet rows become unit rows with the prescribed value on the right
/// hand side; the matching columns are eliminated from all other rows
/// (moving their contribution to the rhs), which preserves symmetry.
pub fn apply_dirichlet(
    matrix: &mut BlockMatrix<f64>,
    rhs: &mut BlockVector<f64>,
    boundary: &[bool],
    value: &[f64],
) {
    let n = matrix.rows();
    for r in 0..n {
        let cols: Vec<usize> = matrix.row_entries(r).map(|(j, _)| j).collect();
        if boundary[r] {
            for j in cols {
                matrix.entry_mut(r, j).expect("existing entry")[0] =
                    if j == r { 1.0 } else { 0.0 };
            }
            rhs.block_mut(r)[0] = value[r];
        } else {
            for j in cols {
                if boundary[j] {
                    let a = matrix.entry_mut(r, j).expect("existing entry");
                    let v = a[0];
                    a[0] = 0.0;
                    rhs.block_mut(r)[0] -= v * value[j];
                }
            }
        }
    }
}

/// Builds the preconditioner named by `<section>.precond` (default `ssor`).
pub fn build_precond<'a>(
    op: &'a BlockMatrix<f64>,
    tree: &ParameterTree,
    section: &str,
) -> Result<Box<dyn Preconditioner<f64> + 'a>, AppError> {
    let key = |name: &str| format!("{section}.{name}");
    let name = tree.get_raw(&key("precond")).unwrap_or("ssor").to_string();
    let sweeps: usize = tree.get_or(&key("sweeps"), 1)?;
    let omega: f64 = tree.get_or(&key("omega"), 1.0)?;
    let fail = |e: boxfem::solvers::SolverError| {
        AppError::Config(format!("cannot build preconditioner '{name}': {e}"))
    };
    Ok(match name.as_str() {
        "identity" => Box::new(Identity),
        "jacobi" => Box::new(Jacobi::new(op, sweeps).map_err(fail)?),
        "ssor" => Box::new(Ssor::new(op, omega, sweeps).map_err(fail)?),
        "ilu0" => Box::new(Ilu0::new(op).map_err(fail)?),
        other => {
            return Err(AppError::Config(format!(
                "unknown preconditioner '{other}' (expected identity, jacobi, ssor, ilu0)"
            )))
        }
    })
}

/// Solves the assembled system with the solver configured in `section`,
/// filling constrained DOFs from their masters afterwards. The initial
/// guess in `x` is kept on free DOFs; boundary and hanging DOFs are seeded
/// consistently first. Non-convergence is returned as an error carrying the
/// solver statistics.
pub fn solve_system(
    sys: &System,
    tree: &ParameterTree,
    section: &str,
    x: &mut BlockVector<f64>,
) -> Result<SolverResult, AppError> {
    for i in 0..x.n_blocks() {
        if sys.boundary[i] {
            x.block_mut(i)[0] = sys.boundary_value[i];
        } else if sys.constraints[i].is_some() {
            x.block_mut(i)[0] = 0.0;
        }
    }
    let pre = build_precond(&sys.matrix, tree, section)?;
    let solver = solver_from_tree(&sys.matrix, pre.as_ref(), tree, section)?;
    let result = solver.solve(&sys.rhs, x);
    if !result.converged {
        return Err(AppError::Solver { context: section.to_string(), result });
    }
    fill_constrained(&sys.constraints, x);
    Ok(result)
}

/// Overwrites hanging DOFs with the weighted master values.
pub fn fill_constrained(constraints: &Constraints, x: &mut BlockVector<f64>) {
    for (i, c) in constraints.iter().enumerate() {
        if let Some(ms) = c {
            let v = ms.iter().map(|&(m, w)| w * x.block(m)[0]).sum();
            x.block_mut(i)[0] = v;
        }
    }
}

/// L2 and (full) H1 errors of a discrete field against a smooth reference,
/// integrated cell-wise with a rule of order `2k + 2`.
pub fn solution_errors(
    basis: &GlobalBasis,
    coeffs: &CoeffVec,
    exact: &dyn Fn(&Point) -> f64,
    exact_grad: &dyn Fn(&Point) -> Point,
) -> (f64, f64) {
    let view = basis.view();
    let order = basis_order(basis);
    let rule = quadrature_rule(
        boxfem::geometry::GeometryType::cube(view.dim()),
        2 * order + 2,
    )
    .expect("error rule");
    let (mut l2, mut h1) = (0.0f64, 0.0f64);
    for cell in view.cells() {
        let geo = view.grid().geometry(&cell);
        for q in rule.points() {
            let ie = geo.integration_element(&q.position);
            let x = geo.global(&q.position);
            let uh = basis.evaluate(coeffs, &cell, &q.position)[0];
            let gh = basis.evaluate_gradient(coeffs, &cell, &q.position)[0];
            let du = uh - exact(&x);
            let dg = gh - exact_grad(&x);
            l2 += q.weight * ie * du * du;
            h1 += q.weight * ie * dg.dot(&dg);
        }
    }
    (l2.sqrt(), (l2 + h1).sqrt())
}

/// Order of the (scalar Lagrange) basis behind a global basis.
pub fn basis_order(basis: &GlobalBasis) -> usize {
    match basis.descriptor() {
        boxfem::basis::BasisDescriptor::Lagrange { order } => *order,
        _ => panic!("assembly expects a scalar Lagrange basis"),
    }
}
