//! Acceptance suite: one integration test per release criterion, each
//! printing a `[PASS]`/`[FAIL]` line with its wall time (visible with
//! `cargo test --test acceptance -- --nocapture`) and failing when its
//! runtime cap is exceeded.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use boxfem::basis::{make_basis, BasisDescriptor, GlobalBasis, Strategy};
use boxfem::dense::Lanes;
use boxfem::geometry::{quadrature_rule, GeometryType, Point};
use boxfem::grid::{Entity, GlobalId, HierarchicalGrid};
use boxfem::linalg::{BlockMatrix, BlockVector, PatternBuilder, SparsityPattern};
use boxfem::localfe::lagrange_element;
use boxfem::solvers::{
    solve_bicgstab, solve_cg, solve_gmres, solver_from_tree, Identity, Ilu0, IterControl,
    ParameterTree, SolverKind,
};
use boxfem_cli::assemble::{assemble, element_stiffness};
use boxfem_cli::{adapt, movingmesh, poisson, Command, RunConfig};
use boxfem_testkit::{lu_solve, rel_inf_dist, rng, DenseMat};
use rand::Rng;

// ---------------------------------------------------------------- harness

/// Runs one criterion body, reports `[PASS]`/`[FAIL]` with the elapsed
/// time, re-raises any assertion failure, and enforces the runtime cap.
fn criterion(number: u32, name: &str, cap_seconds: f64, body: impl FnOnce()) {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(body));
    let elapsed = start.elapsed().as_secs_f64();
    let tag = if outcome.is_ok() { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {number:02} ({name}) ({elapsed:.2}s)");
    if let Err(panic) = outcome {
        std::panic::resume_unwind(panic);
    }
    assert!(
        elapsed < cap_seconds,
        "criterion {number} took {elapsed:.2}s, cap is {cap_seconds}s"
    );
}

fn run_command(cfg: &RunConfig) -> String {
    let mut buf = Vec::new();
    boxfem_cli::run(cfg, &mut buf).expect("command must succeed");
    String::from_utf8(buf).expect("CSV is ASCII")
}

/// Numeric CSV column selected by header name; skips the `total` trailer.
fn column(text: &str, name: &str) -> Vec<f64> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().expect("header").split(',').collect();
    let idx = header.iter().position(|h| *h == name).expect("column");
    lines
        .filter(|l| !l.starts_with("total,"))
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

// ----------------------------------------------------- linear test systems

fn full_pattern(n: usize) -> Arc<SparsityPattern> {
    let mut b = PatternBuilder::new(n, n);
    for i in 0..n {
        for j in 0..n {
            b.insert(i, j);
        }
    }
    Arc::new(b.lock())
}

fn random_vec(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| r.random_range(-1.0..1.0)).collect()
}

/// Random SPD matrix `GᵀG + n·I` with `nb × nb` blocks of size `bs`.
fn random_spd(nb: usize, bs: usize, seed: u64) -> BlockMatrix<f64> {
    let n = nb * bs;
    let mut r = rng(seed);
    let g: Vec<f64> = (0..n * n).map(|_| r.random_range(-1.0..1.0)).collect();
    let mut a = BlockMatrix::zeros(full_pattern(nb), bs);
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += g[k * n + i] * g[k * n + j];
            }
            if i == j {
                s += n as f64;
            }
            a.entry_mut(i / bs, j / bs).unwrap()[(i % bs) * bs + j % bs] = s;
        }
    }
    a
}

/// Random strictly diagonally dominant nonsymmetric matrix.
fn random_diag_dominant(nb: usize, bs: usize, seed: u64) -> BlockMatrix<f64> {
    let n = nb * bs;
    let mut r = rng(seed);
    let mut a = BlockMatrix::zeros(full_pattern(nb), bs);
    for i in 0..n {
        let mut off = 0.0;
        for j in 0..n {
            if i == j {
                continue;
            }
            let v = r.random_range(-1.0..1.0);
            a.entry_mut(i / bs, j / bs).unwrap()[(i % bs) * bs + j % bs] = v;
            off += v.abs();
        }
        a.entry_mut(i / bs, i / bs).unwrap()[(i % bs) * bs + i % bs] =
            off + 1.0 + r.random_range(0.0..1.0);
    }
    a
}

/// Flattens a blocked matrix into the dense oracle type.
fn to_dense(a: &BlockMatrix<f64>) -> DenseMat {
    let m = a.block_size();
    let n = a.flat_rows();
    let mut d = DenseMat::zeros(n, n);
    for i in 0..a.rows() {
        for (j, blk) in a.row_entries(i) {
            for r in 0..m {
                for c in 0..m {
                    *d.at_mut(i * m + r, j * m + c) = blk[r * m + c];
                }
            }
        }
    }
    d
}

// -------------------------------------------------------------- criteria

#[test]
fn criterion_01_quadrature_exactness() {
    criterion(1, "quadrature exactness for random monomials", 5.0, || {
        let mut r = rng(101);
        for d in 1..=3usize {
            for order in 0..=9usize {
                let rule = quadrature_rule(GeometryType::cube(d), order).unwrap();
                for _ in 0..8 {
                    let exps: Vec<i32> =
                        (0..d).map(|_| r.random_range(0..=order as i32)).collect();
                    let mut value = 0.0;
                    for q in rule.points() {
                        let mut term = q.weight;
                        for (axis, &e) in exps.iter().enumerate() {
                            term *= q.position[axis].powi(e);
                        }
                        value += term;
                    }
                    // ∫_{[0,1]^d} Π x_a^{e_a} dx = Π 1/(e_a + 1)
                    let exact: f64 = exps.iter().map(|&e| 1.0 / (e as f64 + 1.0)).product();
                    let rel = (value - exact).abs() / exact;
                    assert!(
                        rel < 1e-13,
                        "d={d} order={order} exponents {exps:?}: relative error {rel:e}"
                    );
                }
            }
        }
    });
}

#[test]
fn criterion_02_divergence_theorem() {
    criterion(2, "divergence totals equal d·|domain|", 5.0, || {
        for dim in [2usize, 3] {
            for adapt_first in [false, true] {
                let mut cfg = RunConfig::new(Command::Divergence);
                cfg.dim = Some(dim);
                cfg.cells = Some(2);
                cfg.refine = Some(1);
                if adapt_first {
                    cfg.config_text = Some("[divergence]\nadapt = true\n".into());
                }
                let text = run_command(&cfg);
                let total: f64 = text
                    .lines()
                    .last()
                    .and_then(|l| l.strip_prefix("total,"))
                    .expect("total row")
                    .parse()
                    .unwrap();
                assert!(
                    (total - dim as f64).abs() < 1e-12,
                    "dim {dim}, adapted {adapt_first}: total {total}"
                );
            }
        }
    });
}

#[test]
fn criterion_03_midpoint_integration_convergence() {
    criterion(3, "midpoint rule converges at second order", 10.0, || {
        let errs = column(&run_command(&RunConfig::new(Command::Integrate)), "midpoint_error");
        assert_eq!(errs.len(), 5, "five refinement rows");
        for i in 1..errs.len() {
            let ratio = errs[i - 1] / errs[i];
            assert!((3.6..=4.4).contains(&ratio), "error ratio {ratio}");
        }
    });
}

#[test]
fn criterion_04_grid_invariants_under_adaptation() {
    criterion(4, "invariants through 200 random adapt cycles", 60.0, || {
        let mut r = rng(404);
        let mut grid = HierarchicalGrid::unit(2, 4);
        let mut previous: BTreeMap<GlobalId, Point> = BTreeMap::new();
        let probes = [
            Point::from_slice(&[0.0, 0.0]),
            Point::from_slice(&[1.0, 0.0]),
            Point::from_slice(&[0.0, 1.0]),
            Point::from_slice(&[1.0, 1.0]),
            Point::from_slice(&[0.5, 0.5]),
        ];
        for cycle in 0..200 {
            let marks: Vec<(Entity, i8)> = {
                let view = grid.leaf_view();
                let crowded = view.size(0) > 2500;
                view.cells()
                    .filter_map(|c| {
                        let p: f64 = r.random();
                        if !crowded && p < 0.25 {
                            Some((c, 1))
                        } else if p > 0.5 {
                            Some((c, -1))
                        } else {
                            None
                        }
                    })
                    .collect()
            };
            for (c, m) in &marks {
                grid.mark(*m, c);
            }
            grid.pre_adapt();
            grid.adapt();
            {
                // new cells must sit exactly where the father-embedding says
                let view = grid.leaf_view();
                for cell in view.cells() {
                    if !grid.is_new(&cell) {
                        continue;
                    }
                    let father = cell.father().expect("new cells have fathers");
                    let embed = grid.geometry_in_father(&cell);
                    let child_geo = grid.geometry(&cell);
                    let father_geo = grid.geometry(&father);
                    for q in &probes {
                        let via_father = father_geo.global(&embed.global(q));
                        let direct = child_geo.global(q);
                        assert!(
                            via_father.dist(&direct) < 1e-13,
                            "cycle {cycle}: father route off by {}",
                            via_father.dist(&direct)
                        );
                    }
                }
            }
            grid.post_adapt();

            let view = grid.leaf_view();
            assert!(
                (view.volume() - 1.0).abs() < 1e-12,
                "cycle {cycle}: leaf volume {}",
                view.volume()
            );
            for codim in [0usize, 2] {
                let n = view.size(codim);
                let mut seen = vec![false; n];
                for e in view.entities(codim) {
                    let i = view.index(&e);
                    assert!(i < n && !seen[i], "cycle {cycle}: index not bijective");
                    seen[i] = true;
                }
                assert!(seen.into_iter().all(|s| s), "cycle {cycle}: index holes");
            }
            let mut centers: BTreeMap<GlobalId, Point> = BTreeMap::new();
            for cell in view.cells() {
                for is in view.intersections(&cell) {
                    if let Some(out) = is.outside() {
                        let diff = cell.level() as i64 - out.level() as i64;
                        assert!(diff.abs() <= 1, "cycle {cycle}: balance broken ({diff})");
                    }
                }
                let center = grid.geometry(&cell).global(&Point::splat(2, 0.5));
                assert!(
                    centers.insert(cell.id(), center).is_none(),
                    "cycle {cycle}: duplicate leaf id"
                );
            }
            for (id, center) in &centers {
                if let Some(old) = previous.get(id) {
                    assert_eq!(old, center, "cycle {cycle}: persistent id moved");
                }
            }
            previous = centers;
        }
    });
}

#[test]
fn criterion_05_krylov_solvers_against_dense_oracle() {
    criterion(5, "Krylov solvers match dense LU oracle", 30.0, || {
        // CG on a 200x200 scalar SPD system: converged within n iterations
        let a = random_spd(200, 1, 501);
        let b = random_vec(200, 502);
        let oracle = lu_solve(&to_dense(&a), &b);
        let mut x = BlockVector::zeros(200, 1);
        let ctl = IterControl { reduction: 1e-10, maxit: 200, verbose: 0 };
        let res = solve_cg(&a, &Identity, &BlockVector::from_flat(b, 1), &mut x, &ctl);
        assert!(res.converged, "CG must converge in ≤ n iterations: {res:?}");
        assert!(res.iterations <= 200);
        assert!(rel_inf_dist(x.as_slice(), &oracle) < 1e-8);

        // CG on an SPD system with 2x2 blocks
        let a = random_spd(60, 2, 511);
        let b = random_vec(120, 512);
        let oracle = lu_solve(&to_dense(&a), &b);
        let mut x = BlockVector::zeros(60, 2);
        let res = solve_cg(&a, &Identity, &BlockVector::from_flat(b, 2), &mut x, &ctl);
        assert!(res.converged);
        assert!(rel_inf_dist(x.as_slice(), &oracle) < 1e-8);

        // BiCGSTAB and GMRes on nonsymmetric diagonally dominant systems
        let ctl = IterControl { reduction: 1e-10, maxit: 500, verbose: 0 };
        let a = random_diag_dominant(150, 1, 521);
        let b = random_vec(150, 522);
        let oracle = lu_solve(&to_dense(&a), &b);
        let mut x = BlockVector::zeros(150, 1);
        let res = solve_bicgstab(&a, &Identity, &BlockVector::from_flat(b.clone(), 1), &mut x, &ctl);
        assert!(res.converged, "{res:?}");
        assert!(rel_inf_dist(x.as_slice(), &oracle) < 1e-8);
        let mut x = BlockVector::zeros(150, 1);
        let res = solve_gmres(&a, &Identity, &BlockVector::from_flat(b, 1), &mut x, 30, &ctl);
        assert!(res.converged, "{res:?}");
        assert!(rel_inf_dist(x.as_slice(), &oracle) < 1e-8);

        // nonsymmetric with 2x2 blocks through GMRes
        let a = random_diag_dominant(50, 2, 531);
        let b = random_vec(100, 532);
        let oracle = lu_solve(&to_dense(&a), &b);
        let mut x = BlockVector::zeros(50, 2);
        let res = solve_gmres(&a, &Identity, &BlockVector::from_flat(b, 2), &mut x, 30, &ctl);
        assert!(res.converged, "{res:?}");
        assert!(rel_inf_dist(x.as_slice(), &oracle) < 1e-8);

        // ILU(0) must beat the unpreconditioned iteration count on the
        // assembled Laplace matrix
        let grid = HierarchicalGrid::unit(2, 16);
        let view = grid.leaf_view();
        let basis = make_basis(&view, &BasisDescriptor::lagrange(1)).unwrap();
        let sys = assemble(&basis, &|_: &Point| 1.0, &|_: &Point| 0.0, 1).unwrap();
        let ctl = IterControl { reduction: 1e-8, maxit: 1000, verbose: 0 };
        let mut x = BlockVector::zeros(basis.dimension(), 1);
        let plain = solve_cg(&sys.matrix, &Identity, &sys.rhs, &mut x, &ctl);
        let ilu = Ilu0::new(&sys.matrix).unwrap();
        let mut x = BlockVector::zeros(basis.dimension(), 1);
        let pre = solve_cg(&sys.matrix, &ilu, &sys.rhs, &mut x, &ctl);
        assert!(plain.converged && pre.converged);
        assert!(
            pre.iterations < plain.iterations,
            "ILU(0) {} vs identity {}",
            pre.iterations,
            plain.iterations
        );
    });
}

#[test]
fn criterion_06_lane_parallel_right_hand_sides() {
    criterion(6, "4-lane CG matches scalar solves per lane", 10.0, || {
        const L: usize = 4;
        let n = 40;
        let a = random_spd(n, 1, 601);
        let al = a.broadcast(Lanes::<L>::splat);
        let ctl = IterControl { reduction: 1e-13, maxit: 500, verbose: 0 };

        // distinct right-hand sides, one per lane
        let rhs: Vec<Vec<f64>> = (0..L).map(|l| random_vec(n, 610 + l as u64)).collect();
        let scalars: Vec<BlockVector<f64>> = rhs
            .iter()
            .map(|b| {
                let mut x = BlockVector::zeros(n, 1);
                let r = solve_cg(&a, &Identity, &BlockVector::from_flat(b.clone(), 1), &mut x, &ctl);
                assert!(r.converged);
                x
            })
            .collect();
        let bl = BlockVector::from_flat(
            (0..n)
                .map(|i| Lanes::<L>::from_array(std::array::from_fn(|l| rhs[l][i])))
                .collect(),
            1,
        );
        let mut xl = BlockVector::zeros(n, 1);
        let res = solve_cg(&al, &Identity, &bl, &mut xl, &ctl);
        assert!(res.converged, "{res:?}");
        for l in 0..L {
            let scale = scalars[l].as_slice().iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for i in 0..n {
                let lane = xl.as_slice()[i][l];
                let scalar = scalars[l].as_slice()[i];
                assert!(
                    (lane - scalar).abs() < 1e-12 * scale,
                    "lane {l} entry {i}: {lane} vs {scalar}"
                );
            }
        }

        // identical lanes must reproduce the scalar iteration bit for bit
        let b0 = rhs[0].clone();
        let mut xs = BlockVector::zeros(n, 1);
        let rs = solve_cg(&a, &Identity, &BlockVector::from_flat(b0.clone(), 1), &mut xs, &ctl);
        let bl0 = BlockVector::from_flat(b0.iter().map(|&v| Lanes::<L>::splat(v)).collect(), 1);
        let mut xl0 = BlockVector::zeros(n, 1);
        let rl = solve_cg(&al, &Identity, &bl0, &mut xl0, &ctl);
        assert_eq!(rs.iterations, rl.iterations, "identical lanes must not change the path");
        for (sv, lv) in xs.as_slice().iter().zip(xl0.as_slice()) {
            for l in 0..L {
                assert_eq!(sv.to_bits(), lv[l].to_bits(), "lane {l} diverged bitwise");
            }
        }
    });
}

#[test]
fn criterion_07_mixed_basis_index_integrity() {
    criterion(7, "mixed-space index tree matches collected indices", 5.0, || {
        for n in [2usize, 4] {
            let grid = HierarchicalGrid::unit(2, n);
            let view = grid.leaf_view();
            let velocity = BasisDescriptor::power(
                BasisDescriptor::lagrange(2),
                2,
                Strategy::BlockedLexicographic,
            );
            let desc = BasisDescriptor::composite(
                vec![velocity, BasisDescriptor::lagrange(1)],
                Strategy::BlockedLexicographic,
            );
            let basis = make_basis(&view, &desc).unwrap();

            let q2 = (2 * n + 1) * (2 * n + 1);
            let q1 = (n + 1) * (n + 1);
            assert_eq!(basis.dimension(), 2 * q2 + q1, "counting oracle (k·n+1)²");
            if n == 2 {
                assert_eq!(basis.size(&[]).unwrap(), 2);
                assert_eq!(basis.size(&[0, 0]).unwrap(), 25);
                assert_eq!(basis.size(&[1]).unwrap(), 9);
            }

            let mut announced = BTreeSet::new();
            enumerate_tree(&basis, &mut Vec::new(), &mut announced);
            let mut collected = BTreeSet::new();
            let mut lv = basis.local_view();
            for cell in view.cells() {
                lv.bind(cell);
                for i in 0..lv.size() {
                    collected.insert(lv.global_index(i).digits().to_vec());
                }
            }
            assert_eq!(announced.len(), 2 * q2 + q1);
            assert_eq!(collected, announced, "n = {n}: collected set must tile the tree");
        }
    });
}

/// Depth-first walk of the announced index tree: a prefix with zero
/// follow-up digits is a complete multi-index.
fn enumerate_tree(basis: &GlobalBasis, prefix: &mut Vec<u32>, out: &mut BTreeSet<Vec<u32>>) {
    let n = basis.size(prefix).unwrap();
    if n == 0 {
        out.insert(prefix.clone());
        return;
    }
    for k in 0..n as u32 {
        prefix.push(k);
        enumerate_tree(basis, prefix, out);
        prefix.pop();
    }
}

#[test]
fn criterion_08_poisson_convergence_orders() {
    criterion(8, "Poisson L2 orders and local stiffness oracle", 60.0, || {
        let tree = RunConfig::new(Command::Poisson).load_tree().unwrap();
        let mut q1 = Vec::new();
        for k in 0..5 {
            q1.push(poisson::solve_level(4 << k, 1, &tree, "poisson", 1).unwrap().l2_error);
        }
        let order = (q1[3] / q1[4]).log2();
        assert!((1.9..=2.1).contains(&order), "observed Q1 L2 order {order}");

        let mut q2 = Vec::new();
        for k in 0..4 {
            q2.push(poisson::solve_level(4 << k, 2, &tree, "poisson", 1).unwrap().l2_error);
        }
        let order = (q2[2] / q2[3]).log2();
        assert!((2.8..=3.2).contains(&order), "observed Q2 L2 order {order}");

        // exact-integration oracle for the bilinear element on the unit square
        let fe = lagrange_element(2, 1);
        let grid = HierarchicalGrid::unit(2, 1);
        let view = grid.leaf_view();
        let cell = view.cells().next().unwrap();
        let a = element_stiffness(&fe, &view.grid().geometry(&cell));
        for i in 0..4usize {
            for j in 0..4usize {
                let expected = match (i ^ j).count_ones() {
                    0 => 2.0 / 3.0,
                    1 => -1.0 / 6.0,
                    _ => -1.0 / 3.0,
                };
                assert!(
                    (a[i * 4 + j] - expected).abs() < 1e-14,
                    "stiffness[{i}][{j}] = {}",
                    a[i * 4 + j]
                );
            }
        }
    });
}

#[test]
fn criterion_09_adaptive_loop() {
    criterion(9, "adaptive loop concentrates on the source bump", 120.0, || {
        let cfg = RunConfig::new(Command::Adapt);
        let tree = cfg.load_tree().unwrap();
        // in-loop grid invariants are asserted inside the driver each cycle
        let rows = adapt::run(&cfg, &tree, &mut Vec::new()).unwrap();
        assert!(rows.len() >= 6, "expected ≥ 6 cycles, got {}", rows.len());
        for i in 1..rows.len() {
            assert!(
                rows[i].estimate <= rows[i - 1].estimate * (1.0 + 1e-12),
                "estimate must be non-increasing: {} -> {}",
                rows[i - 1].estimate,
                rows[i].estimate
            );
        }
        assert!(
            rows[5].in_ball_fraction >= 0.6,
            "after cycle 5: only {} of leaves within 0.25 of the bump",
            rows[5].in_ball_fraction
        );
    });
}

#[test]
fn criterion_10_wrapped_geometry_view() {
    criterion(10, "wrapped-area convergence and identity wrap", 10.0, || {
        let errors = column(&run_command(&RunConfig::new(Command::MovingMesh)), "error");
        for i in 1..errors.len() {
            let ratio = errors[i - 1] / errors[i];
            assert!((3.5..=4.5).contains(&ratio), "area error ratio {ratio}");
        }
        let wrapped = movingmesh::wrapped_grid(4, "identity").unwrap();
        let plain = HierarchicalGrid::unit(2, 4);
        let (wv, pv) = (wrapped.leaf_view(), plain.leaf_view());
        for (wc, pc) in wv.cells().zip(pv.cells()) {
            let a = wv.grid().geometry(&wc).volume();
            let b = pv.grid().geometry(&pc).volume();
            assert!((a - b).abs() < 1e-14, "identity wrap changed a cell volume");
        }
    });
}

#[test]
fn criterion_11_solver_configuration_round_trip() {
    criterion(11, "INI block configures GMRes iterate-for-iterate", 1.0, || {
        let text = "\
[GMRES]
type = gmres
reduction = 1e-8
maxit = 500
restart = 10
verbose = 0
";
        let tree = ParameterTree::parse_ini(text).unwrap();
        assert_eq!(tree.get_raw("GMRES.type"), Some("gmres"));
        assert_eq!(tree.get::<f64>("GMRES.reduction").unwrap(), Some(1e-8));
        assert_eq!(tree.get::<usize>("GMRES.maxit").unwrap(), Some(500));
        assert_eq!(tree.get::<usize>("GMRES.restart").unwrap(), Some(10));
        assert_eq!(tree.get::<u32>("GMRES.verbose").unwrap(), Some(0));

        let a = random_diag_dominant(8, 1, 1101);
        let s = solver_from_tree(&a, &Identity, &tree, "GMRES").unwrap();
        assert_eq!(s.kind(), SolverKind::Gmres);
        let b = BlockVector::from_flat(random_vec(8, 1102), 1);
        let mut x1 = BlockVector::zeros(8, 1);
        let r1 = s.solve(&b, &mut x1);
        let mut x2 = BlockVector::zeros(8, 1);
        let ctl = IterControl { reduction: 1e-8, maxit: 500, verbose: 0 };
        let r2 = solve_gmres(&a, &Identity, &b, &mut x2, 10, &ctl);
        assert_eq!(r1.converged, r2.converged);
        assert_eq!(r1.iterations, r2.iterations);
        assert_eq!(r1.final_defect.to_bits(), r2.final_defect.to_bits());
        for (u, v) in x1.as_slice().iter().zip(x2.as_slice()) {
            assert_eq!(u.to_bits(), v.to_bits(), "configured run must replay the direct run");
        }
    });
}
