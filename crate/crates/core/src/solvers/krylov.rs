use std::time::Instant;

use crate::dense::{Field, Mask, RealField};
use crate::linalg::{BlockVector, LinearOperator};

use super::{IterControl, PrecondSide, Preconditioner, SolverResult};

/// Shared bookkeeping: lane-wise convergence threshold, verbose printing and
/// result assembly.
struct Run<S: Field> {
    start: Instant,
    threshold: S::Real,
    defect0_max: f64,
    verbose: u32,
}

impl<S: Field> Run<S> {
    fn new(defect0: S::Real, ctl: &IterControl) -> Self {
        let threshold = defect0 * <S::Real as Field>::from_f64(ctl.reduction);
        Run {
            start: Instant::now(),
            threshold,
            defect0_max: defect0.max_lane(),
            verbose: ctl.verbose,
        }
    }

    /// All lanes at or below their reduction target?
    fn reached(&self, norm: S::Real) -> bool {
        norm.le(self.threshold).all_true()
    }

    fn log(&self, k: usize, norm: S::Real) {
        if self.verbose >= 1 {
            let n = norm.max_lane();
            let red = if self.defect0_max > 0.0 { n / self.defect0_max } else { 0.0 };
            eprintln!("it {k:4}  defect {n:.6e}  reduction {red:.6e}");
        }
    }

    fn result(
        &self,
        converged: bool,
        iterations: usize,
        final_norm: S::Real,
        breakdown: bool,
    ) -> SolverResult {
        let f = final_norm.max_lane();
        let reduction = if self.defect0_max > 0.0 { f / self.defect0_max } else { 0.0 };
        if self.verbose >= 2 {
            eprintln!(
                "=== converged={converged} iterations={iterations} reduction={reduction:.3e} \
                 breakdown={breakdown}"
            );
        }
        SolverResult {
            converged,
            iterations,
            initial_defect: self.defect0_max,
            final_defect: f,
            reduction,
            elapsed: self.start.elapsed().as_secs_f64(),
            breakdown,
            preconditioning: PrecondSide::Left,
        }
    }
}

fn check_shapes<S: Field>(op: &dyn LinearOperator<S>, b: &BlockVector<S>, x: &BlockVector<S>) {
    assert_eq!(op.block_rows(), op.block_cols(), "solvers need a square operator");
    assert_eq!(b.n_blocks(), op.block_rows(), "right-hand side shape mismatch");
    assert_eq!(x.n_blocks(), op.block_cols(), "unknown vector shape mismatch");
    assert_eq!(b.block_size(), op.block_size());
    assert_eq!(x.block_size(), op.block_size());
}

/// Recomputes the defect `d = b - A x` from scratch and returns its norm.
fn recompute_defect<S: Field>(
    op: &dyn LinearOperator<S>,
    b: &BlockVector<S>,
    x: &BlockVector<S>,
    d: &mut BlockVector<S>,
) -> S::Real {
    d.copy_from(b);
    op.usmv(-S::one(), x, d);
    d.two_norm()
}

/// Richardson iteration `x += M(b - Ax)` — mainly a driver for strong
/// preconditioners.
pub fn solve_loop<S: Field>(
    op: &dyn LinearOperator<S>,
    pre: &dyn Preconditioner<S>,
    b: &BlockVector<S>,
    x: &mut BlockVector<S>,
    ctl: &IterControl,
) -> SolverResult {
    ctl.validate();
    check_shapes(op, b, x);
    let mut bw = b.clone();
    pre.pre(x, &mut bw);

    let mut d = bw.clone();
    op.usmv(-S::one(), x, &mut d);
    let norm0 = d.two_norm();
    let run = Run::<S>::new(norm0, ctl);
    if run.defect0_max == 0.0 {
        pre.post(x);
        return run.result(true, 0, norm0, false);
    }

    let mut v = BlockVector::zeros(bw.n_blocks(), bw.block_size());
    let mut norm = norm0;
    let mut converged = false;
    let mut iterations = 0;
    for k in 1..=ctl.maxit {
        pre.apply(&mut v, &d);
        x.axpy(S::one(), &v);
        op.usmv(-S::one(), &v, &mut d);
        norm = d.two_norm();
        iterations = k;
        run.log(k, norm);
        if run.reached(norm) {
            norm = recompute_defect(op, &bw, x, &mut d);
            if run.reached(norm) {
                converged = true;
                break;
            }
        }
    }
    pre.post(x);
    run.result(converged, iterations, norm, false)
}

/// Steepest descent with preconditioned search direction and exact line
/// search.
pub fn solve_gradient<S: Field>(
    op: &dyn LinearOperator<S>,
    pre: &dyn Preconditioner<S>,
    b: &BlockVector<S>,
    x: &mut BlockVector<S>,
    ctl: &IterControl,
) -> SolverResult {
    ctl.validate();
    check_shapes(op, b, x);
    let mut bw = b.clone();
    pre.pre(x, &mut bw);

    let mut d = bw.clone();
    op.usmv(-S::one(), x, &mut d);
    let norm0 = d.two_norm();
    let run = Run::<S>::new(norm0, ctl);
    if run.defect0_max == 0.0 {
        pre.post(x);
        return run.result(true, 0, norm0, false);
    }

    let mut v = BlockVector::zeros(bw.n_blocks(), bw.block_size());
    let mut q = v.clone();
    let mut norm = norm0;
    let mut converged = false;
    let mut breakdown = false;
    let mut iterations = 0;
    for k in 1..=ctl.maxit {
        pre.apply(&mut v, &d);
        op.apply(&v, &mut q);
        let denom = v.dot(&q);
        if denom.min_abs() == 0.0 {
            breakdown = true;
            break;
        }
        let alpha = v.dot(&d) / denom;
        x.axpy(alpha, &v);
        d.axpy(-alpha, &q);
        norm = d.two_norm();
        iterations = k;
        run.log(k, norm);
        if run.reached(norm) {
            norm = recompute_defect(op, &bw, x, &mut d);
            if run.reached(norm) {
                converged = true;
                break;
            }
        }
    }
    pre.post(x);
    run.result(converged, iterations, norm, breakdown)
}

/// Preconditioned conjugate gradients for Hermitian positive definite
/// operators. Detects indefinite directions (`p·Ap <= 0` in any lane) and
/// flags them as breakdown.
pub fn solve_cg<S: Field>(
    op: &dyn LinearOperator<S>,
    pre: &dyn Preconditioner<S>,
    b: &BlockVector<S>,
    x: &mut BlockVector<S>,
    ctl: &IterControl,
) -> SolverResult {
    ctl.validate();
    check_shapes(op, b, x);
    let mut bw = b.clone();
    pre.pre(x, &mut bw);

    let mut r = bw.clone();
    op.usmv(-S::one(), x, &mut r);
    let norm0 = r.two_norm();
    let run = Run::<S>::new(norm0, ctl);
    if run.defect0_max == 0.0 {
        pre.post(x);
        return run.result(true, 0, norm0, false);
    }

    let mut z = BlockVector::zeros(bw.n_blocks(), bw.block_size());
    pre.apply(&mut z, &r);
    let mut p = z.clone();
    let mut rho = r.dot(&z);
    let mut q = z.clone();
    let mut norm = norm0;
    let mut converged = false;
    let mut breakdown = rho.min_abs() == 0.0;
    let mut iterations = 0;
    if !breakdown {
        for k in 1..=ctl.maxit {
            op.apply(&p, &mut q);
            let denom = p.dot(&q);
            // positive definiteness check, lane-wise on the real part
            if denom.re().min_lane() <= 0.0 {
                breakdown = true;
                break;
            }
            let alpha = rho / denom;
            x.axpy(alpha, &p);
            r.axpy(-alpha, &q);
            norm = r.two_norm();
            iterations = k;
            run.log(k, norm);
            if run.reached(norm) {
                // residual replacement: the recomputed defect becomes the
                // new residual if the iteration has to continue
                norm = recompute_defect(op, &bw, x, &mut r);
                if run.reached(norm) {
                    converged = true;
                    break;
                }
            }
            pre.apply(&mut z, &r);
            let rho_next = r.dot(&z);
            if rho_next.min_abs() == 0.0 {
                breakdown = true;
                break;
            }
            let beta = rho_next / rho;
            p.scale_add(beta, &z);
            rho = rho_next;
        }
    }
    pre.post(x);
    run.result(converged, iterations, norm, breakdown)
}

/// Preconditioned stabilized bi-conjugate gradients for general square
/// systems. Vanishing inner products set the breakdown flag and end the
/// iteration without touching the current iterate further.
pub fn solve_bicgstab<S: Field>(
    op: &dyn LinearOperator<S>,
    pre: &dyn Preconditioner<S>,
    b: &BlockVector<S>,
    x: &mut BlockVector<S>,
    ctl: &IterControl,
) -> SolverResult {
    ctl.validate();
    check_shapes(op, b, x);
    let mut bw = b.clone();
    pre.pre(x, &mut bw);

    let mut r = bw.clone();
    op.usmv(-S::one(), x, &mut r);
    let norm0 = r.two_norm();
    let run = Run::<S>::new(norm0, ctl);
    if run.defect0_max == 0.0 {
        pre.post(x);
        return run.result(true, 0, norm0, false);
    }

    let rt = r.clone();
    let zeros = BlockVector::zeros(bw.n_blocks(), bw.block_size());
    let (mut p, mut v, mut y, mut z, mut t) =
        (zeros.clone(), zeros.clone(), zeros.clone(), zeros.clone(), zeros);
    let (mut rho, mut alpha, mut omega) = (S::one(), S::one(), S::one());
    let mut norm = norm0;
    let mut converged = false;
    let mut breakdown = false;
    let mut iterations = 0;
    for k in 1..=ctl.maxit {
        let rho_next = rt.dot(&r);
        if rho_next.min_abs() == 0.0 {
            breakdown = true;
            break;
        }
        if k == 1 {
            p.copy_from(&r);
        } else {
            if omega.min_abs() == 0.0 {
                breakdown = true;
                break;
            }
            let beta = (rho_next / rho) * (alpha / omega);
            // p = r + beta (p - omega v)
            p.axpy(-omega, &v);
            p.scale_add(beta, &r);
        }
        rho = rho_next;
        pre.apply(&mut y, &p);
        op.apply(&y, &mut v);
        let denom = rt.dot(&v);
        if denom.min_abs() == 0.0 {
            breakdown = true;
            break;
        }
        alpha = rho / denom;
        r.axpy(-alpha, &v); // r is now the intermediate residual s
        pre.apply(&mut z, &r);
        op.apply(&z, &mut t);
        let tt = t.dot(&t);
        if tt.min_abs() == 0.0 {
            // s (and thus t) vanished: take the half step and re-examine
            x.axpy(alpha, &y);
            iterations = k;
            norm = recompute_defect(op, &bw, x, &mut r);
            converged = run.reached(norm);
            breakdown = !converged;
            break;
        }
        omega = t.dot(&r) / tt;
        x.axpy(alpha, &y);
        x.axpy(omega, &z);
        r.axpy(-omega, &t);
        norm = r.two_norm();
        iterations = k;
        run.log(k, norm);
        if run.reached(norm) {
            norm = recompute_defect(op, &bw, x, &mut r);
            if run.reached(norm) {
                converged = true;
                break;
            }
        }
    }
    pre.post(x);
    run.result(converged, iterations, norm, breakdown)
}

/// Restarted GMRes with modified Gram–Schmidt orthogonalization and Givens
/// rotations, preconditioned from the left.
///
/// Because the preconditioner is applied on the left, all defect norms this
/// solver tracks and reports are *preconditioned* norms; the result records
/// the side so downstream code can interpret the numbers. A vanishing
/// continuation norm ends the Arnoldi process for the cycle (happy
/// breakdown) and is resolved by the true-defect recheck rather than
/// reported as failure.
pub fn solve_gmres<S: Field>(
    op: &dyn LinearOperator<S>,
    pre: &dyn Preconditioner<S>,
    b: &BlockVector<S>,
    x: &mut BlockVector<S>,
    restart: usize,
    ctl: &IterControl,
) -> SolverResult {
    ctl.validate();
    assert!(restart >= 1, "restart length must be at least 1");
    check_shapes(op, b, x);
    let mut bw = b.clone();
    pre.pre(x, &mut bw);

    let zeros = BlockVector::<S>::zeros(bw.n_blocks(), bw.block_size());
    let mut work = bw.clone(); // unpreconditioned defect
    op.usmv(-S::one(), x, &mut work);
    let mut v0 = zeros.clone();
    pre.apply(&mut v0, &work);
    let norm0 = v0.two_norm();
    let run = Run::<S>::new(norm0, ctl);
    if run.defect0_max == 0.0 {
        pre.post(x);
        return run.result(true, 0, norm0, false);
    }

    let mut norm = norm0;
    let mut converged = false;
    let mut breakdown = false;
    let mut iterations = 0;
    'outer: while iterations < ctl.maxit && !breakdown {
        // start a cycle from the true preconditioned defect
        work.copy_from(&bw);
        op.usmv(-S::one(), x, &mut work);
        let mut v_first = zeros.clone();
        pre.apply(&mut v_first, &work);
        let beta = v_first.two_norm();
        norm = beta;
        if run.reached(beta) {
            // this is a freshly recomputed defect, so it already is the
            // honest convergence certificate
            converged = true;
            break 'outer;
        }
        v_first.scale(S::one() / S::from_real(beta));
        let mut basis: Vec<BlockVector<S>> = vec![v_first];
        let mut h: Vec<Vec<S>> = Vec::new(); // h[j]: column j, rows 0..=j+1
        let mut giv_c: Vec<S> = Vec::new();
        let mut giv_s: Vec<S> = Vec::new();
        let mut g: Vec<S> = vec![S::from_real(beta)];
        let mut cols = 0;

        while cols < restart && iterations < ctl.maxit {
            op.apply(&basis[cols], &mut work);
            let mut w = zeros.clone();
            pre.apply(&mut w, &work);
            let mut col: Vec<S> = Vec::with_capacity(cols + 2);
            for vi in basis.iter() {
                let hij = vi.dot(&w);
                w.axpy(-hij, vi);
                col.push(hij);
            }
            let wnorm = w.two_norm();
            col.push(S::from_real(wnorm));
            let happy = wnorm.min_lane() == 0.0;
            if !happy {
                w.scale(S::one() / S::from_real(wnorm));
                basis.push(w);
            }
            iterations += 1;

            // previously accumulated rotations
            for i in 0..cols {
                let (a1, a2) = (col[i], col[i + 1]);
                col[i] = giv_c[i] * a1 + giv_s[i] * a2;
                col[i + 1] = -giv_s[i].conj() * a1 + giv_c[i].conj() * a2;
            }
            // new rotation eliminating the subdiagonal entry
            let nu = (col[cols].abs_sq() + col[cols + 1].abs_sq()).sqrt();
            if nu.min_lane() == 0.0 {
                breakdown = true;
                break;
            }
            let nu_f = S::from_real(nu);
            let ci = col[cols].conj() / nu_f;
            let si = col[cols + 1].conj() / nu_f;
            col[cols] = S::from_real(nu);
            col[cols + 1] = S::zero();
            g.push(-(si.conj()) * g[cols]);
            g[cols] = ci * g[cols];
            giv_c.push(ci);
            giv_s.push(si);
            h.push(col);
            cols += 1;

            norm = g[cols].abs_sq().sqrt();
            run.log(iterations, norm);
            if run.reached(norm) || happy {
                break;
            }
        }

        // least squares solution: back substitution in the triangular H
        if cols > 0 {
            let mut y = vec![S::zero(); cols];
            for i in (0..cols).rev() {
                let mut acc = g[i];
                for j in i + 1..cols {
                    acc -= h[j][i] * y[j];
                }
                let hii = h[i][i];
                if hii.min_abs() == 0.0 {
                    breakdown = true;
                    break;
                }
                acc /= hii;
                y[i] = acc;
            }
            if !breakdown {
                for (yj, vj) in y.iter().zip(basis.iter()) {
                    x.axpy(*yj, vj);
                }
            }
        }

        // honest recheck on the true preconditioned defect
        work.copy_from(&bw);
        op.usmv(-S::one(), x, &mut work);
        let mut td = zeros.clone();
        pre.apply(&mut td, &work);
        norm = td.two_norm();
        if run.reached(norm) {
            converged = true;
            break 'outer;
        }
    }
    pre.post(x);
    run.result(converged, iterations, norm, breakdown)
}
