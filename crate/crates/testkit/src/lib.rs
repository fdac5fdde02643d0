//! Shared oracles for the workspace test suites.
//!
//! Everything here is deliberately independent of the main library: the dense
//! direct solver is a plain partial-pivoting LU on `Vec<f64>` storage, written
//! once and frozen, so that iterative solvers and assembly routines can be
//! checked against an implementation that shares no code with them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic RNG for property-style tests. Same seed, same stream.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dense row-major matrix for oracle computations.
#[derive(Clone, Debug)]
pub struct DenseMat {
    pub n: usize,
    pub m: usize,
    pub a: Vec<f64>,
}

impl DenseMat {
    pub fn zeros(n: usize, m: usize) -> Self {
        DenseMat { n, m, a: vec![0.0; n * m] }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.m + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.a[i * self.m + j]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.m);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let mut s = 0.0;
            for j in 0..self.m {
                s += self.at(i, j) * x[j];
            }
            y[i] = s;
        }
        y
    }
}

/// Solves `a x = b` by LU factorization with partial pivoting.
///
/// Panics if the matrix is not square or numerically singular; oracles are
/// supposed to be used on well-posed systems only.
pub fn lu_solve(a: &DenseMat, b: &[f64]) -> Vec<f64> {
    assert_eq!(a.n, a.m, "lu_solve needs a square matrix");
    assert_eq!(b.len(), a.n);
    let n = a.n;
    let mut lu = a.a.clone();
    let mut perm: Vec<usize> = (0..n).collect();

    for k in 0..n {
        let mut piv = k;
        let mut piv_val = lu[k * n + k].abs();
        for i in k + 1..n {
            let v = lu[i * n + k].abs();
            if v > piv_val {
                piv = i;
                piv_val = v;
            }
        }
        assert!(piv_val > 0.0, "lu_solve: singular matrix at column {k}");
        if piv != k {
            for j in 0..n {
                lu.swap(k * n + j, piv * n + j);
            }
            perm.swap(k, piv);
        }
        let d = lu[k * n + k];
        for i in k + 1..n {
            let f = lu[i * n + k] / d;
            lu[i * n + k] = f;
            for j in k + 1..n {
                lu[i * n + j] -= f * lu[k * n + j];
            }
        }
    }

    // Forward substitution on the permuted right-hand side, then back
    // substitution.
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[perm[i]];
        for j in 0..i {
            s -= lu[i * n + j] * y[j];
        }
        y[i] = s;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for j in i + 1..n {
            s -= lu[i * n + j] * x[j];
        }
        x[i] = s / lu[i * n + i];
    }
    x
}

/// Observed convergence order between two consecutive errors under uniform
/// refinement with factor 2: `log2(coarse / fine)`.
pub fn observed_order(err_coarse: f64, err_fine: f64) -> f64 {
    (err_coarse / err_fine).log2()
}

/// Relative max-norm distance between two vectors, scaled by the max-norm of
/// the reference.
pub fn rel_inf_dist(x: &[f64], reference: &[f64]) -> f64 {
    assert_eq!(x.len(), reference.len());
    let scale = reference
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    x.iter()
        .zip(reference)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
        / scale
}
