use std::ops::{Index, IndexMut};

use super::field::{Field, RealField};
use super::DenseError;

/// Small dense vector with run-time length.
///
/// Used for local degree-of-freedom vectors, quadrature work arrays and as
/// the per-block currency of the sparse algebra. The length is fixed at
/// construction; all binary operations require matching lengths.
#[derive(Clone, Debug, PartialEq)]
pub struct SmallVector<S> {
    data: Vec<S>,
}

impl<S: Field> SmallVector<S> {
    pub fn zeros(n: usize) -> Self {
        SmallVector { data: vec![S::zero(); n] }
    }

    pub fn from_slice(v: &[S]) -> Self {
        SmallVector { data: v.to_vec() }
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> S) -> Self {
        SmallVector { data: (0..n).map(f).collect() }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, S> {
        self.data.iter()
    }

    pub fn set_zero(&mut self) {
        for v in &mut self.data {
            *v = S::zero();
        }
    }

    /// `self += alpha * x`.
    pub fn axpy(&mut self, alpha: S, x: &SmallVector<S>) {
        assert_eq!(self.len(), x.len(), "axpy: length mismatch");
        for (v, w) in self.data.iter_mut().zip(x.data.iter()) {
            *v += alpha * *w;
        }
    }

    pub fn scale(&mut self, s: S) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn scaled(&self, s: S) -> Self {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    pub fn add(&self, rhs: &SmallVector<S>) -> Self {
        assert_eq!(self.len(), rhs.len());
        SmallVector::from_fn(self.len(), |i| self.data[i] + rhs.data[i])
    }

    pub fn sub(&self, rhs: &SmallVector<S>) -> Self {
        assert_eq!(self.len(), rhs.len());
        SmallVector::from_fn(self.len(), |i| self.data[i] - rhs.data[i])
    }

    /// Scalar product; the first argument is conjugated, so
    /// `dot(x, x) = |x|^2` also holds for complex scalars.
    pub fn dot(&self, rhs: &SmallVector<S>) -> S {
        assert_eq!(self.len(), rhs.len(), "dot: length mismatch");
        let mut s = S::zero();
        for (v, w) in self.data.iter().zip(rhs.data.iter()) {
            s += v.conj() * *w;
        }
        s
    }

    /// Euclidean norm as a real scalar (lane-wise for lane types).
    pub fn two_norm(&self) -> S::Real {
        let mut s = <S::Real as Field>::zero();
        for v in &self.data {
            s += v.abs_sq();
        }
        s.sqrt()
    }

    /// Largest modulus of any entry, reduced over lanes.
    pub fn inf_norm(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.max_abs()))
    }
}

impl<S> Index<usize> for SmallVector<S> {
    type Output = S;
    fn index(&self, i: usize) -> &S {
        &self.data[i]
    }
}

impl<S> IndexMut<usize> for SmallVector<S> {
    fn index_mut(&mut self, i: usize) -> &mut S {
        &mut self.data[i]
    }
}

/// Small dense row-major matrix with run-time shape.
#[derive(Clone, Debug, PartialEq)]
pub struct SmallMatrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Field> SmallMatrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SmallMatrix { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        SmallMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[&[S]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transposed(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// `y = A x`.
    pub fn mv(&self, x: &SmallVector<S>) -> SmallVector<S> {
        assert_eq!(x.len(), self.cols, "mv: shape mismatch");
        SmallVector::from_fn(self.rows, |i| {
            let mut s = S::zero();
            for j in 0..self.cols {
                s += self[(i, j)] * x[j];
            }
            s
        })
    }

    /// `y += alpha * A x` — fused update used throughout the solvers.
    pub fn usmv(&self, alpha: S, x: &SmallVector<S>, y: &mut SmallVector<S>) {
        assert_eq!(x.len(), self.cols, "usmv: shape mismatch");
        assert_eq!(y.len(), self.rows, "usmv: shape mismatch");
        for i in 0..self.rows {
            let mut s = S::zero();
            for j in 0..self.cols {
                s += self[(i, j)] * x[j];
            }
            y[i] += alpha * s;
        }
    }

    pub fn matmul(&self, rhs: &SmallMatrix<S>) -> SmallMatrix<S> {
        assert_eq!(self.cols, rhs.rows, "matmul: shape mismatch");
        SmallMatrix::from_fn(self.rows, rhs.cols, |i, j| {
            let mut s = S::zero();
            for k in 0..self.cols {
                s += self[(i, k)] * rhs[(k, j)];
            }
            s
        })
    }

    /// Inverse of a small square matrix.
    ///
    /// Sizes up to 3 use exact cofactor formulas; larger sizes run an
    /// unpivoted Gauss–Jordan sweep, which keeps the routine valid for lane
    /// scalars (pivot choice may not branch on data). A pivot that vanishes
    /// in any lane reports [`DenseError::Singular`].
    pub fn inverse(&self) -> Result<SmallMatrix<S>, DenseError> {
        assert_eq!(self.rows, self.cols, "inverse: matrix not square");
        let n = self.rows;
        let ok = |v: S| v.min_abs() > 0.0 && v.min_abs().is_finite();
        match n {
            0 => Ok(self.clone()),
            1 => {
                let a = self[(0, 0)];
                if !ok(a) {
                    return Err(DenseError::Singular);
                }
                Ok(SmallMatrix::from_fn(1, 1, |_, _| S::one() / a))
            }
            2 => {
                let det = self[(0, 0)] * self[(1, 1)] - self[(0, 1)] * self[(1, 0)];
                if !ok(det) {
                    return Err(DenseError::Singular);
                }
                let inv = S::one() / det;
                Ok(SmallMatrix::from_rows(&[
                    &[self[(1, 1)] * inv, -self[(0, 1)] * inv],
                    &[-self[(1, 0)] * inv, self[(0, 0)] * inv],
                ]))
            }
            3 => {
                let m = |i: usize, j: usize| self[(i, j)];
                let c00 = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
                let c01 = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
                let c02 = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
                let det = m(0, 0) * c00 + m(0, 1) * c01 + m(0, 2) * c02;
                if !ok(det) {
                    return Err(DenseError::Singular);
                }
                let inv = S::one() / det;
                let adj = [
                    [c00, m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2), m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1)],
                    [c01, m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0), m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2)],
                    [c02, m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1), m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)],
                ];
                Ok(SmallMatrix::from_fn(3, 3, |i, j| adj[i][j] * inv))
            }
            _ => {
                let mut a = self.clone();
                let mut out = SmallMatrix::identity(n);
                for k in 0..n {
                    let piv = a[(k, k)];
                    if !ok(piv) {
                        return Err(DenseError::Singular);
                    }
                    let inv = S::one() / piv;
                    for j in 0..n {
                        a[(k, j)] *= inv;
                        out[(k, j)] *= inv;
                    }
                    for i in 0..n {
                        if i == k {
                            continue;
                        }
                        let f = a[(i, k)];
                        for j in 0..n {
                            let akj = a[(k, j)];
                            let okj = out[(k, j)];
                            a[(i, j)] -= f * akj;
                            out[(i, j)] -= f * okj;
                        }
                    }
                }
                Ok(out)
            }
        }
    }
}

impl SmallMatrix<f64> {
    /// Determinant via partial-pivoting LU; exact sign tracking.
    pub fn det(&self) -> f64 {
        assert_eq!(self.rows, self.cols, "det: matrix not square");
        let n = self.rows;
        let mut lu = self.data.clone();
        let mut det = 1.0;
        for k in 0..n {
            let mut piv = k;
            let mut best = lu[k * n + k].abs();
            for i in k + 1..n {
                let v = lu[i * n + k].abs();
                if v > best {
                    piv = i;
                    best = v;
                }
            }
            if best == 0.0 {
                return 0.0;
            }
            if piv != k {
                for j in 0..n {
                    lu.swap(k * n + j, piv * n + j);
                }
                det = -det;
            }
            let d = lu[k * n + k];
            det *= d;
            for i in k + 1..n {
                let f = lu[i * n + k] / d;
                for j in k + 1..n {
                    lu[i * n + j] -= f * lu[k * n + j];
                }
            }
        }
        det
    }

    /// Solves `A x = b` with partial pivoting. Errors on singular systems.
    pub fn solve(&self, b: &SmallVector<f64>) -> Result<SmallVector<f64>, DenseError> {
        assert_eq!(self.rows, self.cols, "solve: matrix not square");
        assert_eq!(b.len(), self.rows, "solve: shape mismatch");
        let n = self.rows;
        let mut lu = self.data.clone();
        let mut x: Vec<f64> = b.as_slice().to_vec();
        for k in 0..n {
            let mut piv = k;
            let mut best = lu[k * n + k].abs();
            for i in k + 1..n {
                let v = lu[i * n + k].abs();
                if v > best {
                    piv = i;
                    best = v;
                }
            }
            if !(best > 0.0) || !best.is_finite() {
                return Err(DenseError::Singular);
            }
            if piv != k {
                for j in 0..n {
                    lu.swap(k * n + j, piv * n + j);
                }
                x.swap(k, piv);
            }
            let d = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / d;
                lu[i * n + k] = f;
                for j in k + 1..n {
                    lu[i * n + j] -= f * lu[k * n + j];
                }
                x[i] -= f * x[k];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= lu[i * n + j] * x[j];
            }
            x[i] /= lu[i * n + i];
        }
        Ok(SmallVector::from_slice(&x))
    }
}

impl<S> Index<(usize, usize)> for SmallMatrix<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for SmallMatrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}
