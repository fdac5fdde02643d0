use std::ops::{Add, Index, IndexMut, Mul, Sub};

/// Largest coordinate dimension supported anywhere in the crate.
pub const MAX_DIM: usize = 4;

/// Coordinate vector with run-time dimension and fixed capacity.
///
/// `Point` is `Copy`, so geometry code passes coordinates around freely
/// without allocation. Unused trailing components are kept at zero.
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    len: u8,
    data: [f64; MAX_DIM],
}

impl Point {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds capacity {MAX_DIM}");
        Point { len: dim as u8, data: [0.0; MAX_DIM] }
    }

    pub fn splat(dim: usize, v: f64) -> Self {
        let mut p = Self::zeros(dim);
        for i in 0..dim {
            p.data[i] = v;
        }
        p
    }

    pub fn from_slice(v: &[f64]) -> Self {
        let mut p = Self::zeros(v.len());
        p.data[..v.len()].copy_from_slice(v);
        p
    }

    pub fn dim(&self) -> usize {
        self.len as usize
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data[..self.len as usize]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.as_slice().iter()
    }

    pub fn dot(&self, rhs: &Point) -> f64 {
        assert_eq!(self.len, rhs.len);
        self.as_slice().iter().zip(rhs.as_slice()).map(|(a, b)| a * b).sum()
    }

    pub fn two_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn inf_norm(&self) -> f64 {
        self.as_slice().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn dist(&self, rhs: &Point) -> f64 {
        (*self - *rhs).two_norm()
    }

    /// `self += alpha * rhs`.
    pub fn axpy(&mut self, alpha: f64, rhs: &Point) {
        assert_eq!(self.len, rhs.len);
        for i in 0..self.dim() {
            self.data[i] += alpha * rhs.data[i];
        }
    }
}

impl Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        debug_assert!(i < self.len as usize);
        &self.data[i]
    }
}

impl IndexMut<usize> for Point {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        debug_assert!(i < self.len as usize);
        &mut self.data[i]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(mut self, rhs: Point) -> Point {
        assert_eq!(self.len, rhs.len);
        for i in 0..self.dim() {
            self.data[i] += rhs.data[i];
        }
        self
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(mut self, rhs: Point) -> Point {
        assert_eq!(self.len, rhs.len);
        for i in 0..self.dim() {
            self.data[i] -= rhs.data[i];
        }
        self
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(mut self, s: f64) -> Point {
        for i in 0..self.dim() {
            self.data[i] *= s;
        }
        self
    }
}

impl std::fmt::Debug for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}
