//! Tensor-product Gauss–Legendre quadrature on reference cubes.
//!
//! A rule of order `p` integrates all polynomials of per-axis degree `<= p`
//! exactly, using `ceil((p+1)/2)` points per axis. Rules are built on first
//! use and cached behind a lock, so concurrent lookups are safe and cheap.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::{GeometryError, GeometryType, Point};

/// Hard cap on the quadrature order; higher requests are an error.
pub const MAX_QUADRATURE_ORDER: usize = 30;

/// Single quadrature point: reference position and weight.
#[derive(Clone, Debug)]
pub struct QuadPoint {
    pub position: Point,
    pub weight: f64,
}

/// Quadrature rule on the reference cube of some dimension.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    dim: usize,
    order: usize,
    points: Vec<QuadPoint>,
}

impl QuadratureRule {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Requested order (every polynomial of this per-axis degree integrates
    /// exactly).
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn points(&self) -> &[QuadPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl<'a> IntoIterator for &'a QuadratureRule {
    type Item = &'a QuadPoint;
    type IntoIter = std::slice::Iter<'a, QuadPoint>;
    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

/// Gauss–Legendre nodes and weights on [0, 1].
fn gauss_legendre_01(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        // Newton iteration on P_n over [-1, 1], standard cosine initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            // n == 1 leaves the recurrence untouched: P_1 = x, P_0 = 1
            let (pn, pn1) = if n == 1 { (x, 1.0) } else { (p1, p0) };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // transform [-1, 1] -> [0, 1]
        out.push(((x + 1.0) / 2.0, w / 2.0));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

fn build_rule(dim: usize, order: usize) -> QuadratureRule {
    if dim == 0 {
        return QuadratureRule {
            dim,
            order,
            points: vec![QuadPoint { position: Point::zeros(0), weight: 1.0 }],
        };
    }
    let n = order / 2 + 1; // = ceil((order + 1) / 2)
    let line = gauss_legendre_01(n);
    let mut points = Vec::with_capacity(line.len().pow(dim as u32));
    let mut digits = vec![0usize; dim];
    loop {
        let mut pos = Point::zeros(dim);
        let mut w = 1.0;
        for a in 0..dim {
            pos[a] = line[digits[a]].0;
            w *= line[digits[a]].1;
        }
        points.push(QuadPoint { position: pos, weight: w });
        // odometer increment, axis 0 fastest
        let mut a = 0;
        loop {
            digits[a] += 1;
            if digits[a] < line.len() {
                break;
            }
            digits[a] = 0;
            a += 1;
            if a == dim {
                return QuadratureRule { dim, order, points };
            }
        }
    }
}

/// Quadrature rule for a cube geometry type, cached per (dimension, order).
///
/// Errors on non-cube topologies and on orders above
/// [`MAX_QUADRATURE_ORDER`].
pub fn quadrature_rule(
    gt: GeometryType,
    order: usize,
) -> Result<Arc<QuadratureRule>, GeometryError> {
    if !gt.is_cube() {
        return Err(GeometryError::UnsupportedTopology(gt));
    }
    if order > MAX_QUADRATURE_ORDER {
        return Err(GeometryError::UnsupportedOrder { order, max: MAX_QUADRATURE_ORDER });
    }
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<QuadratureRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    Ok(guard
        .entry((gt.dim(), order))
        .or_insert_with(|| Arc::new(build_rule(gt.dim(), order)))
        .clone())
}
