use crate::dense::{SmallMatrix, SmallVector};

use super::{quadrature_rule, GeometryError, GeometryType, Point};

const NEWTON_MAX_ITER: usize = 50;
const NEWTON_TOL: f64 = 1e-13;

/// Transformation from the reference cube into world space.
///
/// Two kinds are distinguished: axis-aligned boxes (the common case for
/// structured grid elements, with exact volume and trivially invertible
/// coordinates) and general multilinear interpolants of `2^d` corner
/// positions, which also cover lower-dimensional faces embedded in a higher
/// dimensional world.
#[derive(Clone, Debug)]
pub struct GeometryMap {
    mydim: usize,
    wdim: usize,
    kind: MapKind,
}

#[derive(Clone, Debug)]
enum MapKind {
    AxisBox { lower: Point, upper: Point },
    Multilinear { corners: Vec<Point> },
}

impl GeometryMap {
    /// Axis-aligned box between two opposite corners.
    pub fn axis_box(lower: Point, upper: Point) -> Self {
        assert_eq!(lower.dim(), upper.dim());
        for a in 0..lower.dim() {
            assert!(upper[a] > lower[a], "degenerate box extent along axis {a}");
        }
        GeometryMap { mydim: lower.dim(), wdim: lower.dim(), kind: MapKind::AxisBox { lower, upper } }
    }

    /// Multilinear interpolant of `2^mydim` corners in binary counting order.
    pub fn multilinear(mydim: usize, corners: Vec<Point>) -> Self {
        assert_eq!(corners.len(), 1 << mydim, "multilinear map needs 2^d corners");
        let wdim = corners[0].dim();
        assert!(corners.iter().all(|c| c.dim() == wdim));
        assert!(mydim <= wdim, "reference dimension exceeds world dimension");
        GeometryMap { mydim, wdim, kind: MapKind::Multilinear { corners } }
    }

    /// Dimension of the reference domain.
    pub fn my_dimension(&self) -> usize {
        self.mydim
    }

    /// Dimension of the world range.
    pub fn world_dimension(&self) -> usize {
        self.wdim
    }

    pub fn geometry_type(&self) -> GeometryType {
        GeometryType::cube(self.mydim)
    }

    pub fn num_corners(&self) -> usize {
        1 << self.mydim
    }

    pub fn corner(&self, k: usize) -> Point {
        assert!(k < self.num_corners());
        match &self.kind {
            MapKind::AxisBox { lower, upper } => {
                let mut p = *lower;
                for a in 0..self.mydim {
                    if k >> a & 1 == 1 {
                        p[a] = upper[a];
                    }
                }
                p
            }
            MapKind::Multilinear { corners } => corners[k],
        }
    }

    /// Maps reference coordinates to world coordinates.
    pub fn global(&self, xhat: &Point) -> Point {
        debug_assert_eq!(xhat.dim(), self.mydim);
        match &self.kind {
            MapKind::AxisBox { lower, upper } => {
                let mut p = *lower;
                for a in 0..self.mydim {
                    p[a] += xhat[a] * (upper[a] - lower[a]);
                }
                p
            }
            MapKind::Multilinear { corners } => {
                let mut p = Point::zeros(self.wdim);
                for (k, c) in corners.iter().enumerate() {
                    let mut w = 1.0;
                    for a in 0..self.mydim {
                        w *= if k >> a & 1 == 1 { xhat[a] } else { 1.0 - xhat[a] };
                    }
                    p.axpy(w, c);
                }
                p
            }
        }
    }

    /// Inverts the map. Axis boxes invert exactly; multilinear maps run a
    /// Newton iteration (least squares for embedded faces) and report
    /// divergence after 50 steps.
    pub fn local(&self, x: &Point) -> Result<Point, GeometryError> {
        debug_assert_eq!(x.dim(), self.wdim);
        match &self.kind {
            MapKind::AxisBox { lower, upper } => {
                let mut p = Point::zeros(self.mydim);
                for a in 0..self.mydim {
                    p[a] = (x[a] - lower[a]) / (upper[a] - lower[a]);
                }
                Ok(p)
            }
            MapKind::Multilinear { .. } => {
                let mut xhat = Point::splat(self.mydim, 0.5);
                for _ in 0..NEWTON_MAX_ITER {
                    let r = *x - self.global(&xhat);
                    let j = self.jacobian(&xhat);
                    let rhs = SmallVector::from_slice(r.as_slice());
                    let delta = if self.mydim == self.wdim {
                        j.solve(&rhs)
                    } else {
                        // least squares step through the normal equations
                        let jt = j.transposed();
                        jt.matmul(&j).solve(&jt.mv(&rhs))
                    }
                    .map_err(|_| GeometryError::SingularJacobian)?;
                    let mut step = 0.0_f64;
                    for a in 0..self.mydim {
                        xhat[a] += delta[a];
                        step = step.max(delta[a].abs());
                    }
                    if step <= NEWTON_TOL {
                        return Ok(xhat);
                    }
                }
                Err(GeometryError::InversionDiverged(NEWTON_MAX_ITER))
            }
        }
    }

    /// Jacobian of the map at `xhat`, shaped world-dim x my-dim.
    pub fn jacobian(&self, xhat: &Point) -> SmallMatrix<f64> {
        debug_assert_eq!(xhat.dim(), self.mydim);
        match &self.kind {
            MapKind::AxisBox { lower, upper } => {
                SmallMatrix::from_fn(self.wdim, self.mydim, |i, j| {
                    if i == j {
                        upper[i] - lower[i]
                    } else {
                        0.0
                    }
                })
            }
            MapKind::Multilinear { corners } => {
                let mut out = SmallMatrix::zeros(self.wdim, self.mydim);
                for (k, c) in corners.iter().enumerate() {
                    for j in 0..self.mydim {
                        let mut w = if k >> j & 1 == 1 { 1.0 } else { -1.0 };
                        for a in 0..self.mydim {
                            if a == j {
                                continue;
                            }
                            w *= if k >> a & 1 == 1 { xhat[a] } else { 1.0 - xhat[a] };
                        }
                        for i in 0..self.wdim {
                            out[(i, j)] += w * c[i];
                        }
                    }
                }
                out
            }
        }
    }

    /// Integration element `sqrt(det(J^T J))` at `xhat`; `|det J|` for equal
    /// dimensions, 1 for vertices.
    pub fn integration_element(&self, xhat: &Point) -> f64 {
        if self.mydim == 0 {
            return 1.0;
        }
        match &self.kind {
            MapKind::AxisBox { lower, upper } => {
                (0..self.mydim).map(|a| upper[a] - lower[a]).product()
            }
            MapKind::Multilinear { .. } => {
                let j = self.jacobian(xhat);
                let ie = if self.mydim == self.wdim {
                    j.det().abs()
                } else {
                    let jt = j.transposed();
                    jt.matmul(&j).det().sqrt()
                };
                assert!(ie.is_finite() && ie > 0.0, "singular Jacobian in integration element");
                ie
            }
        }
    }

    /// Measure of the image. Boxes are exact products; multilinear maps
    /// integrate the integration element with a quadrature rule that is exact
    /// for the polynomial determinant of non-degenerate multilinear maps.
    pub fn volume(&self) -> f64 {
        if self.mydim == 0 {
            return 1.0;
        }
        match &self.kind {
            MapKind::AxisBox { lower, upper } => {
                (0..self.mydim).map(|a| upper[a] - lower[a]).product()
            }
            MapKind::Multilinear { .. } => {
                let rule = quadrature_rule(GeometryType::cube(self.mydim), 2 * self.mydim)
                    .expect("low-order volume rule always exists");
                rule.points()
                    .iter()
                    .map(|qp| qp.weight * self.integration_element(&qp.position))
                    .sum()
            }
        }
    }

    /// Image of the reference barycenter.
    pub fn center(&self) -> Point {
        self.global(&Point::splat(self.mydim, 0.5))
    }
}
