//! Local finite elements on the reference cube.
//!
//! A local element is the triple of a shape function set, an attribution of
//! each shape function to a reference-element sub-entity (so a global basis
//! can identify degrees of freedom shared between neighbouring cells), and a
//! nodal interpolation rule. The family implemented here are the tensor
//! Lagrange elements of order 1 and 2 (and any higher order, should it be
//! needed) on cubes of dimension one to three.
//!
//! Shape functions are numbered lexicographically over the node lattice
//! `{0, 1/k, …, 1}^d` with axis 0 running fastest — the same convention the
//! reference cube uses for its corners, which for order 1 makes shape
//! function `i` the nodal function of corner `i`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::geometry::{reference_cube, GeometryType, Point};

/// Attribution of a local degree of freedom to a sub-entity of the
/// reference cube: shape function `i` lives on sub-entity `sub_entity` of
/// codimension `codim`, and is the `index`-th of the functions attributed
/// to that sub-entity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LocalKey {
    pub codim: u8,
    pub sub_entity: u32,
    pub index: u32,
}

/// Tensor Lagrange element of arbitrary order on the reference cube.
pub struct CubeLagrange {
    dim: usize,
    order: usize,
    nodes: Vec<Point>,
    keys: Vec<LocalKey>,
}

/// Value of the 1D Lagrange polynomial through the equidistant nodes
/// `{0, 1/k, …, 1}` that is one at node `i`.
fn lagrange_1d(k: usize, i: usize, t: f64) -> f64 {
    let ti = i as f64 / k as f64;
    let mut p = 1.0;
    for j in 0..=k {
        if j != i {
            let tj = j as f64 / k as f64;
            p *= (t - tj) / (ti - tj);
        }
    }
    p
}

fn lagrange_1d_deriv(k: usize, i: usize, t: f64) -> f64 {
    let ti = i as f64 / k as f64;
    let mut sum = 0.0;
    for m in 0..=k {
        if m == i {
            continue;
        }
        let tm = m as f64 / k as f64;
        let mut p = 1.0 / (ti - tm);
        for j in 0..=k {
            if j != i && j != m {
                let tj = j as f64 / k as f64;
                p *= (t - tj) / (ti - tj);
            }
        }
        sum += p;
    }
    sum
}

impl CubeLagrange {
    pub fn new(dim: usize, order: usize) -> Self {
        assert!((1..=3).contains(&dim), "cube Lagrange elements cover dimensions 1 to 3");
        assert!(order >= 1, "order must be at least 1");
        let k = order;
        let n_per_axis = k + 1;
        let size = n_per_axis.pow(dim as u32);
        let refel = reference_cube(dim);

        let mut nodes = Vec::with_capacity(size);
        let mut keys = Vec::with_capacity(size);
        let mut alpha = vec![0usize; dim];
        for _ in 0..size {
            let mut node = Point::zeros(dim);
            for (a, &ai) in alpha.iter().enumerate() {
                node[a] = ai as f64 / k as f64;
            }
            nodes.push(node);

            // pinned axes are those whose lattice coordinate sits on the
            // boundary; the remaining interior coordinates rank the dof
            // among all dofs of the same sub-entity
            let mut fixed_mask = 0u8;
            let mut sides = 0u8;
            let mut pinned = 0u32;
            let mut interior_rank = 0u32;
            let mut stride = 1u32;
            for (a, &ai) in alpha.iter().enumerate() {
                if ai == 0 || ai == k {
                    fixed_mask |= 1 << a;
                    if ai == k {
                        sides |= 1 << pinned;
                    }
                    pinned += 1;
                } else {
                    interior_rank += (ai as u32 - 1) * stride;
                    stride *= (k - 1) as u32;
                }
            }
            let codim = pinned as u8;
            let sub = if codim == 0 {
                0
            } else {
                refel.sub_index(crate::geometry::SubEntity { fixed_mask, sides })
            };
            keys.push(LocalKey { codim, sub_entity: sub as u32, index: interior_rank });

            // lexicographic odometer, axis 0 fastest
            for a in 0..dim {
                alpha[a] += 1;
                if alpha[a] <= k {
                    break;
                }
                alpha[a] = 0;
            }
        }
        CubeLagrange { dim, order, nodes, keys }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn geometry_type(&self) -> GeometryType {
        GeometryType::cube(self.dim)
    }

    /// Number of shape functions, `(order + 1)^dim`.
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    /// Interpolation node of shape function `i`.
    pub fn node(&self, i: usize) -> Point {
        self.nodes[i]
    }

    /// Sub-entity attribution of shape function `i`.
    pub fn local_key(&self, i: usize) -> LocalKey {
        self.keys[i]
    }

    /// Lattice coordinate of shape function `i` along `axis`.
    fn lattice(&self, i: usize, axis: usize) -> usize {
        (i / (self.order + 1).pow(axis as u32)) % (self.order + 1)
    }

    /// Evaluates all shape functions at the reference point `x`.
    pub fn evaluate(&self, x: &Point, out: &mut Vec<f64>) {
        debug_assert_eq!(x.dim(), self.dim);
        out.clear();
        out.reserve(self.size());
        for i in 0..self.size() {
            let mut v = 1.0;
            for a in 0..self.dim {
                v *= lagrange_1d(self.order, self.lattice(i, a), x[a]);
            }
            out.push(v);
        }
    }

    /// Evaluates the reference gradients of all shape functions at `x`.
    pub fn jacobian(&self, x: &Point, out: &mut Vec<Point>) {
        debug_assert_eq!(x.dim(), self.dim);
        out.clear();
        out.reserve(self.size());
        for i in 0..self.size() {
            let mut g = Point::zeros(self.dim);
            for a in 0..self.dim {
                let mut v = lagrange_1d_deriv(self.order, self.lattice(i, a), x[a]);
                for b in 0..self.dim {
                    if b != a {
                        v *= lagrange_1d(self.order, self.lattice(i, b), x[b]);
                    }
                }
                g[a] = v;
            }
            out.push(g);
        }
    }

    /// Nodal interpolation: evaluates `f` at the interpolation nodes.
    pub fn interpolate(&self, f: impl Fn(&Point) -> f64) -> Vec<f64> {
        self.nodes.iter().map(f).collect()
    }
}

/// Shared, cached access to the element of the given dimension and order.
pub fn lagrange_element(dim: usize, order: usize) -> Arc<CubeLagrange> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<CubeLagrange>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("element cache poisoned");
    map.entry((dim, order)).or_insert_with(|| Arc::new(CubeLagrange::new(dim, order))).clone()
}
