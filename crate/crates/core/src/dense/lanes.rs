//! SIMD-style lane scalars.
//!
//! [`Lanes<L>`] packs `L` independent `f64` values that move through every
//! arithmetic expression in lock-step: `a + b` adds lane 0 to lane 0, lane 1
//! to lane 1, and so on. Branches are replaced by [`cond`], which blends two
//! values under a [`LaneMask`]. The net effect is that any straight-line
//! scalar algorithm, run once on `Lanes<L>` data, performs `L` independent
//! scalar runs of itself.

use std::ops::{Add, AddAssign, Div, DivAssign, Index, IndexMut, Mul, MulAssign, Neg, Sub, SubAssign};

use super::field::{Field, Mask, RealField};

/// `L` real values computed in lock-step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lanes<const L: usize>(pub [f64; L]);

/// One boolean per lane, produced by lane-wise comparisons.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LaneMask<const L: usize>(pub [bool; L]);

impl<const L: usize> Lanes<L> {
    /// Broadcast: every lane gets `v`.
    pub fn splat(v: f64) -> Self {
        Lanes([v; L])
    }

    pub fn from_array(a: [f64; L]) -> Self {
        Lanes(a)
    }

    pub fn as_array(&self) -> &[f64; L] {
        &self.0
    }

    fn map(self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.0;
        for v in &mut out {
            *v = f(*v);
        }
        Lanes(out)
    }

    fn zip(self, rhs: Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = self.0;
        for (v, w) in out.iter_mut().zip(rhs.0.iter()) {
            *v = f(*v, *w);
        }
        Lanes(out)
    }
}

impl<const L: usize> Index<usize> for Lanes<L> {
    type Output = f64;
    fn index(&self, l: usize) -> &f64 {
        &self.0[l]
    }
}

impl<const L: usize> IndexMut<usize> for Lanes<L> {
    fn index_mut(&mut self, l: usize) -> &mut f64 {
        &mut self.0[l]
    }
}

impl<const L: usize> Add for Lanes<L> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.zip(rhs, |a, b| a + b)
    }
}

impl<const L: usize> Sub for Lanes<L> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.zip(rhs, |a, b| a - b)
    }
}

impl<const L: usize> Mul for Lanes<L> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.zip(rhs, |a, b| a * b)
    }
}

impl<const L: usize> Div for Lanes<L> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self.zip(rhs, |a, b| a / b)
    }
}

impl<const L: usize> Neg for Lanes<L> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|a| -a)
    }
}

impl<const L: usize> AddAssign for Lanes<L> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<const L: usize> SubAssign for Lanes<L> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<const L: usize> MulAssign for Lanes<L> {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<const L: usize> DivAssign for Lanes<L> {
    fn div_assign(&mut self, rhs: Self) {
        *self = *self / rhs;
    }
}

impl<const L: usize> Mask for LaneMask<L> {
    fn all_true(&self) -> bool {
        self.0.iter().all(|&b| b)
    }
    fn any_true(&self) -> bool {
        self.0.iter().any(|&b| b)
    }
}

impl<const L: usize> Field for Lanes<L> {
    type Real = Self;

    fn zero() -> Self {
        Lanes::splat(0.0)
    }
    fn one() -> Self {
        Lanes::splat(1.0)
    }
    fn from_f64(v: f64) -> Self {
        Lanes::splat(v)
    }
    fn from_real(r: Self) -> Self {
        r
    }
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> Self {
        self
    }
    fn abs_sq(self) -> Self {
        self * self
    }
    fn min_abs(self) -> f64 {
        self.0.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()))
    }
    fn max_abs(self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl<const L: usize> RealField for Lanes<L> {
    type Mask = LaneMask<L>;

    fn sqrt(self) -> Self {
        self.map(f64::sqrt)
    }
    fn abs(self) -> Self {
        self.map(f64::abs)
    }
    fn le(self, rhs: Self) -> LaneMask<L> {
        let mut m = [false; L];
        for (i, b) in m.iter_mut().enumerate() {
            *b = self.0[i] <= rhs.0[i];
        }
        LaneMask(m)
    }
    fn lt(self, rhs: Self) -> LaneMask<L> {
        let mut m = [false; L];
        for (i, b) in m.iter_mut().enumerate() {
            *b = self.0[i] < rhs.0[i];
        }
        LaneMask(m)
    }
    fn select(mask: LaneMask<L>, a: Self, b: Self) -> Self {
        let mut out = [0.0; L];
        for (i, v) in out.iter_mut().enumerate() {
            *v = if mask.0[i] { a.0[i] } else { b.0[i] };
        }
        Lanes(out)
    }
    fn lane_count() -> usize {
        L
    }
    fn lane(self, l: usize) -> f64 {
        self.0[l]
    }
    fn set_lane(&mut self, l: usize, v: f64) {
        self.0[l] = v;
    }
}

/// Lane-wise blend: picks `a` in lanes where the mask is true, `b` elsewhere.
pub fn cond<R: RealField>(mask: R::Mask, a: R, b: R) -> R {
    R::select(mask, a, b)
}

/// True when every lane of the mask is true.
pub fn all_true<M: Mask>(mask: M) -> bool {
    mask.all_true()
}

/// True when at least one lane of the mask is true.
pub fn any_true<M: Mask>(mask: M) -> bool {
    mask.any_true()
}
