use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;

/// Boolean result of a lane-wise comparison.
///
/// For plain scalars this is a single `bool`; for lane types it is one bool
/// per lane. Reductions answer "did every lane pass" / "did any lane pass".
pub trait Mask: Copy + Debug {
    fn all_true(&self) -> bool;
    fn any_true(&self) -> bool;
}

impl Mask for bool {
    fn all_true(&self) -> bool {
        *self
    }
    fn any_true(&self) -> bool {
        *self
    }
}

/// Scalar field of vector and matrix entries.
///
/// The four arithmetic operations, negation and the assigning variants are
/// required; everything else the solvers need (conjugation, squared modulus,
/// lane reductions for breakdown checks) is expressed through the methods
/// below. `Real` is the associated real-valued scalar used for norms — for
/// lane types it keeps the lane width so that convergence can be tracked per
/// lane.
pub trait Field:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
{
    type Real: RealField;

    fn zero() -> Self;
    fn one() -> Self;
    /// Broadcast a real number into this scalar (all lanes for lane types).
    fn from_f64(v: f64) -> Self;
    /// Embed a real scalar of matching lane structure.
    fn from_real(r: Self::Real) -> Self;
    /// Complex conjugate; identity for real scalars.
    fn conj(self) -> Self;
    /// Real part; identity for real scalars.
    fn re(self) -> Self::Real;
    /// `|x|^2` as a real scalar, lane-wise.
    fn abs_sq(self) -> Self::Real;
    /// Smallest modulus over all lanes. Used for breakdown detection: a
    /// quantity is treated as vanishing only when its weakest lane vanishes.
    fn min_abs(self) -> f64;
    /// Largest modulus over all lanes.
    fn max_abs(self) -> f64;
}

/// Real scalars: fields that are their own real part and can be compared
/// lane-wise.
pub trait RealField: Field<Real = Self> {
    type Mask: Mask;

    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    /// Lane-wise `self <= rhs`.
    fn le(self, rhs: Self) -> Self::Mask;
    /// Lane-wise `self < rhs`.
    fn lt(self, rhs: Self) -> Self::Mask;
    /// Lane-wise select: `mask ? a : b`.
    fn select(mask: Self::Mask, a: Self, b: Self) -> Self;
    fn lane_count() -> usize;
    /// Read lane `l` (0 for plain scalars).
    fn lane(self, l: usize) -> f64;
    /// Write lane `l`.
    fn set_lane(&mut self, l: usize, v: f64);
    fn max_lane(self) -> f64 {
        (0..Self::lane_count()).fold(f64::NEG_INFINITY, |m, l| m.max(self.lane(l)))
    }
    fn min_lane(self) -> f64 {
        (0..Self::lane_count()).fold(f64::INFINITY, |m, l| m.min(self.lane(l)))
    }
}

impl Field for f64 {
    type Real = f64;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn from_real(r: f64) -> Self {
        r
    }
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> f64 {
        self
    }
    fn abs_sq(self) -> f64 {
        self * self
    }
    fn min_abs(self) -> f64 {
        self.abs()
    }
    fn max_abs(self) -> f64 {
        self.abs()
    }
}

impl RealField for f64 {
    type Mask = bool;

    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn le(self, rhs: Self) -> bool {
        self <= rhs
    }
    fn lt(self, rhs: Self) -> bool {
        self < rhs
    }
    fn select(mask: bool, a: Self, b: Self) -> Self {
        if mask {
            a
        } else {
            b
        }
    }
    fn lane_count() -> usize {
        1
    }
    fn lane(self, l: usize) -> f64 {
        debug_assert_eq!(l, 0);
        self
    }
    fn set_lane(&mut self, l: usize, v: f64) {
        debug_assert_eq!(l, 0);
        *self = v;
    }
}

impl Field for Complex64 {
    type Real = f64;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_f64(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }
    fn from_real(r: f64) -> Self {
        Complex64::new(r, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn abs_sq(self) -> f64 {
        self.norm_sqr()
    }
    fn min_abs(self) -> f64 {
        self.norm()
    }
    fn max_abs(self) -> f64 {
        self.norm()
    }
}
