//! Planar vectors over an exact or floating coefficient type.

use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::exactfield::QuadNum;

/// Coefficient type of a surface presentation.
///
/// `QuadNum` gives exact decisions; `f64` is used only for surfaces whose
/// coordinates are not in a single quadratic field (regular polygons), where
/// signs are decided up to [`FLOAT_EPS`].
pub trait Scalar: Clone + Debug + PartialEq + Send + Sync {
    const EXACT: bool;
    fn zero_like(&self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn signum(&self) -> i8;
    fn to_f64(&self) -> f64;
    /// A direction used to count full turns around a vertex: `(1, 0)` when
    /// exact, a generic angle for floats so that ties with edges are avoided.
    fn reference_direction(&self) -> (Self, Self);
    fn half(&self) -> Self;
    fn is_one(&self) -> bool;
    /// Exact quotient; `None` when dividing by zero.
    fn div(&self, o: &Self) -> Option<Self>;
    /// Identifies the coefficient field; values with different tags must not
    /// be combined.
    fn field_tag(&self) -> u64;
}

pub const FLOAT_EPS: f64 = 1e-9;

impl Scalar for QuadNum {
    const EXACT: bool = true;
    fn zero_like(&self) -> Self {
        QuadNum::zero_like(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn signum(&self) -> i8 {
        self.sign()
    }
    fn to_f64(&self) -> f64 {
        QuadNum::to_f64(self)
    }
    fn reference_direction(&self) -> (Self, Self) {
        (self.one_like(), self.zero_like())
    }
    fn half(&self) -> Self {
        self.mul_rat(&crate::exactfield::Rational::new(1.into(), 2.into()))
    }
    fn is_one(&self) -> bool {
        *self == self.one_like()
    }
    fn div(&self, o: &Self) -> Option<Self> {
        self.checked_div(o).ok()
    }
    fn field_tag(&self) -> u64 {
        self.d()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    fn zero_like(&self) -> Self {
        0.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn signum(&self) -> i8 {
        if *self > FLOAT_EPS {
            1
        } else if *self < -FLOAT_EPS {
            -1
        } else {
            0
        }
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn reference_direction(&self) -> (Self, Self) {
        (1.0f64.cos(), 1.0f64.sin())
    }
    fn half(&self) -> Self {
        self * 0.5
    }
    fn is_one(&self) -> bool {
        (self - 1.0).abs() < 1e-12
    }
    fn div(&self, o: &Self) -> Option<Self> {
        (*o != 0.0).then(|| self / o)
    }
    fn field_tag(&self) -> u64 {
        0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Vec2<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Vec2<S> {
    pub fn new(x: S, y: S) -> Self {
        Vec2 { x, y }
    }

    pub fn zero_like(&self) -> Self {
        Vec2::new(self.x.zero_like(), self.y.zero_like())
    }

    pub fn add(&self, o: &Self) -> Self {
        Vec2::new(self.x.add(&o.x), self.y.add(&o.y))
    }

    pub fn sub(&self, o: &Self) -> Self {
        Vec2::new(self.x.sub(&o.x), self.y.sub(&o.y))
    }

    pub fn neg(&self) -> Self {
        Vec2::new(self.x.neg(), self.y.neg())
    }

    pub fn scale(&self, k: &S) -> Self {
        Vec2::new(self.x.mul(k), self.y.mul(k))
    }

    pub fn cross(&self, o: &Self) -> S {
        self.x.mul(&o.y).sub(&self.y.mul(&o.x))
    }

    pub fn dot(&self, o: &Self) -> S {
        self.x.mul(&o.x).add(&self.y.mul(&o.y))
    }

    pub fn norm2(&self) -> S {
        self.dot(self)
    }

    pub fn is_zero(&self) -> bool {
        self.x.signum() == 0 && self.y.signum() == 0
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.x.to_f64(), self.y.to_f64())
    }

    pub fn length_f64(&self) -> f64 {
        let (x, y) = self.to_f64();
        x.hypot(y)
    }

    /// Applies the matrix `[[a, b], [c, d]]`.
    pub fn transform(&self, m: &Mat2<S>) -> Self {
        Vec2::new(
            m.a.mul(&self.x).add(&m.b.mul(&self.y)),
            m.c.mul(&self.x).add(&m.d.mul(&self.y)),
        )
    }
}

/// Lexicographic exact order on exact vectors (x first).
pub fn lex_cmp(u: &Vec2<QuadNum>, v: &Vec2<QuadNum>) -> std::cmp::Ordering {
    u.x.cmp(&v.x).then_with(|| u.y.cmp(&v.y))
}

/// Whether direction `w` lies in the half-open counterclockwise sector
/// `[u, v)`, where the sector from `u` to `v` is strictly less than a half turn.
pub fn in_sector<S: Scalar>(u: &Vec2<S>, v: &Vec2<S>, w: &Vec2<S>) -> bool {
    let uw = u.cross(w).signum();
    if uw == 0 {
        // along u (same direction) is included, the opposite ray is not
        return u.dot(w).signum() > 0;
    }
    uw > 0 && w.cross(v).signum() > 0
}

/// A 2x2 matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat2<S> {
    pub a: S,
    pub b: S,
    pub c: S,
    pub d: S,
}

impl<S: Scalar> Mat2<S> {
    pub fn new(a: S, b: S, c: S, d: S) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn det(&self) -> S {
        self.a.mul(&self.d).sub(&self.b.mul(&self.c))
    }

    pub fn mul(&self, o: &Self) -> Self {
        Mat2::new(
            self.a.mul(&o.a).add(&self.b.mul(&o.c)),
            self.a.mul(&o.b).add(&self.b.mul(&o.d)),
            self.c.mul(&o.a).add(&self.d.mul(&o.c)),
            self.c.mul(&o.b).add(&self.d.mul(&o.d)),
        )
    }
}

impl Mat2<QuadNum> {
    pub fn identity(k: crate::exactfield::QuadField) -> Self {
        Mat2::new(k.one(), k.zero(), k.zero(), k.one())
    }

    /// Horocycle matrix `u^t = [[1, t], [0, 1]]`.
    pub fn horocycle(t: &QuadNum) -> Self {
        Mat2::new(t.one_like(), t.clone(), t.zero_like(), t.one_like())
    }

    /// `diag(lambda, 1/lambda)`.
    pub fn diagonal(lambda: &QuadNum) -> Self {
        let inv = lambda.checked_inv().expect("nonzero diagonal entry");
        Mat2::new(lambda.clone(), lambda.zero_like(), lambda.zero_like(), inv)
    }

    /// Lower-triangular unipotent `[[1, 0], [t, 1]]`.
    pub fn lower(t: &QuadNum) -> Self {
        Mat2::new(t.one_like(), t.zero_like(), t.clone(), t.one_like())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactfield::QuadField;

    #[test]
    fn sector_membership() {
        let k = QuadField::new(2).unwrap();
        let v = |x, y| Vec2::new(k.int(x), k.int(y));
        assert!(in_sector(&v(1, 0), &v(0, 1), &v(1, 0)));
        assert!(in_sector(&v(1, 0), &v(0, 1), &v(1, 1)));
        assert!(!in_sector(&v(1, 0), &v(0, 1), &v(0, 1)));
        assert!(!in_sector(&v(1, 0), &v(0, 1), &v(-1, 0)));
        assert!(!in_sector(&v(1, 0), &v(0, 1), &v(1, -1)));
    }
}
