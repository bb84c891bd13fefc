//! Matrix algebra of `SL(2,R) x R^2` inside `SL(3,R)`, the conjugated
//! product used to measure transverse divergence, and numeric checks of
//! its limits along explicit sequences.
//!
//! Everything is generic over [`LabScalar`], implemented for `f64` and for
//! exact rationals, so identities can be certified exactly.

use num_traits::{Num, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exactfield::Rational;

pub trait LabScalar: Num + Signed + Clone + PartialOrd + std::fmt::Debug + Send + Sync {
    /// Whether `self` equals one, exactly or within `1e-12`.
    fn is_unit(&self) -> bool;
    fn as_f64(&self) -> f64;
}

impl LabScalar for f64 {
    fn is_unit(&self) -> bool {
        (self - 1.0).abs() <= 1e-12
    }
    fn as_f64(&self) -> f64 {
        *self
    }
}

impl LabScalar for Rational {
    fn is_unit(&self) -> bool {
        num_traits::One::is_one(self)
    }
    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DivergenceError {
    #[error("matrix is not unimodular")]
    NotUnimodular,
    #[error("bottom row must be (0, 0, 1)")]
    BadBottomRow,
    #[error("f(g, t) has a pole: d - t c = 0")]
    PoleAtT,
    #[error("c and y are both zero")]
    BothZero,
    #[error("case undetermined: {0}")]
    CaseUndetermined(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// `[[a, b], [c, d]]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sl2<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: LabScalar> Sl2<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Sl2 { a, b, c, d }
    }

    pub fn identity() -> Self {
        Sl2::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn det(&self) -> T {
        self.a.clone() * self.d.clone() - self.b.clone() * self.c.clone()
    }
}

/// An element of `SL(2,R) x R^2` as a 3x3 matrix with bottom row `(0,0,1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupElement3<T> {
    m: [[T; 3]; 3],
}

impl<T: LabScalar> GroupElement3<T> {
    pub fn from_rows(m: [[T; 3]; 3]) -> Result<Self, DivergenceError> {
        if !(m[2][0].is_zero() && m[2][1].is_zero() && m[2][2].is_one()) {
            return Err(DivergenceError::BadBottomRow);
        }
        let e = GroupElement3 { m };
        if !e.linear().det().is_unit() {
            return Err(DivergenceError::NotUnimodular);
        }
        Ok(e)
    }

    fn raw(m: [[T; 3]; 3]) -> Self {
        GroupElement3 { m }
    }

    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Self::raw([
            [o.clone(), z.clone(), z.clone()],
            [z.clone(), o.clone(), z.clone()],
            [z.clone(), z, o],
        ])
    }

    pub fn rows(&self) -> &[[T; 3]; 3] {
        &self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> &T {
        &self.m[i][j]
    }

    pub fn linear(&self) -> Sl2<T> {
        let m = &self.m;
        Sl2::new(m[0][0].clone(), m[0][1].clone(), m[1][0].clone(), m[1][1].clone())
    }

    /// The translation column `(m02, m12)`.
    pub fn translation(&self) -> (T, T) {
        (self.m[0][2].clone(), self.m[1][2].clone())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::identity().m;
        for (i, row) in r.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (0..3).fold(T::zero(), |acc, k| acc + self.m[i][k].clone() * o.m[k][j].clone());
            }
        }
        Self::raw(r)
    }

    pub fn inverse(&self) -> Self {
        let g = self.linear();
        let inv = Sl2::new(g.d.clone(), -g.b.clone(), -g.c.clone(), g.a.clone());
        let (x, y) = self.translation();
        let tx = -(inv.a.clone() * x.clone() + inv.b.clone() * y.clone());
        let ty = -(inv.c.clone() * x + inv.d.clone() * y);
        let z = T::zero();
        Self::raw([
            [inv.a, inv.b, tx],
            [inv.c, inv.d, ty],
            [z.clone(), z, T::one()],
        ])
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                best = best.max((self.m[i][j].clone() - o.m[i][j].clone()).abs().as_f64());
            }
        }
        best
    }
}

/// The horocycle element `u^t`.
pub fn u_elem<T: LabScalar>(t: T) -> GroupElement3<T> {
    let mut e = GroupElement3::identity();
    e.m[0][1] = t;
    e
}

/// The lower unipotent `v^t`.
pub fn v_elem<T: LabScalar>(t: T) -> GroupElement3<T> {
    let mut e = GroupElement3::identity();
    e.m[1][0] = t;
    e
}

/// The diagonal element with entries `(lambda, 1/lambda)`, i.e. `a^s` with
/// `lambda = e^s`.
pub fn a_elem<T: LabScalar>(lambda: T) -> GroupElement3<T> {
    let mut e = GroupElement3::identity();
    e.m[1][1] = T::one() / lambda.clone();
    e.m[0][0] = lambda;
    e
}

/// Horizontal translation `x^s`.
pub fn x_elem<T: LabScalar>(s: T) -> GroupElement3<T> {
    let mut e = GroupElement3::identity();
    e.m[0][2] = s;
    e
}

/// Vertical translation `y^r`.
pub fn y_elem<T: LabScalar>(r: T) -> GroupElement3<T> {
    let mut e = GroupElement3::identity();
    e.m[1][2] = r;
    e
}

/// `g x^x y^y`: third column `(a x + b y, c x + d y, 1)`.
pub fn embed<T: LabScalar>(g: &Sl2<T>, x: T, y: T) -> Result<GroupElement3<T>, DivergenceError> {
    if !g.det().is_unit() {
        return Err(DivergenceError::NotUnimodular);
    }
    let z = T::zero();
    Ok(GroupElement3::raw([
        [g.a.clone(), g.b.clone(), g.a.clone() * x.clone() + g.b.clone() * y.clone()],
        [g.c.clone(), g.d.clone(), g.c.clone() * x + g.d.clone() * y],
        [z.clone(), z, T::one()],
    ]))
}

/// `f(g, t) = (t a - b) / (d - t c)`.
pub fn f_of<T: LabScalar>(g: &Sl2<T>, t: &T) -> Result<T, DivergenceError> {
    let den = g.d.clone() - t.clone() * g.c.clone();
    if den.is_zero() {
        return Err(DivergenceError::PoleAtT);
    }
    Ok((t.clone() * g.a.clone() - g.b.clone()) / den)
}

/// `u^{f(g,t)} g x y u^{-t}`. The `(0, 1)` entry cancels by the choice of
/// `f`; it is set from the computed product, not forced.
pub fn conjugated_product<T: LabScalar>(g: &Sl2<T>, x: T, y: T, t: &T) -> Result<GroupElement3<T>, DivergenceError> {
    let f = f_of(g, t)?;
    Ok(u_elem(f).mul(&embed(g, x, y)?).mul(&u_elem(-t.clone())))
}

/// `min(delta/|c|, delta/|y|)` with `delta/0` read as infinity.
pub fn t_k_rule<T: LabScalar>(c: &T, y: &T, delta: &T) -> Result<T, DivergenceError> {
    match (c.is_zero(), y.is_zero()) {
        (true, true) => Err(DivergenceError::BothZero),
        (true, false) => Ok(delta.clone() / y.abs()),
        (false, true) => Ok(delta.clone() / c.abs()),
        (false, false) => {
            let (p, q) = (delta.clone() / c.abs(), delta.clone() / y.abs());
            Ok(if p <= q { p } else { q })
        }
    }
}

/// Checks `a^tau u^t x^s a^-tau = u^{t e^{2 tau}} x^{s e^tau}` and
/// `a^tau y^r a^-tau = y^{r e^-tau}`, given `lambda = e^tau`. Exact for
/// rationals; within `tol` entrywise for floats.
pub fn rescale_identity_check<T: LabScalar>(lambda: &T, t: &T, s: &T, r: &T, tol: f64) -> bool {
    let a = a_elem(lambda.clone());
    let ai = a.inverse();
    let lhs1 = a.mul(&u_elem(t.clone())).mul(&x_elem(s.clone())).mul(&ai);
    let rhs1 = u_elem(t.clone() * lambda.clone() * lambda.clone()).mul(&x_elem(s.clone() * lambda.clone()));
    let lhs2 = a.mul(&y_elem(r.clone())).mul(&ai);
    let rhs2 = y_elem(r.clone() / lambda.clone());
    // the lower unipotent direction contracts at twice the rate
    let lhs3 = a.mul(&v_elem(r.clone())).mul(&ai);
    let rhs3 = v_elem(r.clone() / (lambda.clone() * lambda.clone()));
    [lhs1.max_abs_diff(&rhs1), lhs2.max_abs_diff(&rhs2), lhs3.max_abs_diff(&rhs3)]
        .iter()
        .all(|&e| e <= tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case {
    /// Eventually `|y_k| <= |c_k|`.
    A,
    /// Eventually `|c_k| <= |y_k|`.
    B,
}

/// The target set for the limit of the conjugated products, in
/// coordinates `(s, x)` for `a^s x^x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitRegion {
    pub case: Case,
    pub delta: f64,
}

fn interval_distance(v: f64, lo: f64, hi: f64) -> f64 {
    if v < lo {
        lo - v
    } else if v > hi {
        v - hi
    } else {
        0.0
    }
}

impl LimitRegion {
    pub fn distance(&self, s: f64, x: f64) -> f64 {
        let d = self.delta;
        let (lo, hi) = (-(1.0 + d).ln(), -(1.0 - d).ln());
        match self.case {
            Case::A => {
                let xr = d / (1.0 - d);
                let dx = interval_distance(x, -xr, xr);
                [lo, hi].iter().map(|&c| (s - c).hypot(dx)).fold(f64::INFINITY, f64::min)
            }
            Case::B => {
                let ds = interval_distance(s, lo, hi);
                let (inner, outer) = (d / (1.0 + d), d / (1.0 - d));
                let dx = interval_distance(x.abs(), inner, outer);
                ds.hypot(dx)
            }
        }
    }

    pub fn describe(&self) -> String {
        let d = self.delta;
        match self.case {
            Case::A => format!("a^{{-log(1 +/- {d})}} x^[-{0}, {0}]", d / (1.0 - d)),
            Case::B => format!(
                "a^[{}, {}] x^(+/-[{}, {}])",
                -(1.0 + d).ln(),
                -(1.0 - d).ln(),
                d / (1.0 + d),
                d / (1.0 - d)
            ),
        }
    }
}

type Generator = dyn Fn(u64) -> (Sl2<f64>, f64, f64) + Send + Sync;

/// A sequence `k -> (g_k, x_k, y_k)` with its parameter `delta`.
#[derive(Clone)]
pub struct DivergenceSequence {
    pub name: String,
    pub delta: f64,
    generator: std::sync::Arc<Generator>,
}

impl std::fmt::Debug for DivergenceSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DivergenceSequence({}, delta = {})", self.name, self.delta)
    }
}

impl DivergenceSequence {
    pub fn from_fn(
        name: impl Into<String>,
        delta: f64,
        f: impl Fn(u64) -> (Sl2<f64>, f64, f64) + Send + Sync + 'static,
    ) -> Result<Self, DivergenceError> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(DivergenceError::InvalidParameter(format!("delta = {delta} must lie in (0, 1)")));
        }
        Ok(DivergenceSequence {
            name: name.into(),
            delta,
            generator: std::sync::Arc::new(f),
        })
    }

    pub fn term(&self, k: u64) -> (Sl2<f64>, f64, f64) {
        (self.generator)(k)
    }

    /// `g_k = [[1, 0], [1/k, 1]]`, `x_k = 0`, `y_k = 1/k^2`.
    pub fn case_a(delta: f64) -> Result<Self, DivergenceError> {
        Self::from_fn("caseA", delta, |k| {
            let k = k as f64;
            (Sl2::new(1.0, 0.0, 1.0 / k, 1.0), 0.0, 1.0 / (k * k))
        })
    }

    /// `g_k = [[1, 0], [1/k^2, 1]]`, `x_k = 0`, `y_k = 1/k`.
    pub fn case_b(delta: f64) -> Result<Self, DivergenceError> {
        Self::from_fn("caseB", delta, |k| {
            let k = k as f64;
            (Sl2::new(1.0, 0.0, 1.0 / (k * k), 1.0), 0.0, 1.0 / k)
        })
    }

    /// A seeded family with every entry perturbed:
    /// `g_k = [[1 + b c, b], [c, 1]]`, `b = beta/k`, `c = alpha/k^p`,
    /// `x_k = eps/k^2`, `y_k = gamma/k^q`, with `{p, q} = {1, 2}`.
    pub fn custom(seed: u64, delta: f64) -> Result<Self, DivergenceError> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut coef = || {
            let m: f64 = rng.gen_range(0.5..2.0);
            if rng.gen_bool(0.5) { m } else { -m }
        };
        let (alpha, beta, gamma, eps) = (coef(), coef(), coef(), coef());
        let (p, q) = if seed % 2 == 0 { (1, 2) } else { (2, 1) };
        Self::from_fn(format!("custom-{seed}"), delta, move |k| {
            let kf = k as f64;
            let b = beta / kf;
            let c = alpha / kf.powi(p);
            (Sl2::new(1.0 + b * c, b, c, 1.0), eps / (kf * kf), gamma / kf.powi(q))
        })
    }
}

/// One evaluated term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleRow {
    pub k: u64,
    /// Exponent `s` of the diagonal part `a^s`.
    pub diag: f64,
    /// Horizontal translation part.
    pub x: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub case: Case,
    pub region: String,
    pub accumulation_point: (f64, f64),
    pub distance_to_region: f64,
    /// Largest of `|c_K|`, `|c_K x_K + d_K y_K|` and the `(0, 1)` entry at `K`;
    /// all must vanish in the limit.
    pub residual: f64,
    /// Successive distances between the samples at `K/4`, `K/2` and `K`.
    pub cauchy: (f64, f64),
    pub pass: bool,
    pub samples: Vec<SampleRow>,
}

/// Slack allowed when comparing the Cauchy increments. A sequence
/// converging like `1/k` halves its increments only up to `O(1/K)`.
const CAUCHY_REL_SLACK: f64 = 1e-2;
const CAUCHY_ABS_SLACK: f64 = 1e-12;

fn evaluate(seq: &DivergenceSequence, k: u64) -> Result<(GroupElement3<f64>, f64), DivergenceError> {
    let (g, x, y) = seq.term(k);
    let t = t_k_rule(&g.c, &y, &seq.delta)?;
    let p = conjugated_product(&g, x, y, &t)?;
    let ty = p.entry(1, 2).abs();
    Ok((p, ty))
}

pub fn limit_region_check(seq: &DivergenceSequence, kmax: u64, tol: f64) -> Result<LimitReport, DivergenceError> {
    if kmax < 8 {
        return Err(DivergenceError::InvalidParameter("kmax must be at least 8".into()));
    }
    let tail = kmax / 4;
    // hypotheses on every index, case on the tail
    let flags = (1..=kmax)
        .into_par_iter()
        .map(|k| {
            let (g, _, y) = seq.term(k);
            if g.c * y == 0.0 {
                return Err(DivergenceError::CaseUndetermined(format!("c_k y_k = 0 at k = {k}")));
            }
            Ok(if k >= tail { (y.abs() <= g.c.abs(), g.c.abs() <= y.abs()) } else { (true, true) })
        })
        .try_reduce(|| (true, true), |a, b| Ok((a.0 && b.0, a.1 && b.1)))?;
    let case = match flags {
        (true, _) => Case::A,
        (false, true) => Case::B,
        (false, false) => {
            return Err(DivergenceError::CaseUndetermined(
                "neither |y_k| <= |c_k| nor |c_k| <= |y_k| holds on the tail".into(),
            ))
        }
    };
    let region = LimitRegion { case, delta: seq.delta };
    let point = |k: u64| -> Result<(f64, f64), DivergenceError> {
        let (p, _) = evaluate(seq, k)?;
        Ok((p.entry(0, 0).ln(), *p.entry(0, 2)))
    };
    let mut ks: Vec<u64> = std::iter::successors(Some(1u64), |k| k.checked_mul(2)).take_while(|&k| k <= kmax).collect();
    ks.extend([kmax / 4, kmax / 2, kmax]);
    ks.sort_unstable();
    ks.dedup();
    let samples = ks
        .iter()
        .map(|&k| {
            let (diag, x) = point(k)?;
            Ok(SampleRow {
                k,
                diag,
                x,
                distance: region.distance(diag, x),
            })
        })
        .collect::<Result<Vec<_>, DivergenceError>>()?;
    let (q1, q2, q3) = (point(kmax / 4)?, point(kmax / 2)?, point(kmax)?);
    let d1 = (q2.0 - q1.0).hypot(q2.1 - q1.1);
    let d2 = (q3.0 - q2.0).hypot(q3.1 - q2.1);
    let cauchy_ok = d2 <= 0.5 * d1 * (1.0 + CAUCHY_REL_SLACK) + CAUCHY_ABS_SLACK;
    let (pk, ty) = evaluate(seq, kmax)?;
    let residual = pk.entry(1, 0).abs().max(ty).max(pk.entry(0, 1).abs());
    let distance = region.distance(q3.0, q3.1);
    Ok(LimitReport {
        case,
        region: region.describe(),
        accumulation_point: q3,
        distance_to_region: distance,
        residual,
        cauchy: (d1, d2),
        pass: distance <= tol && residual <= tol && cauchy_ok,
        samples,
    })
}

#[cfg(test)]
mod tests;
