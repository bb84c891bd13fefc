//! Exact arithmetic in real quadratic fields `Q(sqrt d)`.
//!
//! Every static geometric quantity in this crate (edge vectors, cylinder
//! widths and heights, saddle-connection holonomies) is a [`QuadNum`], so
//! that equalities and signs are decided exactly.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Arbitrary precision rational, always stored in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("operands live in different fields: Q(sqrt {0}) and Q(sqrt {1})")]
    MixedField(u64, u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not a squarefree integer >= 2")]
    BadDiscriminant(u64),
    #[error("malformed rational: {0}")]
    BadRational(String),
}

/// Returns true when `d >= 2` and no square of a prime divides `d`.
pub fn is_squarefree(d: u64) -> bool {
    if d < 2 {
        return false;
    }
    let mut n = d;
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return false;
            }
        }
        p += 1;
    }
    true
}

/// A validated field `Q(sqrt d)`; the factory for its elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct QuadField {
    d: u64,
}

impl QuadField {
    pub fn new(d: u64) -> Result<Self, FieldError> {
        if is_squarefree(d) {
            Ok(QuadField { d })
        } else {
            Err(FieldError::BadDiscriminant(d))
        }
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn zero(&self) -> QuadNum {
        QuadNum::from_parts(Rational::zero(), Rational::zero(), self.d)
    }

    pub fn one(&self) -> QuadNum {
        self.int(1)
    }

    pub fn int(&self, n: i64) -> QuadNum {
        self.rat(n, 1)
    }

    /// The rational `num/den`. Panics on `den == 0`.
    pub fn rat(&self, num: i64, den: i64) -> QuadNum {
        QuadNum::from_parts(
            Rational::new(num.into(), den.into()),
            Rational::zero(),
            self.d,
        )
    }

    pub fn rational(&self, r: Rational) -> QuadNum {
        QuadNum::from_parts(r, Rational::zero(), self.d)
    }

    /// `a + b sqrt d`.
    pub fn elem(&self, a: Rational, b: Rational) -> QuadNum {
        QuadNum::from_parts(a, b, self.d)
    }

    /// Shorthand for `(an/ad) + (bn/bd) sqrt d`.
    pub fn q(&self, an: i64, ad: i64, bn: i64, bd: i64) -> QuadNum {
        self.elem(
            Rational::new(an.into(), ad.into()),
            Rational::new(bn.into(), bd.into()),
        )
    }

    /// The positive square root of `d`.
    pub fn sqrt_d(&self) -> QuadNum {
        self.q(0, 1, 1, 1)
    }
}

/// An element `a + b sqrt d` of a real quadratic field, with `sqrt d > 0`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadNum {
    a: Rational,
    b: Rational,
    d: u64,
}

impl QuadNum {
    pub(crate) fn from_parts(a: Rational, b: Rational, d: u64) -> Self {
        QuadNum { a, b, d }
    }

    /// Checked constructor; validates `d`.
    pub fn new(a: Rational, b: Rational, d: u64) -> Result<Self, FieldError> {
        Ok(QuadField::new(d)?.elem(a, b))
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn field(&self) -> QuadField {
        QuadField { d: self.d }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn zero_like(&self) -> QuadNum {
        self.field().zero()
    }

    pub fn one_like(&self) -> QuadNum {
        self.field().one()
    }

    /// Galois conjugate `a - b sqrt d`.
    pub fn conj(&self) -> QuadNum {
        QuadNum::from_parts(self.a.clone(), -&self.b, self.d)
    }

    /// Field norm `x * conj(x) = a^2 - d b^2`.
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - &self.b * &self.b * Rational::from_integer(BigInt::from(self.d))
    }

    /// Exact sign of the real number `a + b sqrt d`.
    pub fn sign(&self) -> i8 {
        let sa = rat_sign(&self.a);
        let sb = rat_sign(&self.b);
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        // Opposite signs: compare a^2 with d b^2.
        let a2 = &self.a * &self.a;
        let db2 = &self.b * &self.b * Rational::from_integer(BigInt::from(self.d));
        match a2.cmp(&db2) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.sign() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.sign() < 0
    }

    pub fn abs(&self) -> QuadNum {
        if self.sign() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * (self.d as f64).sqrt()
    }

    /// Greatest integer not exceeding `self`.
    pub fn floor(&self) -> BigInt {
        let approx = self.to_f64();
        let mut n = if approx.is_finite() && approx.abs() < 1e15 {
            BigInt::from(approx.floor() as i64)
        } else {
            // far from f64 range: bound by the rational part and sqrt(d) < d
            let bound = self.a.abs() + self.b.abs() * Rational::from(BigInt::from(self.d));
            -bound.ceil().to_integer() - 1
        };
        let val = |k: &BigInt| self.field().rational(Rational::from(k.clone()));
        while &val(&n) > self {
            n -= 1;
        }
        loop {
            let up = &n + 1;
            if &val(&up) <= self {
                n = up;
            } else {
                break;
            }
        }
        n
    }

    /// `self` reduced into `[0, w)` by an integer multiple of `w > 0`.
    pub fn rem_euclid(&self, w: &QuadNum) -> QuadNum {
        let q = (self / w).floor();
        self - &w.mul_rat(&Rational::from(q))
    }

    fn check(&self, other: &QuadNum) -> Result<(), FieldError> {
        if self.d == other.d {
            Ok(())
        } else {
            Err(FieldError::MixedField(self.d, other.d))
        }
    }

    pub fn checked_add(&self, y: &QuadNum) -> Result<QuadNum, FieldError> {
        self.check(y)?;
        Ok(QuadNum::from_parts(&self.a + &y.a, &self.b + &y.b, self.d))
    }

    pub fn checked_sub(&self, y: &QuadNum) -> Result<QuadNum, FieldError> {
        self.check(y)?;
        Ok(QuadNum::from_parts(&self.a - &y.a, &self.b - &y.b, self.d))
    }

    pub fn checked_mul(&self, y: &QuadNum) -> Result<QuadNum, FieldError> {
        self.check(y)?;
        let d = Rational::from_integer(BigInt::from(self.d));
        let a = &self.a * &y.a + &self.b * &y.b * d;
        let b = &self.a * &y.b + &self.b * &y.a;
        Ok(QuadNum::from_parts(a, b, self.d))
    }

    pub fn checked_div(&self, y: &QuadNum) -> Result<QuadNum, FieldError> {
        self.check(y)?;
        self.checked_mul(&y.checked_inv()?)
    }

    pub fn checked_inv(&self) -> Result<QuadNum, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let n = self.norm();
        Ok(QuadNum::from_parts(&self.a / &n, -&self.b / &n, self.d))
    }

    pub fn mul_rat(&self, r: &Rational) -> QuadNum {
        QuadNum::from_parts(&self.a * r, &self.b * r, self.d)
    }

    pub fn square(&self) -> QuadNum {
        self * self
    }

    /// Sum of the numerator and denominator bit lengths, a size measure for
    /// renormalization heuristics.
    pub fn bit_size(&self) -> u64 {
        self.a.numer().bits() + self.a.denom().bits() + self.b.numer().bits() + self.b.denom().bits()
    }
}

fn rat_sign(r: &Rational) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

/// The binary operations of the field, dispatched by tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn q_arith(x: &QuadNum, y: &QuadNum, op: ArithOp) -> Result<QuadNum, FieldError> {
    match op {
        ArithOp::Add => x.checked_add(y),
        ArithOp::Sub => x.checked_sub(y),
        ArithOp::Mul => x.checked_mul(y),
        ArithOp::Div => x.checked_div(y),
    }
}

pub fn q_conj(x: &QuadNum) -> QuadNum {
    x.conj()
}

pub fn q_sign(x: &QuadNum) -> i8 {
    x.sign()
}

// Operator impls panic on mixed fields; every surface validates a single d at
// construction so the kernel never mixes fields.
macro_rules! binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl<'a> $tr<&'a QuadNum> for &'a QuadNum {
            type Output = QuadNum;
            fn $m(self, rhs: &'a QuadNum) -> QuadNum {
                self.$checked(rhs).expect(concat!("QuadNum ", stringify!($m)))
            }
        }
        impl $tr<QuadNum> for QuadNum {
            type Output = QuadNum;
            fn $m(self, rhs: QuadNum) -> QuadNum {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a QuadNum> for QuadNum {
            type Output = QuadNum;
            fn $m(self, rhs: &'a QuadNum) -> QuadNum {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<QuadNum> for &'a QuadNum {
            type Output = QuadNum;
            fn $m(self, rhs: QuadNum) -> QuadNum {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);
binop!(Div, div, checked_div);

impl Neg for QuadNum {
    type Output = QuadNum;
    fn neg(self) -> QuadNum {
        QuadNum::from_parts(-self.a, -self.b, self.d)
    }
}

impl Neg for &QuadNum {
    type Output = QuadNum;
    fn neg(self) -> QuadNum {
        QuadNum::from_parts(-&self.a, -&self.b, self.d)
    }
}

impl PartialOrd for QuadNum {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Real-number order. Only meaningful within one field; comparing elements
/// of different fields panics.
impl Ord for QuadNum {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).sign().cmp(&0)
    }
}

impl fmt::Debug for QuadNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for QuadNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => write!(f, "{}", self.a),
            (true, false) => write!(f, "{}*sqrt({})", self.b, self.d),
            (false, false) => {
                if self.b.is_negative() {
                    write!(f, "{} - {}*sqrt({})", self.a, -&self.b, self.d)
                } else {
                    write!(f, "{} + {}*sqrt({})", self.a, self.b, self.d)
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// JSON encoding. A rational is `[num, den]`; integers that fit in i64 are
// written as JSON numbers, larger ones as decimal strings.

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum IntRepr {
    Small(i64),
    Big(String),
}

fn int_to_repr(n: &BigInt) -> IntRepr {
    match n.to_i64() {
        Some(v) => IntRepr::Small(v),
        None => IntRepr::Big(n.to_string()),
    }
}

fn repr_to_int(r: IntRepr) -> Result<BigInt, FieldError> {
    match r {
        IntRepr::Small(v) => Ok(BigInt::from(v)),
        IntRepr::Big(s) => {
            let t = s.trim();
            if t.is_empty() || t.len() > 100_000 {
                return Err(FieldError::BadRational(s));
            }
            t.parse::<BigInt>().map_err(|_| FieldError::BadRational(s))
        }
    }
}

/// Wire form of a rational.
#[derive(Serialize, Deserialize)]
pub struct RatRepr(IntRepr, IntRepr);

impl RatRepr {
    pub fn from_rational(r: &Rational) -> Self {
        RatRepr(int_to_repr(r.numer()), int_to_repr(r.denom()))
    }

    pub fn into_rational(self) -> Result<Rational, FieldError> {
        let n = repr_to_int(self.0)?;
        let d = repr_to_int(self.1)?;
        if d.is_zero() {
            return Err(FieldError::BadRational("zero denominator".into()));
        }
        let g = n.gcd(&d);
        let (mut n, mut d) = (n / &g, d / &g);
        if d.is_negative() {
            n = -n;
            d = -d;
        }
        Ok(Rational::new_raw(n, d))
    }
}

#[derive(Serialize, Deserialize)]
struct QuadRepr {
    a: RatRepr,
    b: RatRepr,
    d: u64,
}

impl Serialize for QuadNum {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        QuadRepr {
            a: RatRepr::from_rational(&self.a),
            b: RatRepr::from_rational(&self.b),
            d: self.d,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuadNum {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let r = QuadRepr::deserialize(de)?;
        let a = r.a.into_rational().map_err(D::Error::custom)?;
        let b = r.b.into_rational().map_err(D::Error::custom)?;
        QuadNum::new(a, b, r.d).map_err(D::Error::custom)
    }
}

/// Parses the JSON object form `{"a":[n,d],"b":[n,d],"d":k}`.
pub fn parse_quadnum(text: &str) -> Result<QuadNum, serde_json::Error> {
    serde_json::from_str(text)
}

/// Parses the compact text form `a`, `a+bs`, `bs` where `a`, `b` are
/// integers or fractions `p/q` and `s` stands for `sqrt d`, e.g. `1/2-3s`.
pub fn parse_quad_text(text: &str, k: QuadField) -> Result<QuadNum, FieldError> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(FieldError::BadRational("empty number".into()));
    }
    let mut a = Rational::zero();
    let mut b = Rational::zero();
    let mut start = 0;
    let bytes = t.as_bytes();
    let mut terms = Vec::new();
    for i in 1..=bytes.len() {
        let sign = bytes[i - 1] != b'/' && bytes[i - 1] != b'e' && bytes[i - 1] != b'E';
        if i == bytes.len() || ((bytes[i] == b'+' || bytes[i] == b'-') && sign) {
            terms.push(&t[start..i]);
            start = i;
        }
    }
    for term in terms {
        let (body, surd) = match term.strip_suffix('s') {
            Some(rest) => (rest, true),
            None => (term, false),
        };
        let body = match body {
            "" | "+" => "1",
            "-" => "-1",
            _ => body,
        };
        let r = parse_rational_text(body)?;
        if surd {
            b += r;
        } else {
            a += r;
        }
    }
    Ok(k.elem(a, b))
}

/// Parses an exact rational: `p/q`, or a decimal with optional exponent
/// such as `-1.25e-3`.
pub fn parse_rational_text(text: &str) -> Result<Rational, FieldError> {
    let bad = || FieldError::BadRational(text.to_owned());
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.parse().map_err(|_| bad())?;
        let d: BigInt = d.parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(FieldError::BadRational("zero denominator".into()));
        }
        return Ok(Rational::new(n, d));
    }
    let (mant, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (text, 0),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if frac.starts_with(['+', '-']) || (int.is_empty() && frac.is_empty()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let digits = match digits.as_str() {
        "+" | "-" => return Err(bad()),
        d => d,
    };
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i32;
    if scale.unsigned_abs() > 4096 {
        return Err(FieldError::BadRational("exponent out of range".into()));
    }
    let ten = BigInt::from(10).pow(scale.unsigned_abs());
    Ok(if scale >= 0 {
        Rational::from(n * ten)
    } else {
        Rational::new(n, ten)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> QuadField {
        QuadField::new(2).unwrap()
    }

    #[test]
    fn decimal_rationals() {
        let r = |n: i64, d: i64| Rational::new(BigInt::from(n), BigInt::from(d));
        assert_eq!(parse_rational_text("1e3").unwrap(), r(1000, 1));
        assert_eq!(parse_rational_text("0.01").unwrap(), r(1, 100));
        assert_eq!(parse_rational_text("-1.25e-1").unwrap(), r(-1, 8));
        assert_eq!(parse_rational_text("3/6").unwrap(), r(1, 2));
        for bad in ["", ".", "1e", "e3", "1.2.3", "--1", "1/0"] {
            assert!(parse_rational_text(bad).is_err(), "{bad}");
        }
        assert_eq!(parse_quad_text("1e-1+2s", f2()).unwrap(), f2().q(1, 10, 2, 1));
    }

    #[test]
    fn squarefree_detection() {
        assert!(is_squarefree(2));
        assert!(is_squarefree(5));
        assert!(is_squarefree(30));
        assert!(!is_squarefree(1));
        assert!(!is_squarefree(4));
        assert!(!is_squarefree(18));
        assert!(QuadField::new(8).is_err());
    }

    #[test]
    fn norm_identity() {
        let k = f2();
        let x = k.q(1, 1, 1, 1) * k.q(1, 1, -1, 1);
        assert_eq!(x, k.int(-1));
    }

    #[test]
    fn conjugate_sum_is_one() {
        let k = QuadField::new(5).unwrap();
        let x = k.q(1, 2, 1, 2) + k.q(1, 2, -1, 2);
        assert_eq!(x, k.one());
    }

    #[test]
    fn product_against_integer_pairs() {
        // (3/2 + sqrt2) * 2 computed on integer pairs scaled by 2:
        // (3 + 2 sqrt2)/2 * 2 -> (3*2 + 0, 2*2 + 0) / 2
        let k = f2();
        let lhs = k.q(3, 2, 1, 1) * k.int(2);
        let (a, b) = ((3 * 2) / 2, (2 * 2) / 2);
        assert_eq!(lhs, k.q(a, 1, b, 1));
    }

    #[test]
    fn conj_examples() {
        let k5 = QuadField::new(5).unwrap();
        assert_eq!(k5.int(3).conj(), k5.int(3));
        assert_eq!(k5.q(1, 1, 1, 1).conj(), k5.q(1, 1, -1, 1));
        let k = f2();
        let x = k.q(2, 1, 1, 1);
        let y = k.q(1, 1, -3, 1);
        // (2+r)(1-3r) = 2 - 6 + (1 - 6) r = -4 - 5r, conj = -4 + 5r
        assert_eq!((&x * &y).conj(), k.q(-4, 1, 5, 1));
        assert_eq!((&x * &y).conj(), x.conj() * y.conj());
    }

    #[test]
    fn sign_examples() {
        let k = f2();
        assert_eq!(k.zero().sign(), 0);
        assert_eq!(k.q(1, 1, -1, 1).sign(), -1);
        // 49 < 50
        assert_eq!(k.q(7, 1, -5, 1).sign(), -1);
        assert_eq!(k.q(-7, 1, 5, 1).sign(), 1);
        assert_eq!(k.q(3, 1, -2, 1).sign(), 1);
    }

    #[test]
    fn mixed_field_and_zero_division() {
        let a = f2().one();
        let b = QuadField::new(3).unwrap().one();
        assert_eq!(q_arith(&a, &b, ArithOp::Add), Err(FieldError::MixedField(2, 3)));
        assert_eq!(
            q_arith(&a, &f2().zero(), ArithOp::Div),
            Err(FieldError::DivisionByZero)
        );
    }

    #[test]
    fn division_roundtrip() {
        let k = f2();
        let x = k.q(3, 7, -2, 5);
        let y = k.q(1, 1, 1, 1);
        assert_eq!(&(&x / &y) * &y, x);
    }

    #[test]
    fn json_form() {
        let k = QuadField::new(5).unwrap();
        let x = k.q(-3, 4, 1, 2);
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"a":[-3,4],"b":[1,2],"d":5}"#);
        assert_eq!(parse_quadnum(&s).unwrap(), x);
        // unreduced input is normalized
        let y = parse_quadnum(r#"{"a":[6,-8],"b":[0,3],"d":5}"#).unwrap();
        assert_eq!(y, k.rat(-3, 4));
        assert!(parse_quadnum(r#"{"a":[1,0],"b":[0,1],"d":5}"#).is_err());
        assert!(parse_quadnum(r#"{"a":[1,1],"b":[0,1],"d":4}"#).is_err());
        let big = k.elem(
            Rational::from_integer("123456789012345678901234567890".parse().unwrap()),
            Rational::zero(),
        );
        let s = serde_json::to_string(&big).unwrap();
        assert!(s.contains("\"123456789012345678901234567890\""));
        assert_eq!(parse_quadnum(&s).unwrap(), big);
    }
}
