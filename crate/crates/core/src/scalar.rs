//! Exact scalars: rationals and elements of a single real quadratic field.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Arbitrary precision rational number.
pub type Q = BigRational;

/// Shorthand constructor used all over the crate and its tests.
pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("cannot mix quadratic fields Q(sqrt {0}) and Q(sqrt {1})")]
    MixedRadicands(BigInt, BigInt),
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid rational literal {0:?}")]
    BadLiteral(String),
    #[error("radicand {0} must be a squarefree integer >= 2")]
    BadRadicand(BigInt),
}

/// Parses `p`, `-p` or `p/q`.
pub fn parse_rational(text: &str) -> Result<Q, ScalarError> {
    let t = text.trim();
    let bad = || ScalarError::BadLiteral(text.to_string());
    match t.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(t.parse().map_err(|_| bad())?)),
    }
}

/// Canonical text form: `p` for integers, `p/q` otherwise.
pub fn fmt_q(x: &Q) -> String {
    x.to_string()
}

/// Exact square root of a nonnegative integer, if it is a perfect square.
pub fn int_sqrt_exact(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Exact square root of a rational, if it exists in Q.
pub fn rational_sqrt(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let n = int_sqrt_exact(x.numer())?;
    let d = int_sqrt_exact(x.denom())?;
    Some(Q::new(n, d))
}

/// Writes `n = s^2 * d` with `d` squarefree (sign carried by `d`).
pub fn squarefree_decompose(n: &BigInt) -> (BigInt, BigInt) {
    if n.is_zero() {
        return (BigInt::zero(), BigInt::zero());
    }
    let sign = if n.is_negative() {
        -BigInt::one()
    } else {
        BigInt::one()
    };
    let mut rest = n.abs();
    let mut s = BigInt::one();
    let mut d = BigInt::one();
    let mut p = BigInt::from(2);
    while &p * &p <= rest {
        let mut e = 0u32;
        while (&rest % &p).is_zero() {
            rest /= &p;
            e += 1;
        }
        for _ in 0..e / 2 {
            s *= &p;
        }
        if e % 2 == 1 {
            d *= &p;
        }
        p += if p == BigInt::from(2) { 1 } else { 2 };
    }
    d *= rest;
    (s, sign * d)
}

/// An exact number: a rational or `a + b*sqrt(d)` with `d` squarefree, `d >= 2`, `b != 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rational(Q),
    Quadratic { a: Q, b: Q, d: BigInt },
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Rational(Q::zero())
    }

    pub fn one() -> Self {
        Scalar::Rational(Q::one())
    }

    pub fn quadratic(a: Q, b: Q, d: BigInt) -> Result<Self, ScalarError> {
        if d < BigInt::from(2) || squarefree_decompose(&d).0 != BigInt::one() {
            return Err(ScalarError::BadRadicand(d));
        }
        Ok(Self::normalized(a, b, d))
    }

    fn normalized(a: Q, b: Q, d: BigInt) -> Self {
        if b.is_zero() {
            Scalar::Rational(a)
        } else {
            Scalar::Quadratic { a, b, d }
        }
    }

    /// Square root of a nonnegative rational, landing in Q or in Q(sqrt d).
    pub fn sqrt_of(x: &Q) -> Option<Self> {
        if x.is_negative() {
            return None;
        }
        if let Some(r) = rational_sqrt(x) {
            return Some(Scalar::Rational(r));
        }
        // sqrt(n/m) = sqrt(n*m)/m
        let nm = x.numer() * x.denom();
        let (s, d) = squarefree_decompose(&nm);
        Some(Scalar::Quadratic {
            a: Q::zero(),
            b: Q::new(s, x.denom().clone()),
            d,
        })
    }

    pub fn as_rational(&self) -> Option<&Q> {
        match self {
            Scalar::Rational(x) => Some(x),
            Scalar::Quadratic { .. } => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Scalar::Rational(_))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Scalar::Rational(x) if x.is_zero())
    }

    pub fn radicand(&self) -> Option<&BigInt> {
        match self {
            Scalar::Rational(_) => None,
            Scalar::Quadratic { d, .. } => Some(d),
        }
    }

    fn parts(&self) -> (Q, Q) {
        match self {
            Scalar::Rational(x) => (x.clone(), Q::zero()),
            Scalar::Quadratic { a, b, .. } => (a.clone(), b.clone()),
        }
    }

    fn common_radicand(&self, other: &Self) -> Result<Option<BigInt>, ScalarError> {
        match (self.radicand(), other.radicand()) {
            (Some(d1), Some(d2)) if d1 != d2 => {
                Err(ScalarError::MixedRadicands(d1.clone(), d2.clone()))
            }
            (Some(d), _) | (_, Some(d)) => Ok(Some(d.clone())),
            (None, None) => Ok(None),
        }
    }

    fn build(a: Q, b: Q, d: Option<BigInt>) -> Self {
        match d {
            Some(d) => Self::normalized(a, b, d),
            None => Scalar::Rational(a),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, ScalarError> {
        let d = self.common_radicand(other)?;
        let (a1, b1) = self.parts();
        let (a2, b2) = other.parts();
        Ok(Self::build(a1 + a2, b1 + b2, d))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, ScalarError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, ScalarError> {
        let d = self.common_radicand(other)?;
        let (a1, b1) = self.parts();
        let (a2, b2) = other.parts();
        let dq = d.clone().map(Q::from_integer).unwrap_or_else(Q::zero);
        let a = &a1 * &a2 + &b1 * &b2 * dq;
        let b = a1 * b2 + b1 * a2;
        Ok(Self::build(a, b, d))
    }

    pub fn recip(&self) -> Result<Self, ScalarError> {
        match self {
            Scalar::Rational(x) => {
                if x.is_zero() {
                    Err(ScalarError::DivisionByZero)
                } else {
                    Ok(Scalar::Rational(x.recip()))
                }
            }
            Scalar::Quadratic { a, b, d } => {
                // (a - b sqrt d) / (a^2 - d b^2); the norm is nonzero since sqrt d is irrational
                let norm = a * a - b * b * Q::from_integer(d.clone());
                Ok(Self::normalized(a / &norm, -b / &norm, d.clone()))
            }
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self, ScalarError> {
        self.mul(&other.recip()?)
    }

    pub fn neg(&self) -> Self {
        match self {
            Scalar::Rational(x) => Scalar::Rational(-x),
            Scalar::Quadratic { a, b, d } => Scalar::Quadratic {
                a: -a,
                b: -b,
                d: d.clone(),
            },
        }
    }

    /// Exact sign.
    pub fn signum(&self) -> Ordering {
        match self {
            Scalar::Rational(x) => x.cmp(&Q::zero()),
            Scalar::Quadratic { a, b, d } => {
                let sa = a.cmp(&Q::zero());
                let sb = b.cmp(&Q::zero());
                if sa == sb || sa == Ordering::Equal {
                    return sb;
                }
                // opposite signs: compare a^2 with b^2 d
                let lhs = a * a;
                let rhs = b * b * Q::from_integer(d.clone());
                match lhs.cmp(&rhs) {
                    Ordering::Greater => sa,
                    Ordering::Less => sb,
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    pub fn cmp_exact(&self, other: &Self) -> Result<Ordering, ScalarError> {
        Ok(self.sub(other)?.signum())
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn is_positive_rational(&self) -> bool {
        matches!(self, Scalar::Rational(x) if x.is_positive())
    }
}

impl From<Q> for Scalar {
    fn from(x: Q) -> Self {
        Scalar::Rational(x)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(x) => write!(f, "{x}"),
            Scalar::Quadratic { a, b, d } => {
                if a.is_zero() {
                    write!(f, "{b}*sqrt({d})")
                } else if b.is_negative() {
                    write!(f, "{a} - {}*sqrt({d})", -b)
                } else {
                    write!(f, "{a} + {b}*sqrt({d})")
                }
            }
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match self {
            Scalar::Rational(x) => ser.serialize_str(&fmt_q(x)),
            Scalar::Quadratic { a, b, d } => {
                let mut m = ser.serialize_map(Some(3))?;
                m.serialize_entry("a", &fmt_q(a))?;
                m.serialize_entry("b", &fmt_q(b))?;
                m.serialize_entry("d", &d.to_string())?;
                m.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
            Quad {
                a: String,
                b: String,
                d: serde_json::Value,
            },
        }
        match Raw::deserialize(de)? {
            Raw::Text(s) => parse_rational(&s)
                .map(Scalar::Rational)
                .map_err(de::Error::custom),
            Raw::Int(n) => Ok(Scalar::Rational(qi(n))),
            Raw::Quad { a, b, d } => {
                let a = parse_rational(&a).map_err(de::Error::custom)?;
                let b = parse_rational(&b).map_err(de::Error::custom)?;
                let d: BigInt = match d {
                    serde_json::Value::String(s) => s.parse().map_err(de::Error::custom)?,
                    serde_json::Value::Number(n) => BigInt::from(
                        n.as_i64()
                            .ok_or_else(|| de::Error::custom("radicand must be an integer"))?,
                    ),
                    _ => return Err(de::Error::custom("radicand must be an integer")),
                };
                Scalar::quadratic(a, b, d).map_err(de::Error::custom)
            }
        }
    }
}

/// serde adapter for `Q` fields as `"p/q"` strings.
pub mod serde_q {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Q, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Q, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
        }
        match Raw::deserialize(de)? {
            Raw::Text(s) => parse_rational(&s).map_err(de::Error::custom),
            Raw::Int(n) => Ok(qi(n)),
        }
    }
}

/// serde adapter for `Option<Q>`.
pub mod serde_opt_q {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<Q>, ser: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(x) => ser.serialize_str(&fmt_q(x)),
            None => ser.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Option<Q>, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
        }
        match Option::<Raw>::deserialize(de)? {
            None => Ok(None),
            Some(Raw::Text(s)) => parse_rational(&s).map(Some).map_err(de::Error::custom),
            Some(Raw::Int(n)) => Ok(Some(qi(n))),
        }
    }
}

/// serde adapter for `Vec<Q>`.
pub mod serde_vec_q {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[Q], ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_seq(xs.iter().map(fmt_q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<Q>, D::Error> {
        #[derive(Deserialize)]
        struct W(#[serde(with = "super::serde_q")] Q);
        let v = Vec::<W>::deserialize(de)?;
        Ok(v.into_iter().map(|w| w.0).collect())
    }
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}
