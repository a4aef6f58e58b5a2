//! Singular Riemann-Roch bookkeeping for `χ(mK_F)`: local contributions,
//! the Hilbert function of an invariant sheet, recovery of the invariants
//! from sampled values, and the effective constants of the boundedness
//! argument.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::quotsing::{hj_expand, QuotSingularity};
use crate::scalar::{fmt_q, serde_opt_q, serde_q, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericsError {
    #[error("local contribution of {kind} at m = {m} is not determined")]
    Undefined { kind: String, m: i64 },
    #[error("P({m}) = {value} is not an integer; the sheet is inconsistent")]
    NonIntegral { m: i64, value: String },
    #[error("samples insufficient: {0}")]
    InsufficientSamples(String),
    #[error("samples inconsistent: {0}")]
    Inconsistent(String),
    #[error("K_F^2 must be positive")]
    NotGeneralType,
    #[error("index {0} must be finite here")]
    InfiniteIndex(&'static str),
    #[error("invalid sheet: {0}")]
    BadSheet(String),
    #[error("m must be nonnegative, got {0}")]
    NegativeM(i64),
}

/// Singularity types entering the local contributions to `χ(mK_F)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularityKind {
    CartierPoint,
    MildLcNonCanonical,
    GorensteinCanonical,
    TwoGorensteinCanonical,
    /// Canonical but not Q-Gorenstein (cusp).
    NonQGorensteinCanonical,
    Terminal {
        n: i64,
        q: i64,
    },
}

impl fmt::Display for SingularityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SingularityKind::Terminal { n, q } => write!(f, "terminal 1/{n}(1,{q})"),
            other => {
                let v = serde_json::to_value(other).expect("unit variant");
                write!(f, "{}", v.as_str().unwrap_or("?"))
            }
        }
    }
}

/// Local contribution `a(x, mK_F)`; `None` where it is not determined.
pub fn local_contribution(kind: SingularityKind, m: u64) -> Option<Q> {
    let z = Q::zero();
    match kind {
        SingularityKind::CartierPoint
        | SingularityKind::MildLcNonCanonical
        | SingularityKind::GorensteinCanonical => Some(z),
        SingularityKind::TwoGorensteinCanonical => Some(if m.is_multiple_of(2) {
            z
        } else {
            Q::new((-1).into(), 2.into())
        }),
        SingularityKind::NonQGorensteinCanonical => Some(if m == 0 { z } else { -Q::one() }),
        SingularityKind::Terminal { n, .. } => {
            let n = n as u64;
            if m.is_multiple_of(n) {
                Some(z)
            } else if m == 1 {
                Some(Q::new((1 - n as i64).into(), (2 * n as i64).into()))
            } else {
                None
            }
        }
    }
}

impl SingularityKind {
    /// Period of the local contribution in `m` (for `m ≥ 1`).
    pub fn period(&self) -> u64 {
        match self {
            SingularityKind::TwoGorensteinCanonical => 2,
            SingularityKind::Terminal { n, .. } => *n as u64,
            _ => 1,
        }
    }

    fn validate(&self) -> Result<(), NumericsError> {
        if let SingularityKind::Terminal { n, q } = self {
            QuotSingularity::new(*n, *q).map_err(|e| NumericsError::BadSheet(e.to_string()))?;
        }
        Ok(())
    }
}

/// A positive integer or infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Index {
    Finite(u64),
    Infinite,
}

impl Index {
    pub fn finite(&self) -> Option<u64> {
        match self {
            Index::Finite(k) => Some(*k),
            Index::Infinite => None,
        }
    }
}

impl Serialize for Index {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Index::Finite(k) => s.serialize_u64(*k),
            Index::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Index {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match &v {
            serde_json::Value::Number(n) => match n.as_u64() {
                Some(k) if k >= 1 => Ok(Index::Finite(k)),
                _ => Err(de::Error::custom("index must be a positive integer")),
            },
            serde_json::Value::String(s) if s == "inf" || s == "∞" => Ok(Index::Infinite),
            _ => Err(de::Error::custom(
                "index must be a positive integer or \"inf\"",
            )),
        }
    }
}

/// Global invariants and singularity content of a foliated surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantSheet {
    #[serde(rename = "KF2", with = "serde_q")]
    pub kf2: Q,
    #[serde(rename = "KFKX", with = "serde_q")]
    pub kfkx: Q,
    #[serde(rename = "chiO")]
    pub chi_o: i64,
    #[serde(default)]
    pub sing_multiset: Vec<SingularityKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i_x: Option<Index>,
    #[serde(default, rename = "i_KX", skip_serializing_if = "Option::is_none")]
    pub i_kx: Option<Index>,
    #[serde(default, rename = "i_F", skip_serializing_if = "Option::is_none")]
    pub i_f: Option<Index>,
    #[serde(default, rename = "i_Q", skip_serializing_if = "Option::is_none")]
    pub i_q: Option<Index>,
    #[serde(default, rename = "i_P", skip_serializing_if = "Option::is_none")]
    pub i_p: Option<u64>,
}

impl InvariantSheet {
    pub fn new(kf2: Q, kfkx: Q, chi_o: i64, sing_multiset: Vec<SingularityKind>) -> Self {
        InvariantSheet {
            kf2,
            kfkx,
            chi_o,
            sing_multiset,
            i_x: None,
            i_kx: None,
            i_f: None,
            i_q: None,
            i_p: None,
        }
    }

    pub fn validate(&self) -> Result<(), NumericsError> {
        for k in &self.sing_multiset {
            k.validate()?;
        }
        if let (Some(Index::Finite(q)), Some(Index::Finite(f))) = (self.i_q, self.i_f) {
            if f % q != 0 {
                return Err(NumericsError::BadSheet(format!(
                    "i_Q = {q} does not divide i_F = {f}"
                )));
            }
        }
        Ok(())
    }

    pub fn cusps(&self) -> usize {
        self.sing_multiset
            .iter()
            .filter(|k| **k == SingularityKind::NonQGorensteinCanonical)
            .count()
    }

    /// `Σ a(x, K_F)`, defined for every kind.
    pub fn contribution_sum_at_one(&self) -> Q {
        self.sing_multiset
            .iter()
            .map(|k| local_contribution(*k, 1).expect("m = 1 always defined"))
            .sum()
    }
}

/// `P(m) = χ(mK_F)` of a sheet.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertFunction {
    sheet: InvariantSheet,
}

pub fn hilbert_function(sheet: &InvariantSheet) -> Result<HilbertFunction, NumericsError> {
    sheet.validate()?;
    Ok(HilbertFunction {
        sheet: sheet.clone(),
    })
}

impl HilbertFunction {
    pub fn sheet(&self) -> &InvariantSheet {
        &self.sheet
    }

    /// The polynomial part `½m²K_F² − ½mK_F·K_X + χ(O_X)`.
    pub fn quadratic_part(&self, m: i64) -> Q {
        let mq = Q::from_integer(m.into());
        let half = Q::new(1.into(), 2.into());
        &half * &mq * &mq * &self.sheet.kf2 - &half * &mq * &self.sheet.kfkx
            + Q::from_integer(self.sheet.chi_o.into())
    }

    pub fn eval(&self, m: i64) -> Result<BigInt, NumericsError> {
        if m < 0 {
            return Err(NumericsError::NegativeM(m));
        }
        let mut total = self.quadratic_part(m);
        for k in &self.sheet.sing_multiset {
            total += local_contribution(*k, m as u64).ok_or_else(|| NumericsError::Undefined {
                kind: k.to_string(),
                m,
            })?;
        }
        if !total.is_integer() {
            return Err(NumericsError::NonIntegral {
                m,
                value: fmt_q(&total),
            });
        }
        Ok(total.to_integer())
    }

    pub fn sample(&self, ms: &[i64]) -> Result<BTreeMap<i64, BigInt>, NumericsError> {
        ms.iter().map(|&m| Ok((m, self.eval(m)?))).collect()
    }
}

/// Invariants read back from sampled values of `P`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extracted {
    /// `K_F²`.
    #[serde(with = "serde_q")]
    pub b1: Q,
    /// `K_F · K_X`.
    #[serde(with = "serde_q")]
    pub b2: Q,
    /// `χ(O_X)`.
    #[serde(serialize_with = "ser_int")]
    pub b3: BigInt,
    /// Number of cusps.
    #[serde(serialize_with = "ser_int")]
    pub b4: BigInt,
    /// `Σ a(x, K_F)`.
    #[serde(with = "serde_q")]
    pub contribution_sum: Q,
    /// `|Σ| ≤ 4·(−Σ a(x, K_F))`.
    #[serde(with = "serde_q")]
    pub singularity_count_bound: Q,
    /// The multiples of the index-killing period that were used.
    pub multiples_used: Vec<i64>,
}

/// Integers go out as JSON numbers when they fit, as decimal strings otherwise.
fn ser_int<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    match v.to_i64() {
        Some(k) => s.serialize_i64(k),
        None => s.serialize_str(&v.to_string()),
    }
}

fn ser_opt_int<S: Serializer>(v: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => ser_int(v, s),
        None => s.serialize_none(),
    }
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `lcm(2, C₂!)`: every contribution except the cusp one vanishes at its multiples.
pub fn index_killing_period(c2_hint: u64) -> BigInt {
    factorial(c2_hint).lcm(&BigInt::from(2))
}

/// Solves `P(m) = a m² + b m + c` through three points.
fn fit_quadratic(pts: &[(Q, Q)]) -> (Q, Q, Q) {
    let [(x0, y0), (x1, y1), (x2, y2)] = [&pts[0], &pts[1], &pts[2]].map(|p| p.clone());
    let d01 = (&y1 - &y0) / (&x1 - &x0);
    let d12 = (&y2 - &y1) / (&x2 - &x1);
    let a = (&d12 - &d01) / (&x2 - &x0);
    let b = &d01 - &a * (&x0 + &x1);
    let c = &y0 - &a * &x0 * &x0 - &b * &x0;
    (a, b, c)
}

/// Recovers `(K_F², K_F·K_X, χ(O_X), #cusps)` and `Σ a(x, K_F)` from samples at
/// `m = 0`, `m = 1` and at least three positive multiples of `lcm(2, C₂!)`.
pub fn extract_invariants(
    samples: &BTreeMap<i64, BigInt>,
    c2_hint: u64,
) -> Result<Extracted, NumericsError> {
    let p0 = samples
        .get(&0)
        .ok_or_else(|| NumericsError::InsufficientSamples("missing P(0)".into()))?;
    let p1 = samples
        .get(&1)
        .ok_or_else(|| NumericsError::InsufficientSamples("missing P(1)".into()))?;
    let period = index_killing_period(c2_hint);
    let multiples: Vec<i64> = samples
        .keys()
        .copied()
        .filter(|&m| m > 0 && (BigInt::from(m) % &period).is_zero())
        .collect();
    if multiples.len() < 3 {
        return Err(NumericsError::InsufficientSamples(format!(
            "need three positive multiples of {period}, got {}",
            multiples.len()
        )));
    }
    let q = |v: &BigInt| Q::from_integer(v.clone());
    let pts: Vec<(Q, Q)> = multiples
        .iter()
        .map(|&m| (Q::from_integer(m.into()), q(&samples[&m])))
        .collect();
    let (a, b, c) = fit_quadratic(&pts[..3]);
    for (x, y) in &pts[3..] {
        if &a * x * x + &b * x + &c != *y {
            return Err(NumericsError::Inconsistent(format!(
                "P({}) is off the quadratic through the first three multiples",
                fmt_q(x)
            )));
        }
    }
    let two = Q::from_integer(2.into());
    let b1 = &a * &two;
    let b2 = -(&b * &two);
    let b3 = p0.clone();
    let b4q = q(&b3) - &c;
    if !b4q.is_integer() || b4q.is_negative() {
        return Err(NumericsError::Inconsistent(format!(
            "cusp count {} is not a nonnegative integer",
            fmt_q(&b4q)
        )));
    }
    let half = Q::new(1.into(), 2.into());
    let sum = q(p1) - (&half * &b1 - &half * &b2 + q(&b3));
    let bound = Q::from_integer(4.into()) * -&sum;
    Ok(Extracted {
        b1,
        b2,
        b3,
        b4: b4q.to_integer(),
        contribution_sum: sum,
        singularity_count_bound: bound,
        multiples_used: multiples[..3].to_vec(),
    })
}

/// Where `δ` comes from in the birationality bound.
#[derive(Debug, Clone, PartialEq)]
pub enum DeltaSource {
    Given(Q),
    /// Smooth point or du Val singularity.
    SmoothOrDuVal,
    /// Cyclic quotient `1/n(1,q)`, bounded through its embedding dimension.
    CyclicQuotient(QuotSingularity),
}

impl DeltaSource {
    pub fn delta(&self) -> Q {
        match self {
            DeltaSource::Given(d) => d.clone(),
            DeltaSource::SmoothOrDuVal => Q::from_integer(8.into()),
            DeltaSource::CyclicQuotient(s) => {
                if s.q == s.n - 1 {
                    return Q::from_integer(8.into());
                }
                let edim = hj_expand(s.n, s.q).expect("valid type").edim_bound as i64;
                Q::from_integer((4 * (edim - 1)).into())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectiveBounds {
    /// `max{2K_F·K_X/K_F² + 3i_Q, 0}`.
    #[serde(with = "serde_q")]
    pub gamma: Q,
    /// `m(K_G + D)` is nef for multiples `m ≥ 3` of the index and ample for `m ≥ 4`.
    pub nef_multiple: u32,
    pub ample_multiple: u32,
    #[serde(with = "serde_q")]
    pub delta: Q,
    /// Least positive α with `(α i(K_Y) + 3)² > δ` and `α i(K_Y) + 3 > δ/2`.
    pub alpha: u64,
    #[serde(with = "serde_opt_q", skip_serializing_if = "Option::is_none")]
    pub degree_bound: Option<Q>,
    #[serde(
        serialize_with = "ser_opt_int",
        skip_serializing_if = "Option::is_none"
    )]
    pub i_p: Option<BigInt>,
}

pub fn effective_bounds(
    sheet: &InvariantSheet,
    i_ky: u64,
    delta: &DeltaSource,
    c2_hint: Option<u64>,
) -> Result<EffectiveBounds, NumericsError> {
    if !sheet.kf2.is_positive() {
        return Err(NumericsError::NotGeneralType);
    }
    if i_ky == 0 {
        return Err(NumericsError::BadSheet("i(K_Y) must be positive".into()));
    }
    let i_q = sheet
        .i_q
        .ok_or(NumericsError::InfiniteIndex("i_Q"))?
        .finite()
        .ok_or(NumericsError::InfiniteIndex("i_Q"))?;
    let g = Q::from_integer(2.into()) * &sheet.kfkx / &sheet.kf2
        + Q::from_integer((3 * i_q as i64).into());
    let gamma = if g.is_negative() { Q::zero() } else { g };
    let d = delta.delta();
    let half_d = &d / Q::from_integer(2.into());
    let mut alpha = 1u64;
    loop {
        let t = Q::from_integer(((alpha * i_ky + 3) as i64).into());
        if &t * &t > d && t > half_d {
            break;
        }
        alpha += 1;
    }
    let degree_bound = sheet.i_f.and_then(|f| f.finite()).map(|i_f| {
        let inner = Q::from_integer(((alpha * i_ky) as i64).into())
            * (&gamma + Q::from_integer((4 * i_f as i64).into()));
        &inner * &inner * &sheet.kf2
    });
    let i_p = c2_hint
        .map(factorial)
        .or_else(|| sheet.i_p.map(BigInt::from));
    Ok(EffectiveBounds {
        gamma,
        nef_multiple: 3,
        ample_multiple: 4,
        delta: d,
        alpha,
        degree_bound,
        i_p,
    })
}

/// Smallest multiple of the sheet's own periods (and 2); useful for sampling.
pub fn sheet_period(sheet: &InvariantSheet) -> u64 {
    sheet
        .sing_multiset
        .iter()
        .map(SingularityKind::period)
        .fold(2u64, |acc, p| acc.lcm(&p))
}

/// Largest terminal index in the sheet, at least 1.
pub fn max_terminal_index(sheet: &InvariantSheet) -> u64 {
    sheet
        .sing_multiset
        .iter()
        .filter_map(|k| match k {
            SingularityKind::Terminal { n, .. } => Some(*n as u64),
            _ => None,
        })
        .max()
        .unwrap_or(1)
}

/// Sample points `0, 1` and three multiples of a period that also clears
/// the denominators of `K_F²` and `K_F·K_X`.
pub fn standard_sample_points(sheet: &InvariantSheet, c2_hint: u64) -> Vec<i64> {
    let den = sheet.kf2.denom().lcm(sheet.kfkx.denom()) * BigInt::from(2);
    let step = index_killing_period(c2_hint)
        .lcm(&den)
        .lcm(&BigInt::from(sheet_period(sheet)));
    let step = step.to_i64().expect("sample period fits in i64");
    vec![0, 1, step, 2 * step, 3 * step]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qi};
    use SingularityKind::*;

    #[test]
    fn contribution_table() {
        assert_eq!(
            local_contribution(TwoGorensteinCanonical, 3),
            Some(q(-1, 2))
        );
        assert_eq!(local_contribution(TwoGorensteinCanonical, 4), Some(qi(0)));
        assert_eq!(local_contribution(NonQGorensteinCanonical, 5), Some(qi(-1)));
        assert_eq!(local_contribution(NonQGorensteinCanonical, 0), Some(qi(0)));
        assert_eq!(
            local_contribution(Terminal { n: 2, q: 1 }, 1),
            Some(q(-1, 4))
        );
        assert_eq!(local_contribution(Terminal { n: 3, q: 1 }, 6), Some(qi(0)));
        assert_eq!(local_contribution(Terminal { n: 3, q: 1 }, 2), None);
        for k in [CartierPoint, MildLcNonCanonical, GorensteinCanonical] {
            assert_eq!(local_contribution(k, 7), Some(qi(0)));
        }
    }

    #[test]
    fn hilbert_examples() {
        let s = InvariantSheet::new(qi(2), qi(4), 1, vec![]);
        let p = hilbert_function(&s).unwrap();
        assert_eq!(p.eval(0).unwrap(), BigInt::from(1));
        assert_eq!(p.eval(1).unwrap(), BigInt::from(0));
        let mut s2 = s.clone();
        s2.sing_multiset.push(NonQGorensteinCanonical);
        let p2 = hilbert_function(&s2).unwrap();
        assert_eq!(p2.eval(1).unwrap(), BigInt::from(-1));
        let t = InvariantSheet::new(qi(2), qi(4), 1, vec![Terminal { n: 3, q: 1 }]);
        assert!(matches!(
            hilbert_function(&t).unwrap().eval(2),
            Err(NumericsError::Undefined { .. })
        ));
        assert!(matches!(
            hilbert_function(&t).unwrap().eval(1),
            Err(NumericsError::NonIntegral { .. })
        ));
    }

    #[test]
    fn extraction_roundtrip() {
        let kinds = vec![
            NonQGorensteinCanonical,
            NonQGorensteinCanonical,
            Terminal { n: 3, q: 1 },
            TwoGorensteinCanonical,
        ];
        let sum: Q = kinds
            .iter()
            .map(|k| local_contribution(*k, 1).unwrap())
            .sum();
        assert_eq!(-sum.clone(), qi(2) + q(1, 3) + q(1, 2));
        // choose K_F·K_X so that P(1) is an integer
        let kf2 = qi(5);
        let kfkx = &kf2 + &sum * qi(2) - qi(2);
        let sheet = InvariantSheet::new(kf2.clone(), kfkx.clone(), 3, kinds);
        let p = hilbert_function(&sheet).unwrap();
        let ms = standard_sample_points(&sheet, 3);
        let samples = p.sample(&ms).unwrap();
        let e = extract_invariants(&samples, 3).unwrap();
        assert_eq!((e.b1, e.b2), (kf2, kfkx));
        assert_eq!(e.b3, BigInt::from(3));
        assert_eq!(e.b4, BigInt::from(2));
        assert_eq!(e.contribution_sum, sum);
        assert_eq!(
            e.singularity_count_bound,
            qi(4) * (qi(2) + q(1, 3) + q(1, 2))
        );

        let plain = InvariantSheet::new(qi(2), qi(4), 1, vec![]);
        let p = hilbert_function(&plain).unwrap();
        let e =
            extract_invariants(&p.sample(&standard_sample_points(&plain, 1)).unwrap(), 1).unwrap();
        assert_eq!(e.b4, BigInt::zero());
        assert_eq!(e.contribution_sum, qi(0));
        assert!(matches!(
            extract_invariants(&p.sample(&[0, 1, 2]).unwrap(), 1),
            Err(NumericsError::InsufficientSamples(_))
        ));
    }

    #[test]
    fn bounds() {
        let mut s = InvariantSheet::new(qi(2), qi(4), 1, vec![]);
        s.i_q = Some(Index::Finite(2));
        s.i_f = Some(Index::Finite(2));
        let b = effective_bounds(&s, 1, &DeltaSource::Given(qi(8)), Some(3)).unwrap();
        assert_eq!(b.gamma, qi(10));
        assert_eq!(b.alpha, 2);
        assert_eq!(b.degree_bound, Some(qi(36 * 36 * 2)));
        assert_eq!(b.i_p, Some(BigInt::from(6)));
        s.kfkx = qi(-100);
        assert_eq!(
            effective_bounds(&s, 1, &DeltaSource::SmoothOrDuVal, None)
                .unwrap()
                .gamma,
            qi(0)
        );
        let d = DeltaSource::CyclicQuotient(QuotSingularity::new(7, 4).unwrap());
        assert_eq!(d.delta(), qi(16));
        s.kf2 = qi(0);
        assert_eq!(
            effective_bounds(&s, 1, &DeltaSource::SmoothOrDuVal, None).unwrap_err(),
            NumericsError::NotGeneralType
        );
    }

    #[test]
    fn sheet_json() {
        let text = r#"{"KF2":"5/3","KFKX":"1","chiO":2,"sing_multiset":["cartier_point",{"terminal":{"n":3,"q":1}}],"i_Q":1,"i_F":"inf"}"#;
        let s: InvariantSheet = serde_json::from_str(text).unwrap();
        assert_eq!(s.kf2, q(5, 3));
        assert_eq!(s.i_f, Some(Index::Infinite));
        assert_eq!(s.sing_multiset[1], Terminal { n: 3, q: 1 });
        let bad = r#"{"KF2":"1","KFKX":"1","chiO":0,"sing_multiset":[{"terminal":{"n":4,"q":2}}]}"#;
        let s: InvariantSheet = serde_json::from_str(bad).unwrap();
        assert!(hilbert_function(&s).is_err());
    }
}
