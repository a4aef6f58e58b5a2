use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use serde_json::{json, Value};

use super::PlaneGerm;
use crate::scalar::{fmt_q, rational_sqrt, Scalar, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassKind {
    NonSingular,
    NonDegenerate,
    SaddleNode,
    NilpotentOrDegenerate,
}

/// The eigenvalue ratio, defined up to reciprocal.
#[derive(Debug, Clone, PartialEq)]
pub enum EigenRatio {
    /// Real ratio, stored as the representative with `|λ| ≤ 1`; zero stands for `{0, ∞}`.
    Real(Scalar),
    /// Complex-conjugate eigenvalues; only `λ + 1/λ` is rational.
    NonReal { lambda_plus_inverse: Q },
}

impl EigenRatio {
    pub fn lambda(&self) -> Option<&Scalar> {
        match self {
            EigenRatio::Real(s) => Some(s),
            EigenRatio::NonReal { .. } => None,
        }
    }

    /// Positive rational ratio, as the representative `≥ 1` (so `n x∂x + m y∂y` with
    /// `m ≥ n` reports `m/n`).
    pub fn positive_rational(&self) -> Option<Q> {
        let l = self.lambda()?.as_rational()?;
        if !l.is_positive() {
            return None;
        }
        Some(if *l < Q::one() { l.recip() } else { l.clone() })
    }

    fn reciprocal_json(&self) -> Value {
        match self {
            EigenRatio::Real(s) if s.is_zero() => Value::String("inf".into()),
            EigenRatio::Real(s) => serde_json::to_value(s.recip().expect("nonzero")).unwrap(),
            EigenRatio::NonReal { .. } => Value::String("non_real".into()),
        }
    }
}

/// Class of a germ at the origin, with the reducedness flags.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularityClass {
    pub kind: ClassKind,
    pub eigen: Option<EigenRatio>,
    pub reduced: bool,
    pub semi_reduced: bool,
    pub trace: Q,
    pub det: Q,
}

impl SingularityClass {
    pub fn is_singular(&self) -> bool {
        self.kind != ClassKind::NonSingular
    }

    pub fn lambda(&self) -> Option<&Scalar> {
        self.eigen.as_ref().and_then(EigenRatio::lambda)
    }

    pub fn to_json(&self) -> Value {
        let mut m = serde_json::Map::new();
        m.insert("kind".into(), serde_json::to_value(self.kind).unwrap());
        m.insert("reduced".into(), Value::Bool(self.reduced));
        m.insert("semi_reduced".into(), Value::Bool(self.semi_reduced));
        m.insert("trace".into(), Value::String(fmt_q(&self.trace)));
        m.insert("det".into(), Value::String(fmt_q(&self.det)));
        match &self.eigen {
            Some(e @ EigenRatio::Real(s)) => {
                m.insert("lambda".into(), serde_json::to_value(s).unwrap());
                m.insert("lambda_reciprocal".into(), e.reciprocal_json());
                m.insert("non_real".into(), Value::Bool(false));
            }
            Some(EigenRatio::NonReal {
                lambda_plus_inverse,
            }) => {
                m.insert("lambda".into(), Value::Null);
                m.insert("non_real".into(), Value::Bool(true));
                m.insert(
                    "lambda_plus_inverse".into(),
                    json!(fmt_q(lambda_plus_inverse)),
                );
            }
            None => {
                m.insert("lambda".into(), Value::Null);
            }
        }
        Value::Object(m)
    }
}

impl Serialize for SingularityClass {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let v = self.to_json();
        let obj = v.as_object().expect("object");
        let mut map = ser.serialize_map(Some(obj.len()))?;
        for (k, val) in obj {
            map.serialize_entry(k, val)?;
        }
        map.end()
    }
}

/// Linear part `[[f_x, f_y], [g_x, g_y]]` at the origin.
pub fn linear_part(v: &PlaneGerm) -> [[Q; 2]; 2] {
    [
        [v.f().coeff(1, 0), v.f().coeff(0, 1)],
        [v.g().coeff(1, 0), v.g().coeff(0, 1)],
    ]
}

fn canonical(l: Scalar) -> Scalar {
    match l.abs().cmp_exact(&Scalar::one()) {
        Ok(Ordering::Greater) => l.recip().expect("nonzero"),
        _ => l,
    }
}

/// Classification from the characteristic polynomial of the linear part.
pub fn classify_at_origin(v: &PlaneGerm) -> SingularityClass {
    let [[a, b], [c, d]] = linear_part(v);
    let trace = &a + &d;
    let det = &a * &d - &b * &c;
    let mk = |kind, eigen, reduced, semi_reduced| SingularityClass {
        kind,
        eigen,
        reduced,
        semi_reduced,
        trace: trace.clone(),
        det: det.clone(),
    };
    if !v.is_singular_at_origin() {
        return mk(ClassKind::NonSingular, None, false, false);
    }
    if det.is_zero() {
        if trace.is_zero() {
            return mk(ClassKind::NilpotentOrDegenerate, None, false, false);
        }
        return mk(
            ClassKind::SaddleNode,
            Some(EigenRatio::Real(Scalar::zero())),
            true,
            true,
        );
    }
    let disc = &trace * &trace - Q::from_integer(4.into()) * &det;
    if disc.is_negative() {
        if trace.is_zero() {
            let l = Scalar::from(-Q::one());
            return mk(
                ClassKind::NonDegenerate,
                Some(EigenRatio::Real(l)),
                true,
                true,
            );
        }
        let s = &trace * &trace / &det - Q::from_integer(2.into());
        return mk(
            ClassKind::NonDegenerate,
            Some(EigenRatio::NonReal {
                lambda_plus_inverse: s,
            }),
            true,
            true,
        );
    }
    let half = Q::new(1.into(), 2.into());
    let lambda = if let Some(r) = rational_sqrt(&disc) {
        let mp = (&trace + &r) * &half;
        let mm = (&trace - &r) * &half;
        Scalar::from(mp / mm)
    } else {
        let root = Scalar::sqrt_of(&disc).expect("nonnegative");
        let tr = Scalar::from(trace.clone());
        let mp = tr.add(&root).unwrap();
        let mm = tr.sub(&root).unwrap();
        mp.div(&mm).expect("nonzero eigenvalue")
    };
    let lambda = canonical(lambda);
    let reduced = !lambda.is_positive_rational();
    mk(
        ClassKind::NonDegenerate,
        Some(EigenRatio::Real(lambda)),
        reduced,
        true,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qi};

    fn cls(s: &str) -> SingularityClass {
        classify_at_origin(&PlaneGerm::parse(s).unwrap())
    }

    #[test]
    fn basic_classes() {
        let c = cls("x*dx + 4*y*dy");
        assert_eq!(c.kind, ClassKind::NonDegenerate);
        assert_eq!(c.lambda(), Some(&Scalar::from(q(1, 4))));
        assert!(c.semi_reduced && !c.reduced);
        assert_eq!(c.eigen.as_ref().unwrap().positive_rational(), Some(qi(4)));

        let c = cls("x*dx - y*dy");
        assert_eq!(c.lambda(), Some(&Scalar::from(qi(-1))));
        assert!(c.reduced);

        let c = cls("x*dx + y^2*dy");
        assert_eq!(c.kind, ClassKind::SaddleNode);
        assert!(c.reduced && c.semi_reduced);

        let c = cls("(x + y)*dx + (-x + y)*dy");
        assert!(matches!(
            c.eigen,
            Some(EigenRatio::NonReal { ref lambda_plus_inverse }) if lambda_plus_inverse.is_zero()
        ));
        assert!(c.reduced);

        let c = cls("dx");
        assert_eq!(c.kind, ClassKind::NonSingular);
        assert!(!c.reduced && !c.semi_reduced);

        let c = cls("y*dx");
        assert_eq!(c.kind, ClassKind::NonSingular);
        let c = cls("y*dx + x^2*dy");
        assert_eq!(c.kind, ClassKind::NilpotentOrDegenerate);
    }

    #[test]
    fn quadratic_ratio() {
        // eigenvalues 1 ± sqrt 2
        let c = cls("(x + 2*y)*dx + (x + y)*dy");
        let l = c.lambda().unwrap();
        assert!(!l.is_rational());
        assert!(c.reduced);
        assert!(l.abs().cmp_exact(&Scalar::one()).unwrap() != Ordering::Greater);
        // trace zero with irrational eigenvalues ±sqrt 2 gives λ = -1
        let c = cls("2*y*dx + x*dy");
        assert_eq!(c.lambda(), Some(&Scalar::from(qi(-1))));
    }
}
