use super::{parse_components, GermError};
use crate::poly::{rational_roots, Field, Poly2, RatFunc};
use crate::scalar::Q;

/// One-parameter family `f ∂x + g ∂y` with coefficients in `Q(t)`.
#[derive(Clone, PartialEq)]
pub struct ParamGerm {
    pub f: Poly2<RatFunc>,
    pub g: Poly2<RatFunc>,
}

impl ParamGerm {
    pub fn parse(text: &str) -> Result<Self, GermError> {
        let (f, g) = parse_components::<RatFunc>(text)?;
        Ok(ParamGerm { f, g })
    }

    /// Trace and determinant of the linear part at the origin.
    pub fn trace_det(&self) -> (RatFunc, RatFunc) {
        let a = self.f.coeff(1, 0);
        let b = self.f.coeff(0, 1);
        let c = self.g.coeff(1, 0);
        let d = self.g.coeff(0, 1);
        (a.add(&d), a.mul(&d).sub(&b.mul(&c)))
    }
}

/// `s(t) = trace² / det`, so that `λ(t) + 1/λ(t) = s(t) − 2`.
pub fn eigenvalue_function(v: &ParamGerm) -> Result<RatFunc, GermError> {
    let (tr, det) = v.trace_det();
    tr.mul(&tr)
        .div(&det)
        .ok_or(GermError::IdenticallyDegenerate)
}

/// Rational parameter values where the eigenvalue ratio equals `λ₀` (or `1/λ₀`).
/// `λ₀ = 0` asks for the saddle-node members.
pub fn solve_lambda(v: &ParamGerm, lambda0: &Q) -> Result<Vec<Q>, GermError> {
    let (tr, det) = v.trace_det();
    if Field::is_zero(&det) {
        return Err(GermError::IdenticallyDegenerate);
    }
    if Field::is_zero(lambda0) {
        let mut out: Vec<Q> = rational_roots(det.num())
            .into_iter()
            .filter(|t| tr.eval(t).is_some_and(|x| !Field::is_zero(&x)))
            .collect();
        out.sort();
        return Ok(out);
    }
    let s = eigenvalue_function(v)?;
    let target = lambda0 + lambda0.recip() + Q::from_integer(2.into());
    let eq = s.num().sub(&s.den().scale(&target));
    if eq.is_zero() {
        return Err(GermError::ConstantFamily);
    }
    let mut out: Vec<Q> = rational_roots(&eq)
        .into_iter()
        .filter(|t| {
            !Field::is_zero(&s.den().eval(t))
                && det.eval(t).is_some_and(|x| !Field::is_zero(&x))
                && tr.eval(t).is_some()
        })
        .collect();
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qi};

    #[test]
    fn eigenvalue_function_examples() {
        let v = ParamGerm::parse("x*dx + t*y*dy").unwrap();
        let s = eigenvalue_function(&v).unwrap();
        assert_eq!(s.eval(&qi(1)), Some(qi(4)));
        assert_eq!(s.eval(&qi(2)), Some(q(9, 2)));
        assert_eq!(solve_lambda(&v, &qi(1)).unwrap(), vec![qi(1)]);
        assert_eq!(solve_lambda(&v, &qi(4)).unwrap(), vec![q(1, 4), qi(4)]);

        let w = ParamGerm::parse("(t*x + y)*dx + y*dy").unwrap();
        let s2 = eigenvalue_function(&w).unwrap();
        assert_eq!(s2, s);
    }

    #[test]
    fn degenerate_family() {
        let v = ParamGerm::parse("y*dx + t*y*dy").unwrap();
        assert_eq!(
            eigenvalue_function(&v).unwrap_err(),
            GermError::IdenticallyDegenerate
        );
        let w = ParamGerm::parse("x*dx + 2*y*dy").unwrap();
        assert_eq!(
            solve_lambda(&w, &qi(2)).unwrap_err(),
            GermError::ConstantFamily
        );
        assert!(solve_lambda(&w, &qi(3)).unwrap().is_empty());
        let z = ParamGerm::parse("x*dx + t*y*dy").unwrap();
        assert_eq!(solve_lambda(&z, &qi(0)).unwrap(), vec![qi(0)]);
    }
}
