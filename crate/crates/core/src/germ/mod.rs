//! Plane vector-field germs `v = f ∂x + g ∂y` over `Q`, their parser and
//! canonical printer, and the exact classification of singular points.

mod classify;
mod family;
mod parse;

use std::fmt;

use thiserror::Error;

use crate::poly::{gcd2, rational_roots, resultant_y, Field, Poly2, UPoly};
use crate::scalar::Q;

pub use classify::{classify_at_origin, linear_part, ClassKind, EigenRatio, SingularityClass};
pub use family::{eigenvalue_function, solve_lambda, ParamGerm};
pub use parse::{parse_components, parse_poly, ParseField};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GermError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("the vector field is identically zero")]
    ZeroField,
    #[error("total degree {degree} exceeds the cap {cap}")]
    DegreeCapExceeded { cap: u32, degree: u32 },
    #[error(
        "the family is identically degenerate (determinant of the linear part vanishes for all t)"
    )]
    IdenticallyDegenerate,
    #[error("every parameter value gives the requested eigenvalue")]
    ConstantFamily,
    #[error("denominator vanishes identically")]
    ZeroDenominator,
}

/// Saturated plane vector field `f ∂x + g ∂y` with rational coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct PlaneGerm {
    f: Poly2<Q>,
    g: Poly2<Q>,
}

impl PlaneGerm {
    /// Builds the saturated representative by dividing out `gcd(f, g)`.
    pub fn new(f: Poly2<Q>, g: Poly2<Q>) -> Result<Self, GermError> {
        if f.is_zero() && g.is_zero() {
            return Err(GermError::ZeroField);
        }
        let d = gcd2(&f, &g);
        if d.total_degree() == Some(0) {
            return Ok(PlaneGerm { f, g });
        }
        let f = f.exact_div(&d).expect("gcd divides f");
        let g = g.exact_div(&d).expect("gcd divides g");
        Ok(PlaneGerm { f, g })
    }

    /// Parses text such as `x*dx + 4*y*dy`.
    pub fn parse(text: &str) -> Result<Self, GermError> {
        let (f, g) = parse_components::<Q>(text)?;
        Self::new(f, g)
    }

    pub fn f(&self) -> &Poly2<Q> {
        &self.f
    }

    pub fn g(&self) -> &Poly2<Q> {
        &self.g
    }

    /// Derivation `v(h) = f h_x + g h_y`.
    pub fn apply(&self, h: &Poly2<Q>) -> Poly2<Q> {
        self.f.mul(&h.dx()).add(&self.g.mul(&h.dy()))
    }

    pub fn is_singular_at_origin(&self) -> bool {
        Field::is_zero(&self.f.constant_term()) && Field::is_zero(&self.g.constant_term())
    }

    pub fn is_singular_at(&self, x: &Q, y: &Q) -> bool {
        Field::is_zero(&self.f.eval(x, y)) && Field::is_zero(&self.g.eval(x, y))
    }

    /// The germ recentered at `(a, b)`.
    pub fn translate(&self, a: &Q, b: &Q) -> Self {
        PlaneGerm {
            f: self.f.translate(a, b),
            g: self.g.translate(a, b),
        }
    }

    /// Exchanges the roles of `x` and `y`.
    pub fn swap_axes(&self) -> Self {
        let sw =
            |p: &Poly2<Q>| Poly2::from_terms(p.terms().map(|(&(i, j), c)| ((j, i), c.clone())));
        PlaneGerm {
            f: sw(&self.g),
            g: sw(&self.f),
        }
    }

    /// Pushes the field through the linear change `x = a u + b w`, `y = c u + d w`.
    /// Returns `None` for a singular matrix.
    pub fn linear_conjugate(&self, a: &Q, b: &Q, c: &Q, d: &Q) -> Option<Self> {
        let det = a * d - b * c;
        if num_traits::Zero::is_zero(&det) {
            return None;
        }
        let fs = self.f.linear_substitute(a, b, c, d);
        let gs = self.g.linear_substitute(a, b, c, d);
        let inv = det.recip();
        // (u', w') = M^{-1} (f, g)
        let nf = fs.scale(&(d * &inv)).sub(&gs.scale(&(b * &inv)));
        let ng = gs.scale(&(a * &inv)).sub(&fs.scale(&(c * &inv)));
        Self::new(nf, ng).ok()
    }

    /// Multiplies the field by a polynomial, keeping the saturated form.
    pub fn times(&self, u: &Poly2<Q>) -> Option<Self> {
        Self::new(self.f.mul(u), self.g.mul(u)).ok()
    }

    /// Multiplies by a polynomial without re-saturating. Useful for checks
    /// that must be independent of the chosen generator.
    pub fn times_unsaturated(&self, u: &Poly2<Q>) -> Self {
        PlaneGerm {
            f: self.f.mul(u),
            g: self.g.mul(u),
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.f
            .total_degree()
            .unwrap_or(0)
            .max(self.g.total_degree().unwrap_or(0))
    }

    /// Canonical text: `dx` terms then `dy` terms, each in graded-lex order.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.f.render_into(&mut out, "dx");
        self.g.render_into(&mut out, "dy");
        out
    }
}

impl fmt::Display for PlaneGerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl fmt::Debug for PlaneGerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PlaneGerm({})", self.render())
    }
}

/// Singular point with rational coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalSingularPoint {
    pub x: Q,
    pub y: Q,
    pub class: SingularityClass,
}

fn restrict_x(p: &Poly2<Q>, x0: &Q) -> UPoly<Q> {
    p.translate(x0, &Q::from_integer(0.into())).at_x0()
}

/// All singular points with rational coordinates, sorted lexicographically.
/// Irrational common zeros are not reported.
pub fn singular_points_rational(
    v: &PlaneGerm,
    degree_cap: u32,
) -> Result<Vec<RationalSingularPoint>, GermError> {
    let deg = v.total_degree();
    if deg > degree_cap {
        return Err(GermError::DegreeCapExceeded {
            cap: degree_cap,
            degree: deg,
        });
    }
    let mut out = Vec::new();
    for x0 in rational_roots(&resultant_y(&v.f, &v.g)) {
        let fy = restrict_x(&v.f, &x0);
        let gy = restrict_x(&v.g, &x0);
        let common = fy.gcd(&gy);
        if common.is_zero() {
            continue;
        }
        for y0 in rational_roots(&common) {
            let class = classify_at_origin(&v.translate(&x0, &y0));
            out.push(RationalSingularPoint {
                x: x0.clone(),
                y: y0,
                class,
            });
        }
    }
    out.sort_by(|a, b| (&a.x, &a.y).cmp(&(&b.x, &b.y)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::qi;

    #[test]
    fn parse_and_print() {
        let v = PlaneGerm::parse("x*dx + 4*y*dy").unwrap();
        assert_eq!(v.render(), "x*dx + 4*y*dy");
        let v = PlaneGerm::parse("2*x*dx + 5*y*dy").unwrap();
        assert_eq!(v.render(), "2*x*dx + 5*y*dy");
        let v = PlaneGerm::parse("x*(x*dx + y*dy)").unwrap();
        assert_eq!(v.render(), "x*dx + y*dy");
        let v = PlaneGerm::parse("x*dx - 3/2*y*dy").unwrap();
        assert_eq!(v.render(), "x*dx - 3/2*y*dy");
        let v = PlaneGerm::parse("(x^2 - x)*dx + y*dy").unwrap();
        assert_eq!(v.render(), "x^2*dx - x*dx + y*dy");
        assert_eq!(PlaneGerm::parse(&v.render()).unwrap(), v);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(PlaneGerm::parse("0*dx + 0*dy"), Err(GermError::ZeroField));
        match PlaneGerm::parse("x*dx + z*dy") {
            Err(GermError::Syntax { offset, .. }) => assert_eq!(offset, 7),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            PlaneGerm::parse("dx*dy"),
            Err(GermError::Syntax { offset: 2, .. })
        ));
        assert!(matches!(
            PlaneGerm::parse("x + dx"),
            Err(GermError::Syntax { .. })
        ));
        assert!(matches!(
            PlaneGerm::parse("x*dx/y"),
            Err(GermError::Syntax { .. })
        ));
        assert!(matches!(
            PlaneGerm::parse("t*dx"),
            Err(GermError::Syntax { .. })
        ));
        assert!(matches!(
            PlaneGerm::parse("(x*dx"),
            Err(GermError::Syntax { .. })
        ));
    }

    #[test]
    fn saturation_divides_common_factor() {
        let v = PlaneGerm::parse("x*dy").unwrap();
        assert_eq!(v.render(), "dy");
        let v = PlaneGerm::parse("(x+y)*(x*dx - y*dy)").unwrap();
        assert_eq!(v.render(), "x*dx - y*dy");
    }

    #[test]
    fn rational_singular_points() {
        let pts = |s: &str| {
            singular_points_rational(&PlaneGerm::parse(s).unwrap(), 10)
                .unwrap()
                .into_iter()
                .map(|p| (p.x, p.y))
                .collect::<Vec<_>>()
        };
        assert_eq!(pts("x*dx + y*dy"), vec![(qi(0), qi(0))]);
        assert_eq!(
            pts("(x^2 - x)*dx + y*dy"),
            vec![(qi(0), qi(0)), (qi(1), qi(0))]
        );
        assert!(pts("dx").is_empty());
        assert_eq!(pts("(y - x^2)*dx + (x - 2)*dy"), vec![(qi(2), qi(4))]);
        let v = PlaneGerm::parse("x^3*dx + y*dy").unwrap();
        assert!(matches!(
            singular_points_rational(&v, 2),
            Err(GermError::DegreeCapExceeded { cap: 2, degree: 3 })
        ));
    }
}
