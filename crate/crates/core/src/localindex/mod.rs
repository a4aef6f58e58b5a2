//! Camacho-Sad and Z indices of invariant branches, and tangency orders of
//! non-invariant curves.
//!
//! The primary path is a closed-form table in terms of the linear part; a
//! truncated power-series computation of the decomposition
//! `g ω = h dφ + φ η` serves as an independent oracle and as the fallback
//! outside the table.

mod series;

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::germ::{classify_at_origin, linear_part, parse_poly, PlaneGerm};
use crate::poly::{intersection_multiplicity, Poly2};
use crate::scalar::{parse_rational, Scalar, Q};

pub use series::{laurent_div, residue, Series};

pub const DEFAULT_TRUNC: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error("branch is not invariant under the vector field")]
    NotInvariant,
    #[error("branch does not pass through the base point")]
    NotOnBranch,
    #[error("invalid branch: {0}")]
    BadBranch(String),
    #[error("truncation order {trunc} insufficient: results did not stabilize")]
    TruncationInsufficient { trunc: usize },
    #[error("tangency undefined, curve invariant")]
    CurveInvariant,
    #[error("point does not lie on the curve")]
    NotOnCurve,
    #[error("decomposition degenerate along the branch")]
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    /// The curve `x = 0`.
    #[serde(rename = "x=0")]
    X0,
    /// The curve `y = 0`.
    #[serde(rename = "y=0")]
    Y0,
}

/// Branch of an invariant curve through the origin.
#[derive(Debug, Clone, PartialEq)]
pub enum BranchSpec {
    Axis(Axis),
    /// Smooth branch `φ = 0` with nonzero linear part.
    Smooth(Poly2<Q>),
    /// `a x^m − y^n` with `m, n ≥ 2` coprime.
    Cusp {
        a: Q,
        m: u32,
        n: u32,
    },
}

impl BranchSpec {
    /// Parses `x=0`, `y=0`, `smooth:<polynomial>` or `cusp:a,m,n`.
    pub fn parse(text: &str) -> Result<Self, IndexError> {
        let t = text.trim();
        match t {
            "x=0" => return Ok(BranchSpec::Axis(Axis::X0)),
            "y=0" => return Ok(BranchSpec::Axis(Axis::Y0)),
            _ => {}
        }
        if let Some(rest) = t.strip_prefix("smooth:") {
            let p = parse_poly(rest).map_err(|e| IndexError::BadBranch(e.to_string()))?;
            return Ok(BranchSpec::Smooth(p));
        }
        if let Some(rest) = t.strip_prefix("cusp:") {
            let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(IndexError::BadBranch("expected cusp:a,m,n".into()));
            }
            let a = parse_rational(parts[0]).map_err(|e| IndexError::BadBranch(e.to_string()))?;
            let m: u32 = parts[1]
                .parse()
                .map_err(|_| IndexError::BadBranch("bad exponent m".into()))?;
            let n: u32 = parts[2]
                .parse()
                .map_err(|_| IndexError::BadBranch("bad exponent n".into()))?;
            return Ok(BranchSpec::Cusp { a, m, n });
        }
        Err(IndexError::BadBranch(format!("unrecognized branch '{t}'")))
    }

    /// Defining polynomial, after validating the branch data.
    pub fn defining_poly(&self) -> Result<Poly2<Q>, IndexError> {
        match self {
            BranchSpec::Axis(Axis::X0) => Ok(Poly2::x()),
            BranchSpec::Axis(Axis::Y0) => Ok(Poly2::y()),
            BranchSpec::Smooth(p) => {
                if !p.constant_term().is_zero() {
                    return Err(IndexError::NotOnBranch);
                }
                if p.coeff(1, 0).is_zero() && p.coeff(0, 1).is_zero() {
                    return Err(IndexError::BadBranch(
                        "smooth branch needs a nonzero linear part".into(),
                    ));
                }
                Ok(p.clone())
            }
            BranchSpec::Cusp { a, m, n } => {
                if a.is_zero() {
                    return Err(IndexError::BadBranch(
                        "cusp coefficient must be nonzero".into(),
                    ));
                }
                if *m < 2 || *n < 2 {
                    return Err(IndexError::BadBranch(
                        "cusp exponents must be at least 2; use a smooth branch".into(),
                    ));
                }
                if m.gcd(n) != 1 {
                    return Err(IndexError::BadBranch(
                        "cusp exponents must be coprime".into(),
                    ));
                }
                Ok(Poly2::from_terms([
                    ((*m, 0), a.clone()),
                    ((0, *n), -Q::one()),
                ]))
            }
        }
    }

    /// Rational parametrization `s ↦ (X(s), Y(s))` truncated at `len`.
    fn parametrize(&self, len: usize) -> Result<(Series, Series), IndexError> {
        let s = |len| Series::monomial(Q::one(), 1, len);
        match self {
            BranchSpec::Axis(Axis::X0) => Ok((Series::zero(len), s(len))),
            BranchSpec::Axis(Axis::Y0) => Ok((s(len), Series::zero(len))),
            BranchSpec::Smooth(p) => Ok(smooth_parametrization(p, len)),
            BranchSpec::Cusp { a, m, n } => {
                // a x^m = y^n with x = a^i s^n, y = a^j s^m, j n - i m = 1
                let (i, j) = cusp_exponents(*m, *n);
                let x = Series::monomial(qpow(a, i), *n as usize, len);
                let y = Series::monomial(qpow(a, j), *m as usize, len);
                Ok((x, y))
            }
        }
    }
}

fn qpow(a: &Q, e: u32) -> Q {
    (0..e).fold(Q::one(), |acc, _| acc * a)
}

/// Smallest `i ≥ 0` with `j n − i m = 1` for some integer `j ≥ 0`.
fn cusp_exponents(m: u32, n: u32) -> (u32, u32) {
    for i in 0..n.max(1) {
        let lhs = 1 + i as u64 * m as u64;
        if lhs.is_multiple_of(n as u64) {
            return (i, (lhs / n as u64) as u32);
        }
    }
    unreachable!("m and n are coprime")
}

fn smooth_parametrization(p: &Poly2<Q>, len: usize) -> (Series, Series) {
    let s = Series::monomial(Q::one(), 1, len);
    let cy = p.coeff(0, 1);
    if !cy.is_zero() {
        // x = s, solve p(s, y(s)) = 0
        let inv = cy.recip();
        let mut y = Series::zero(len);
        for _ in 0..len {
            let r = Series::compose(p, &s, &y);
            y = y.sub(&r.scale(&inv));
        }
        (s, y)
    } else {
        let inv = p.coeff(1, 0).recip();
        let mut x = Series::zero(len);
        for _ in 0..len {
            let r = Series::compose(p, &x, &s);
            x = x.sub(&r.scale(&inv));
        }
        (x, s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexSource {
    ClosedForm,
    SeriesOracle,
}

/// Camacho-Sad and Z index of one branch at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexRecord {
    pub cs: Scalar,
    pub z: i64,
    pub source: IndexSource,
}

impl IndexRecord {
    pub fn cs_rational(&self) -> Option<&Q> {
        self.cs.as_rational()
    }
}

/// True when the branch is invariant: exact divisibility `φ | v(φ)`, or, failing
/// that, `v(φ)` vanishing along the parametrized branch to the truncation order.
pub fn is_invariant(v: &PlaneGerm, branch: &BranchSpec, trunc: usize) -> Result<bool, IndexError> {
    let phi = branch.defining_poly()?;
    let vphi = v.apply(&phi);
    if vphi.exact_div(&phi).is_some() {
        return Ok(true);
    }
    let (x, y) = branch.parametrize(trunc)?;
    Ok(Series::compose(&vphi, &x, &y).order().is_none())
}

/// `v(φ)/φ` along the branch.
fn cofactor_on_branch(
    v: &PlaneGerm,
    phi: &Poly2<Q>,
    x: &Series,
    y: &Series,
) -> Result<Series, IndexError> {
    let vphi = v.apply(phi);
    if let Some(k) = vphi.exact_div(phi) {
        return Ok(Series::compose(&k, x, y));
    }
    // v(φ) = k φ gives ∂(vφ) = k ∂φ on the branch
    for (dv, dp) in [(vphi.dx(), phi.dx()), (vphi.dy(), phi.dy())] {
        let dp_s = Series::compose(&dp, x, y);
        if dp_s.order().is_none() {
            continue;
        }
        let dv_s = Series::compose(&dv, x, y);
        let (e, q) = laurent_div(&dv_s, &dp_s).ok_or(IndexError::Degenerate)?;
        if e < 0 {
            return Err(IndexError::NotInvariant);
        }
        let mut c = vec![Q::zero(); e as usize];
        c.extend_from_slice(q.coeffs());
        let n = q.len();
        c.truncate(n);
        return Ok(Series::from_coeffs(c, n));
    }
    Err(IndexError::Degenerate)
}

fn oracle_at(v: &PlaneGerm, branch: &BranchSpec, len: usize) -> Result<(Q, i64), IndexError> {
    let phi = branch.defining_poly()?;
    let (x, y) = branch.parametrize(len)?;
    let k = cofactor_on_branch(v, &phi, &x, &y)?;
    let insufficient = IndexError::TruncationInsufficient { trunc: len };
    let phix = Series::compose(&phi.dx(), &x, &y);
    let qg = Series::compose(v.g(), &x, &y);
    if let (Some(o_phi), Some(o_q)) = (phix.order(), qg.order()) {
        // g = φ_x, h = Q, η = -k dy
        let cs = residue(&k.mul(&y.derivative()), &qg).ok_or(insufficient)?;
        return Ok((cs, o_q as i64 - o_phi as i64));
    }
    let phiy = Series::compose(&phi.dy(), &x, &y);
    let pf = Series::compose(v.f(), &x, &y);
    if let (Some(o_phi), Some(o_p)) = (phiy.order(), pf.order()) {
        // g = φ_y, h = -P, η = k dx
        let cs = residue(&k.mul(&x.derivative()), &pf).ok_or(insufficient)?;
        return Ok((cs, o_p as i64 - o_phi as i64));
    }
    Err(IndexError::Degenerate)
}

/// Indices from the truncated-series decomposition, checked for stability
/// between `trunc` and `trunc + 4`. For a cusp the truncation is raised to
/// at least `2mn`, since the parametrization multiplies orders by up to `mn`.
pub fn series_oracle_cs_z(
    v: &PlaneGerm,
    branch: &BranchSpec,
    trunc: usize,
) -> Result<IndexRecord, IndexError> {
    let trunc = match branch {
        BranchSpec::Cusp { m, n, .. } => trunc.max(2 * (*m as usize) * (*n as usize)),
        _ => trunc,
    };
    if !is_invariant(v, branch, trunc)? {
        return Err(IndexError::NotInvariant);
    }
    let a = oracle_at(v, branch, trunc)?;
    let b = oracle_at(v, branch, trunc + 4)?;
    if a != b {
        return Err(IndexError::TruncationInsufficient { trunc });
    }
    Ok(IndexRecord {
        cs: Scalar::from(a.0),
        z: a.1,
        source: IndexSource::SeriesOracle,
    })
}

/// Eigenvalue of the linear part along the tangent direction of a smooth
/// branch, when that direction is an eigenvector.
fn tangent_eigenvalue(v: &PlaneGerm, phi: &Poly2<Q>) -> Option<Q> {
    let [[a, b], [c, d]] = linear_part(v);
    let w = (-phi.coeff(0, 1), phi.coeff(1, 0));
    let lw = (&a * &w.0 + &b * &w.1, &c * &w.0 + &d * &w.1);
    // parallel check: lw × w = 0
    if !(&lw.0 * &w.1 - &lw.1 * &w.0).is_zero() {
        return None;
    }
    Some(if !w.0.is_zero() {
        &lw.0 / &w.0
    } else {
        &lw.1 / &w.1
    })
}

/// Closed-form indices, falling back to the series oracle outside the table.
pub fn indices(v: &PlaneGerm, branch: &BranchSpec) -> Result<IndexRecord, IndexError> {
    indices_with(v, branch, DEFAULT_TRUNC)
}

pub fn indices_with(
    v: &PlaneGerm,
    branch: &BranchSpec,
    trunc: usize,
) -> Result<IndexRecord, IndexError> {
    let phi = branch.defining_poly()?;
    if !is_invariant(v, branch, trunc)? {
        return Err(IndexError::NotInvariant);
    }
    let closed = |cs: Q, z: i64| IndexRecord {
        cs: Scalar::from(cs),
        z,
        source: IndexSource::ClosedForm,
    };
    if !v.is_singular_at_origin() {
        return Ok(closed(Q::zero(), 0));
    }
    let class = classify_at_origin(v);
    match branch {
        BranchSpec::Axis(_) | BranchSpec::Smooth(_) => {
            if let Some(mt) = tangent_eigenvalue(v, &phi) {
                if !mt.is_zero() {
                    let mn = &class.trace - &mt;
                    return Ok(closed(mn / mt, 1));
                }
            }
        }
        BranchSpec::Cusp { m, n, .. } => {
            let [[a, b], [c, d]] = linear_part(v);
            if b.is_zero() && c.is_zero() && !a.is_zero() {
                let ratio = &d / &a;
                if ratio == Q::new((*m).into(), (*n).into()) {
                    let (m, n) = (*m as i64, *n as i64);
                    return Ok(closed(
                        Q::from_integer((m * n).into()),
                        1 - (m - 1) * (n - 1),
                    ));
                }
            }
        }
    }
    series_oracle_cs_z(v, branch, trunc)
}

pub fn camacho_sad(v: &PlaneGerm, branch: &BranchSpec) -> Result<Scalar, IndexError> {
    indices(v, branch).map(|r| r.cs)
}

pub fn z_index(v: &PlaneGerm, branch: &BranchSpec) -> Result<i64, IndexError> {
    indices(v, branch).map(|r| r.z)
}

/// Tangency order of the non-invariant curve `f = 0` at `(px, py)`: the
/// intersection multiplicity of `f` and `v(f)` there.
pub fn tangency_order(v: &PlaneGerm, f: &Poly2<Q>, px: &Q, py: &Q) -> Result<u64, IndexError> {
    if !f.eval(px, py).is_zero() {
        return Err(IndexError::NotOnCurve);
    }
    let vf = v.apply(f);
    if vf.exact_div(f).is_some() {
        return Err(IndexError::CurveInvariant);
    }
    let ft = f.translate(px, py);
    let vt = vf.translate(px, py);
    intersection_multiplicity(&ft, &vt).ok_or(IndexError::CurveInvariant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qi};

    fn germ(s: &str) -> PlaneGerm {
        PlaneGerm::parse(s).unwrap()
    }

    fn rec(cs: Q, z: i64) -> (Scalar, i64) {
        (Scalar::from(cs), z)
    }

    fn pair(r: IndexRecord) -> (Scalar, i64) {
        (r.cs, r.z)
    }

    #[test]
    fn axis_closed_forms() {
        let v = germ("x*dx - 3/2*y*dy");
        let y0 = BranchSpec::Axis(Axis::Y0);
        let x0 = BranchSpec::Axis(Axis::X0);
        assert_eq!(camacho_sad(&v, &y0).unwrap(), Scalar::from(q(-3, 2)));
        assert_eq!(camacho_sad(&v, &x0).unwrap(), Scalar::from(q(-2, 3)));
        assert_eq!(z_index(&v, &x0).unwrap(), 1);
        assert_eq!(indices(&v, &y0).unwrap().source, IndexSource::ClosedForm);
    }

    #[test]
    fn saddle_node_separatrices() {
        // strong separatrix y = 0, weak separatrix x = 0
        let sn = germ("x^2*dx + (y + 3*x*y)*dy");
        let strong = indices(&sn, &BranchSpec::Axis(Axis::X0)).unwrap();
        assert_eq!(pair(strong), rec(qi(0), 1));
        let weak = indices(&sn, &BranchSpec::Axis(Axis::Y0)).unwrap();
        assert_eq!(weak.source, IndexSource::SeriesOracle);
        // x^{k+1} ∂x + y(1 + ν x^k) ∂y with k = 1, ν = 3: CS = ν, Z = k + 1
        assert_eq!(pair(weak), rec(qi(3), 2));
        // x ∂x + y^2 ∂y: y = 0 is the strong separatrix
        let v = germ("x*dx + y^2*dy");
        assert_eq!(
            pair(indices(&v, &BranchSpec::Axis(Axis::Y0)).unwrap()),
            rec(qi(0), 1)
        );
    }

    #[test]
    fn cusp_closed_form_and_oracle() {
        let v = germ("2*x*dx + 3*y*dy");
        let cusp = BranchSpec::Cusp {
            a: qi(1),
            m: 3,
            n: 2,
        };
        let r = indices(&v, &cusp).unwrap();
        assert_eq!(r.source, IndexSource::ClosedForm);
        assert_eq!(pair(r), rec(qi(6), -1));
        let o = series_oracle_cs_z(&v, &cusp, DEFAULT_TRUNC).unwrap();
        assert_eq!(pair(o), rec(qi(6), -1));
        let wrong = BranchSpec::Cusp {
            a: qi(1),
            m: 2,
            n: 3,
        };
        assert_eq!(indices(&v, &wrong), Err(IndexError::NotInvariant));
        let bad = BranchSpec::Cusp {
            a: qi(1),
            m: 2,
            n: 1,
        };
        assert!(matches!(indices(&v, &bad), Err(IndexError::BadBranch(_))));
    }

    #[test]
    fn oracle_on_axes() {
        let v = germ("x*dx - 2*y*dy");
        let o = series_oracle_cs_z(&v, &BranchSpec::Axis(Axis::Y0), 16).unwrap();
        assert_eq!(pair(o), rec(qi(-2), 1));
        let o = series_oracle_cs_z(&v, &BranchSpec::Axis(Axis::X0), 16).unwrap();
        assert_eq!(pair(o), rec(q(-1, 2), 1));
    }

    #[test]
    fn smooth_branch() {
        // x ∂x + 2 y ∂y leaves y = x^2 invariant
        let v = germ("x*dx + 2*y*dy");
        let b = BranchSpec::parse("smooth:y - x^2").unwrap();
        let r = indices(&v, &b).unwrap();
        assert_eq!(pair(r.clone()), rec(qi(2), 1));
        let o = series_oracle_cs_z(&v, &b, DEFAULT_TRUNC).unwrap();
        assert_eq!(pair(o), pair(r));
    }

    #[test]
    fn nonsingular_point() {
        let v = germ("dy");
        let r = indices(&v, &BranchSpec::Axis(Axis::X0)).unwrap();
        assert_eq!(pair(r), rec(qi(0), 0));
    }

    #[test]
    fn tangency_examples() {
        let o = qi(0);
        let v = germ("dx");
        assert_eq!(tangency_order(&v, &Poly2::x(), &o, &o), Ok(0));
        let para = parse_poly("y - x^2").unwrap();
        assert_eq!(tangency_order(&v, &para, &o, &o), Ok(1));
        let v = germ("x*dx + 3*y*dy");
        let diag = parse_poly("x - y").unwrap();
        assert_eq!(tangency_order(&v, &diag, &o, &o), Ok(1));
        assert_eq!(
            tangency_order(&v, &Poly2::x(), &o, &o),
            Err(IndexError::CurveInvariant)
        );
        assert_eq!(
            tangency_order(&v, &diag, &qi(1), &o),
            Err(IndexError::NotOnCurve)
        );
    }

    #[test]
    fn branch_parsing() {
        assert_eq!(
            BranchSpec::parse("x=0").unwrap(),
            BranchSpec::Axis(Axis::X0)
        );
        assert_eq!(
            BranchSpec::parse("cusp:1/2,3,2").unwrap(),
            BranchSpec::Cusp {
                a: q(1, 2),
                m: 3,
                n: 2
            }
        );
        assert!(BranchSpec::parse("z=0").is_err());
    }
}
