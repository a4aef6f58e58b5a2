//! Cyclic quotient singularities `1/n(1,q)`: Hirzebruch-Jung expansions, the
//! toric resolution charts, and the diagonal field `x∂x + λy∂y` pushed to
//! each chart.

use std::fmt;

use num_integer::Integer;
use num_traits::Signed;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::dualgraph::{Annotation, AnnotationKind, CurveNode, DualGraph, Edge, GraphError};
use crate::germ::{classify_at_origin, ClassKind, PlaneGerm};
use crate::localindex::{indices, Axis, BranchSpec, IndexError};
use crate::poly::Poly2;
use crate::scalar::{serde_q, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuotError {
    #[error("need 0 < q < n with gcd(n, q) = 1, got n = {n}, q = {q}")]
    BadType { n: i64, q: i64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Index(#[from] IndexError),
}

/// The action `ζ·(x, y) = (ζx, ζ^q y)` of the `n`-th roots of unity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuotSingularity {
    pub n: i64,
    pub q: i64,
}

impl QuotSingularity {
    pub fn new(n: i64, q: i64) -> Result<Self, QuotError> {
        if n < 2 || q <= 0 || q >= n || n.gcd(&q) != 1 {
            return Err(QuotError::BadType { n, q });
        }
        Ok(QuotSingularity { n, q })
    }
}

/// `a_1 − 1/(a_2 − 1/(…))` for integers `a_i ≥ 2`.
pub fn continued_fraction_value(a: &[i64]) -> Option<Q> {
    let mut it = a.iter().rev();
    let mut acc = Q::from_integer((*it.next()?).into());
    for &x in it {
        acc = Q::from_integer(x.into()) - acc.recip();
    }
    Some(acc)
}

/// Minus-sign continued fraction of `p/q > 1`.
pub fn minus_continued_fraction(mut p: i64, mut q: i64) -> Vec<i64> {
    let mut out = Vec::new();
    while q > 0 {
        let a = Integer::div_ceil(&p, &q);
        out.push(a);
        let r = a * q - p;
        p = q;
        q = r;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HJData {
    /// `n/q = [b_1, …, b_r]`; the curves have self-intersection `−b_i`.
    pub res_chain: Vec<i64>,
    /// `n/(n−q) = [a_1, …, a_k]`.
    pub edim_chain: Vec<i64>,
    /// `k + 2`.
    pub edim_bound: usize,
}

pub fn hj_expand(n: i64, q: i64) -> Result<HJData, QuotError> {
    let s = QuotSingularity::new(n, q)?;
    let res_chain = minus_continued_fraction(s.n, s.q);
    let edim_chain = minus_continued_fraction(s.n, s.n - s.q);
    debug_assert_eq!(
        continued_fraction_value(&res_chain),
        Some(Q::new(n.into(), q.into()))
    );
    debug_assert_eq!(
        continued_fraction_value(&edim_chain),
        Some(Q::new(n.into(), (n - q).into()))
    );
    let k = edim_chain.len();
    Ok(HJData {
        res_chain,
        edim_chain,
        edim_bound: k + 2,
    })
}

/// `constant + lambda·λ` with integer coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinearForm {
    pub constant: i64,
    pub lambda: i64,
}

impl LinearForm {
    pub fn eval(&self, l: &Q) -> Q {
        Q::from_integer(self.constant.into()) + Q::from_integer(self.lambda.into()) * l
    }

    /// The root in λ, when the λ-coefficient is nonzero.
    pub fn root(&self) -> Option<Q> {
        (self.lambda != 0).then(|| Q::new((-self.constant).into(), self.lambda.into()))
    }
}

fn lambda_term(c: i64) -> String {
    match c.abs() {
        1 => "λ".into(),
        k => format!("{k}λ"),
    }
}

impl fmt::Display for LinearForm {
    /// Positive term first: `λ − 4`, `4 − λ`, `7λ`, `7`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = (self.constant, self.lambda);
        match (a, b) {
            (a, 0) => write!(f, "{a}"),
            (0, b) if b > 0 => write!(f, "{}", lambda_term(b)),
            (0, b) => write!(f, "-{}", lambda_term(b)),
            (a, b) if b > 0 && a > 0 => write!(f, "{} + {a}", lambda_term(b)),
            (a, b) if b > 0 => write!(f, "{} - {}", lambda_term(b), -a),
            (a, b) if a > 0 => write!(f, "{a} - {}", lambda_term(b)),
            (a, b) => write!(f, "-{} - {}", lambda_term(b), -a),
        }
    }
}

impl Serialize for LinearForm {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

/// The field `x∂x + λy∂y` in chart `c`: `(ξ-form) ξ∂ξ + (η-form) η∂η` with
/// `ξ = x^α y^β`, `η = x^γ y^δ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChartField {
    pub chart: usize,
    pub xi: (i64, i64),
    pub eta: (i64, i64),
    pub xi_coeff: LinearForm,
    pub eta_coeff: LinearForm,
}

impl ChartField {
    pub fn render(&self) -> String {
        let c = self.chart;
        let term = |form: &LinearForm, var: &str| {
            let s = form.to_string();
            if form.constant != 0 && form.lambda != 0 {
                format!("({s}){var}{c}∂{var}{c}")
            } else {
                format!("{s}{var}{c}∂{var}{c}")
            }
        };
        format!(
            "∂{c} = {} + {}",
            term(&self.xi_coeff, "ξ"),
            term(&self.eta_coeff, "η")
        )
    }

    pub fn monomials(&self) -> String {
        let mono = |(a, b): (i64, i64)| {
            let mut parts = Vec::new();
            for (v, e) in [("x", a), ("y", b)] {
                match e {
                    0 => {}
                    1 => parts.push(v.to_string()),
                    e => parts.push(format!("{v}^{e}")),
                }
            }
            if parts.is_empty() {
                "1".into()
            } else {
                parts.join("*")
            }
        };
        format!(
            "ξ{c} = {}, η{c} = {}",
            mono(self.xi),
            mono(self.eta),
            c = self.chart
        )
    }

    /// The linear field `a ξ∂ξ + b η∂η` at a given λ, saturated.
    pub fn germ_at(&self, l: &Q) -> PlaneGerm {
        let a = self.xi_coeff.eval(l);
        let b = self.eta_coeff.eval(l);
        // the two forms are independent, so they never vanish together
        PlaneGerm::new(Poly2::monomial(a, 1, 0), Poly2::monomial(b, 0, 1)).expect("nonzero field")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveInvariance {
    pub curve: usize,
    pub self_int: i64,
    /// The λ at which this curve stops being invariant.
    #[serde(with = "serde_q")]
    pub lambda_j: Q,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariant: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotCharts {
    pub singularity: QuotSingularity,
    pub hj: HJData,
    /// Scaled fan rays `R_i = n ρ_i`, from `(0, n)` to `(n, 0)`.
    pub rays: Vec<(i64, i64)>,
    pub fields: Vec<ChartField>,
    pub curves: Vec<CurveInvariance>,
    /// Chart-to-chart exponent transitions, each of determinant ±1.
    pub transitions: Vec<[[i64; 2]; 2]>,
}

fn rays(s: &QuotSingularity, b: &[i64]) -> Vec<(i64, i64)> {
    let mut r = vec![(0, s.n), (1, s.q)];
    for &bi in b {
        let k = r.len();
        let (p, c) = (r[k - 2], r[k - 1]);
        r.push((bi * c.0 - p.0, bi * c.1 - p.1));
    }
    debug_assert_eq!(*r.last().unwrap(), (s.n, 0));
    r
}

/// Dual basis of `(ρ_c, ρ_{c+1})`, where `R = nρ`.
fn dual_basis(n: i64, rc: (i64, i64), rd: (i64, i64)) -> ((i64, i64), (i64, i64)) {
    let det = rc.0 * rd.1 - rc.1 * rd.0;
    // m solves [rc; rd] m = (n, 0) resp. (0, n)
    let xi = (n * rd.1 / det, -n * rd.0 / det);
    let eta = (-n * rc.1 / det, n * rc.0 / det);
    (xi, eta)
}

fn form_of(m: (i64, i64)) -> LinearForm {
    LinearForm {
        constant: m.0,
        lambda: m.1,
    }
}

/// Exponent matrix `T` with `(ξ_c, η_c) = T · (ξ_{c+1}, η_{c+1})` on exponents.
fn transition(a: &ChartField, b: &ChartField) -> [[i64; 2]; 2] {
    let m = [[b.xi.0, b.xi.1], [b.eta.0, b.eta.1]];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let inv = [[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]];
    let row = |v: (i64, i64)| {
        [
            (v.0 * inv[0][0] + v.1 * inv[1][0]) / det,
            (v.0 * inv[0][1] + v.1 * inv[1][1]) / det,
        ]
    };
    [row(a.xi), row(a.eta)]
}

/// Chart fields for `x∂x + λy∂y` on the minimal resolution of `1/n(1,q)`;
/// with `lambda` given, also decides which curves are invariant.
pub fn quotient_foliation_charts(
    s: QuotSingularity,
    lambda: Option<&Q>,
) -> Result<QuotCharts, QuotError> {
    let hj = hj_expand(s.n, s.q)?;
    let rays = rays(&s, &hj.res_chain);
    let fields: Vec<ChartField> = (0..rays.len() - 1)
        .map(|c| {
            let (xi, eta) = dual_basis(s.n, rays[c], rays[c + 1]);
            ChartField {
                chart: c,
                xi,
                eta,
                xi_coeff: form_of(xi),
                eta_coeff: form_of(eta),
            }
        })
        .collect();
    let curves = (1..rays.len() - 1)
        .map(|j| {
            // E_j = {η_{j−1} = 0}; it is a leaf unless the ξ_{j−1} coefficient vanishes
            let form = fields[j - 1].xi_coeff;
            let lambda_j = form.root().expect("rays have nonzero x-part");
            CurveInvariance {
                curve: j,
                self_int: -hj.res_chain[j - 1],
                lambda_j: lambda_j.clone(),
                invariant: lambda.map(|l| *l != lambda_j),
            }
        })
        .collect();
    let transitions = fields
        .windows(2)
        .map(|w| transition(&w[0], &w[1]))
        .collect();
    Ok(QuotCharts {
        singularity: s,
        hj,
        rays,
        fields,
        curves,
        transitions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainProfile {
    #[serde(with = "serde_q")]
    pub lambda: Q,
    /// λ is not a positive rational; the chain is then an ordinary reduced one.
    pub lambda_not_positive: bool,
    pub non_invariant: Option<usize>,
    pub non_reduced_points: Vec<String>,
    pub graph: DualGraph,
}

/// Dual-graph fragment of the resolution with the induced foliation: one node
/// per exceptional curve, one annotated point per chart origin.
pub fn generalized_chain_profile(
    s: QuotSingularity,
    lambda: &Q,
) -> Result<ChainProfile, QuotError> {
    let charts = quotient_foliation_charts(s, Some(lambda))?;
    let r = charts.curves.len();
    let invariant: Vec<bool> = charts
        .curves
        .iter()
        .map(|c| c.invariant == Some(true))
        .collect();
    let mut nodes: Vec<CurveNode> = charts
        .curves
        .iter()
        .map(|c| CurveNode {
            id: c.curve,
            self_int: c.self_int,
            genus: 0,
            invariant: invariant[c.curve - 1],
            z_total: invariant[c.curve - 1].then_some(0),
            sing_annotations: Some(vec![]),
            tang_total: (!invariant[c.curve - 1]).then_some(0),
            chi: None,
        })
        .collect();
    let mut non_reduced = Vec::new();
    for f in &charts.fields {
        let c = f.chart;
        let germ = f.germ_at(lambda);
        let class = classify_at_origin(&germ);
        let point = format!("q{c}");
        let kind = match class.kind {
            ClassKind::NonSingular => AnnotationKind::NonSingular,
            ClassKind::SaddleNode => AnnotationKind::SaddleNode,
            ClassKind::NonDegenerate if class.reduced => AnnotationKind::ReducedNonDegenerate,
            _ => AnnotationKind::NonReduced,
        };
        if kind == AnnotationKind::NonReduced {
            non_reduced.push(point.clone());
        }
        // chart c meets E_c along ξ_c = 0 and E_{c+1} along η_c = 0
        let on = [(c, Axis::X0), (c + 1, Axis::Y0)];
        for (j, axis) in on {
            if j == 0 || j > r {
                continue;
            }
            let node = &mut nodes[j - 1];
            let mut ann = Annotation {
                point: point.clone(),
                kind,
                lambda: class.lambda().cloned(),
                cs: None,
                z: None,
            };
            if node.invariant {
                let rec = indices(&germ, &BranchSpec::Axis(axis))?;
                *node.z_total.as_mut().unwrap() += rec.z;
                ann.cs = Some(rec.cs);
                ann.z = Some(rec.z);
            } else {
                let t = match axis {
                    Axis::X0 => germ.f().at_x0().ord(),
                    Axis::Y0 => germ.g().at_y0().ord(),
                };
                *node.tang_total.as_mut().unwrap() += t.map_or(0, |o| o as u64);
            }
            if class.is_singular() || !node.invariant {
                node.sing_annotations.as_mut().unwrap().push(ann);
            }
        }
    }
    let edges = (1..r)
        .map(|j| Edge {
            a: j,
            b: j + 1,
            multiplicity: 1,
        })
        .collect();
    let graph = DualGraph::new(nodes, edges)?;
    let non_inv = charts
        .curves
        .iter()
        .find(|c| c.invariant == Some(false))
        .map(|c| c.curve);
    Ok(ChainProfile {
        lambda: lambda.clone(),
        lambda_not_positive: !lambda.is_positive(),
        non_invariant: non_inv,
        non_reduced_points: non_reduced,
        graph,
    })
}

/// Exact check that the expansions recompose to `n/q` and `n/(n−q)`.
pub fn recomposes(n: i64, q: i64) -> bool {
    match hj_expand(n, q) {
        Ok(h) => {
            continued_fraction_value(&h.res_chain) == Some(Q::new(n.into(), q.into()))
                && continued_fraction_value(&h.edim_chain) == Some(Q::new(n.into(), (n - q).into()))
                && h.res_chain.iter().chain(&h.edim_chain).all(|&a| a >= 2)
        }
        Err(_) => false,
    }
}
