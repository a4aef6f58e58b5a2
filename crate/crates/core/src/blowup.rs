//! Point blowups of plane germs and the reduction driver that blows up
//! non-reduced points until every singularity on the exceptional locus is
//! reduced (or semi-reduced, on request).

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dualgraph::{
    classify_component, flank_is_f_chain, Annotation, AnnotationKind, ComponentClass, CurveNode,
    DualGraph, Edge, GraphError,
};
use crate::germ::{classify_at_origin, ClassKind, PlaneGerm, SingularityClass};
use crate::lattice::LatticeError;
use crate::localindex::{indices, Axis, BranchSpec, IndexError, IndexRecord};
use crate::poly::{rational_roots, Poly2, UPoly};
use crate::scalar::{fmt_q, serde_q, Scalar, Q};

pub const DEFAULT_MAX_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BlowupError {
    #[error("depth {depth} exhausted while reducing {germ}")]
    DepthExhausted { depth: usize, germ: String },
    #[error("singular points of {germ} on the exceptional curve are not rational: {residual}")]
    IrrationalCenter { germ: String, residual: String },
    #[error("max_depth must be at least 1")]
    BadDepth,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Which points count as finished.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopCriterion {
    #[default]
    Reduced,
    SemiReduced,
}

impl FromStr for StopCriterion {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reduced" => Ok(StopCriterion::Reduced),
            "semi-reduced" | "semi_reduced" => Ok(StopCriterion::SemiReduced),
            other => Err(format!("unknown stop criterion {other:?}")),
        }
    }
}

impl StopCriterion {
    fn is_final(self, c: &SingularityClass) -> bool {
        match self {
            StopCriterion::Reduced => !c.is_singular() || c.reduced,
            StopCriterion::SemiReduced => !c.is_singular() || c.semi_reduced,
        }
    }
}

/// Saturated germ in one blowup chart. Chart 1 is `x = x', y = x'y'` with
/// exceptional curve `x' = 0`; chart 2 is `x = x'y', y = y'` with `y' = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartGerm {
    pub germ: PlaneGerm,
    pub chart_id: u8,
    /// Power of the exceptional coordinate divided out.
    pub saturation_order: u32,
}

impl ChartGerm {
    pub fn exceptional_axis(&self) -> Axis {
        if self.chart_id == 1 {
            Axis::X0
        } else {
            Axis::Y0
        }
    }

    /// The exceptional curve is invariant iff its coordinate divides the normal component.
    pub fn exceptional_invariant(&self) -> bool {
        if self.chart_id == 1 {
            self.germ.f().x_valuation().is_none_or(|v| v >= 1)
        } else {
            self.germ.g().y_valuation().is_none_or(|v| v >= 1)
        }
    }
}

/// Outcome of one blowup of the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PointBlowup {
    pub chart1: ChartGerm,
    pub chart2: ChartGerm,
    pub invariant: bool,
    /// The center was not a singular point.
    pub nonsingular_center: bool,
}

fn divide_out(a: Poly2<Q>, b: Poly2<Q>, chart: u8) -> (PlaneGerm, u32) {
    let val = |p: &Poly2<Q>| {
        if chart == 1 {
            p.x_valuation()
        } else {
            p.y_valuation()
        }
    };
    let k = match (val(&a), val(&b)) {
        (Some(u), Some(v)) => u.min(v),
        (Some(u), None) | (None, Some(u)) => u,
        (None, None) => 0,
    };
    let (sx, sy) = if chart == 1 { (k, 0) } else { (0, k) };
    let a = a.unshift_monomial(sx, sy).expect("valuation divides");
    let b = b.unshift_monomial(sx, sy).expect("valuation divides");
    let germ = PlaneGerm::new(a, b).expect("pullback of a nonzero field is nonzero");
    (germ, k)
}

/// Blows up the origin and saturates both chart fields.
pub fn blow_up_origin(v: &PlaneGerm) -> PointBlowup {
    // chart 1: x = x1, y = x1 y1 gives x1 (F, (G - y1 F)/x1)
    let f1 = v.f().chart1_substitute();
    let g1 = v.g().chart1_substitute();
    let a1 = f1.mul(&Poly2::x());
    let b1 = g1.sub(&f1.mul(&Poly2::y()));
    let (germ1, k1) = divide_out(a1, b1, 1);
    // chart 2: x = x2 y2, y = y2 gives ((F - x2 G)/y2, G) times y2
    let f2 = v.f().chart2_substitute();
    let g2 = v.g().chart2_substitute();
    let a2 = f2.sub(&g2.mul(&Poly2::x()));
    let b2 = g2.mul(&Poly2::y());
    let (germ2, k2) = divide_out(a2, b2, 2);
    let chart1 = ChartGerm {
        germ: germ1,
        chart_id: 1,
        saturation_order: k1,
    };
    let chart2 = ChartGerm {
        germ: germ2,
        chart_id: 2,
        saturation_order: k2,
    };
    let invariant = chart1.exceptional_invariant();
    debug_assert_eq!(invariant, chart2.exceptional_invariant());
    debug_assert_eq!(k1, k2);
    PointBlowup {
        chart1,
        chart2,
        invariant,
        nonsingular_center: !v.is_singular_at_origin(),
    }
}

/// Checks that a chart field pushes forward to a multiple of `v` on the chart domain.
pub fn chart_consistent(v: &PlaneGerm, chart: &ChartGerm) -> bool {
    let (a, b) = (chart.germ.f(), chart.germ.g());
    let (x, y) = (Poly2::<Q>::x(), Poly2::<Q>::y());
    if chart.chart_id == 1 {
        let f = v.f().chart1_substitute();
        let g = v.g().chart1_substitute();
        let ydot = y.mul(a).add(&x.mul(b));
        a.mul(&g).sub(&ydot.mul(&f)).is_zero()
    } else {
        let f = v.f().chart2_substitute();
        let g = v.g().chart2_substitute();
        let xdot = y.mul(a).add(&x.mul(b));
        xdot.mul(&g).sub(&b.mul(&f)).is_zero()
    }
}

/// Where a point sits relative to the center it came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartPath {
    pub parent: Option<usize>,
    pub chart: u8,
    #[serde(with = "serde_q")]
    pub x: Q,
    #[serde(with = "serde_q")]
    pub y: Q,
}

/// A blown-up point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CenterNode {
    pub id: usize,
    pub path: ChartPath,
    pub depth: usize,
    pub germ: String,
    pub class: SingularityClass,
    pub saturation_order: u32,
    pub nonsingular_center: bool,
    /// Exceptional curves passing through the center before the blowup.
    pub curves_through: Vec<usize>,
    pub created_curve: usize,
}

/// A point left on the exceptional locus after reduction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinalPoint {
    pub id: String,
    pub path: ChartPath,
    pub germ: String,
    pub class: SingularityClass,
    /// Curve through the point along `x = 0` in local coordinates.
    pub curve_on_x0: Option<usize>,
    /// Curve through the point along `y = 0` in local coordinates.
    pub curve_on_y0: Option<usize>,
    #[serde(skip)]
    local: Option<PlaneGerm>,
}

impl FinalPoint {
    pub fn curves(&self) -> Vec<usize> {
        self.curve_on_x0
            .iter()
            .chain(&self.curve_on_y0)
            .copied()
            .collect()
    }

    pub fn local_germ(&self) -> Option<&PlaneGerm> {
        self.local.as_ref()
    }

    fn axis_of(&self, curve: usize) -> Axis {
        if self.curve_on_x0 == Some(curve) {
            Axis::X0
        } else {
            Axis::Y0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointIndex {
    pub point: String,
    pub record: IndexRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExceptionalCurve {
    pub id: usize,
    pub self_int: i64,
    pub invariant: bool,
    pub created_at: usize,
    /// Singular points on the curve with their classes.
    pub singular_points: Vec<(String, SingularityClass)>,
    /// Camacho-Sad and Z indices at each tracked point (invariant curves).
    pub indices: Vec<PointIndex>,
    /// Nonzero tangency orders at tracked points (non-invariant curves).
    pub tangency_points: Vec<(String, u64)>,
    pub tang_total: Option<u64>,
    pub z_total: Option<i64>,
    pub cs_total: Option<Scalar>,
    #[serde(with = "serde_q")]
    pub foliated_discrepancy: Q,
    #[serde(with = "serde_q")]
    pub ordinary_discrepancy: Q,
    /// Tangency contributed by points never tracked by the driver.
    #[serde(skip)]
    tang_untracked: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Incidence {
    pub center: usize,
    pub curves: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolutionForest {
    pub input: String,
    pub stop: StopCriterion,
    pub depth: usize,
    pub nodes: Vec<CenterNode>,
    pub curves: Vec<ExceptionalCurve>,
    pub points: Vec<FinalPoint>,
    pub incidence: Vec<Incidence>,
    #[serde(skip)]
    root_class: Option<SingularityClass>,
}

struct Pending {
    germ: PlaneGerm,
    path: ChartPath,
    depth: usize,
    on_x0: Option<usize>,
    on_y0: Option<usize>,
}

/// Order of `p(0, y)` at `y = 0` (the intersection number with `x = 0`).
fn ord_on_x0(p: &Poly2<Q>) -> u64 {
    p.at_x0().ord().map_or(u64::MAX, |o| o as u64)
}

fn ord_on_y0(p: &Poly2<Q>) -> u64 {
    p.at_y0().ord().map_or(u64::MAX, |o| o as u64)
}

/// Tangency of the non-invariant axis curve with the field at the origin.
fn axis_tangency(germ: &PlaneGerm, axis: Axis) -> u64 {
    match axis {
        Axis::X0 => ord_on_x0(germ.f()),
        Axis::Y0 => ord_on_y0(germ.g()),
    }
}

/// Strips all rational roots (with multiplicity) and returns them with the residual factor.
fn split_rational(p: &UPoly<Q>) -> (Vec<Q>, UPoly<Q>) {
    let mut rest = p.clone();
    let roots = rational_roots(p);
    for r in &roots {
        let lin = UPoly::new(vec![-r.clone(), Q::one()]);
        while let Some(qt) = rest.exact_div(&lin) {
            rest = qt;
        }
    }
    (roots, rest)
}

/// Full reduction of the origin of `v`.
pub fn seidenberg_reduce(
    v: &PlaneGerm,
    max_depth: usize,
    stop: StopCriterion,
) -> Result<ResolutionForest, BlowupError> {
    if max_depth == 0 {
        return Err(BlowupError::BadDepth);
    }
    let root_class = classify_at_origin(v);
    let mut forest = ResolutionForest {
        input: v.render(),
        stop,
        depth: 0,
        nodes: vec![],
        curves: vec![],
        points: vec![],
        incidence: vec![],
        root_class: Some(root_class),
    };
    let mut queue = VecDeque::new();
    queue.push_back(Pending {
        germ: v.clone(),
        path: ChartPath {
            parent: None,
            chart: 0,
            x: Q::zero(),
            y: Q::zero(),
        },
        depth: 0,
        on_x0: None,
        on_y0: None,
    });
    while let Some(p) = queue.pop_front() {
        let class = classify_at_origin(&p.germ);
        if stop.is_final(&class) {
            if p.depth > 0 {
                let id = format!("p{}", forest.points.len());
                forest.points.push(FinalPoint {
                    id,
                    path: p.path,
                    germ: p.germ.render(),
                    class,
                    curve_on_x0: p.on_x0,
                    curve_on_y0: p.on_y0,
                    local: Some(p.germ),
                });
            }
            continue;
        }
        if p.depth >= max_depth {
            return Err(BlowupError::DepthExhausted {
                depth: max_depth,
                germ: p.germ.render(),
            });
        }
        blow_up_pending(&mut forest, &mut queue, p, class)?;
    }
    finalize(&mut forest)?;
    Ok(forest)
}

fn blow_up_pending(
    forest: &mut ResolutionForest,
    queue: &mut VecDeque<Pending>,
    p: Pending,
    class: SingularityClass,
) -> Result<(), BlowupError> {
    let b = blow_up_origin(&p.germ);
    let node_id = forest.nodes.len();
    let e = forest.curves.len();
    let through: Vec<usize> = p.on_x0.iter().chain(&p.on_y0).copied().collect();
    for &c in &through {
        forest.curves[c].self_int -= 1;
    }
    let k = b.chart1.saturation_order as i64;
    let fol: Q = Q::from_integer((1 - k).into())
        + through
            .iter()
            .map(|&c| forest.curves[c].foliated_discrepancy.clone())
            .sum::<Q>();
    let ord: Q = Q::one()
        + through
            .iter()
            .map(|&c| forest.curves[c].ordinary_discrepancy.clone())
            .sum::<Q>();
    let depth = p.depth + 1;
    forest.depth = forest.depth.max(depth);
    forest.nodes.push(CenterNode {
        id: node_id,
        path: p.path,
        depth: p.depth,
        germ: p.germ.render(),
        class,
        saturation_order: b.chart1.saturation_order,
        nonsingular_center: b.nonsingular_center,
        curves_through: through.clone(),
        created_curve: e,
    });
    forest.incidence.push(Incidence {
        center: node_id,
        curves: through,
    });

    let g1 = &b.chart1.germ;
    let g2 = &b.chart2.germ;
    let common = g1.f().at_x0().gcd(&g1.g().at_x0());
    let (roots, residual) = split_rational(&common);
    if residual.degree().is_some_and(|d| d > 0) {
        return Err(BlowupError::IrrationalCenter {
            germ: p.germ.render(),
            residual: residual.render_in("y"),
        });
    }
    // creation tangency on a non-invariant curve: all finite points of chart 1
    // plus the chart 2 origin
    let tang_creation = if b.invariant {
        0
    } else {
        g1.f().at_x0().degree().unwrap_or(0) as u64 + ord_on_y0(g2.g())
    };
    let mut tang_pushed = 0u64;
    let mut push = |germ: PlaneGerm, chart: u8, x: Q, y: Q, on_x0, on_y0, axis: Axis| {
        if !b.invariant {
            tang_pushed += axis_tangency(&germ, axis);
        }
        queue.push_back(Pending {
            germ,
            path: ChartPath {
                parent: Some(node_id),
                chart,
                x,
                y,
            },
            depth,
            on_x0,
            on_y0,
        });
    };
    // chart 1 origin lies on E and on the old y = 0 curve
    if g1.is_singular_at_origin() || p.on_y0.is_some() {
        push(
            g1.clone(),
            1,
            Q::zero(),
            Q::zero(),
            Some(e),
            p.on_y0,
            Axis::X0,
        );
    }
    for c in roots.into_iter().filter(|c| !c.is_zero()) {
        let local = g1.translate(&Q::zero(), &c);
        push(local, 1, Q::zero(), c, Some(e), None, Axis::X0);
    }
    // chart 2 origin lies on E and on the old x = 0 curve
    if g2.is_singular_at_origin() || p.on_x0.is_some() {
        push(
            g2.clone(),
            2,
            Q::zero(),
            Q::zero(),
            p.on_x0,
            Some(e),
            Axis::Y0,
        );
    }
    forest.curves.push(ExceptionalCurve {
        id: e,
        self_int: -1,
        invariant: b.invariant,
        created_at: node_id,
        singular_points: vec![],
        indices: vec![],
        tangency_points: vec![],
        tang_total: None,
        z_total: None,
        cs_total: None,
        foliated_discrepancy: fol,
        ordinary_discrepancy: ord,
        tang_untracked: tang_creation - tang_pushed,
    });
    Ok(())
}

fn finalize(forest: &mut ResolutionForest) -> Result<(), BlowupError> {
    for c in forest.curves.iter_mut() {
        if c.invariant {
            c.z_total = Some(0);
            c.cs_total = Some(Scalar::zero());
        } else {
            c.tang_total = Some(c.tang_untracked);
        }
    }
    for pt in &forest.points {
        let germ = pt.local.as_ref().expect("local germ kept");
        for c in pt.curves() {
            let axis = pt.axis_of(c);
            let curve = &mut forest.curves[c];
            if pt.class.is_singular() {
                curve
                    .singular_points
                    .push((pt.id.clone(), pt.class.clone()));
            }
            if curve.invariant {
                let rec = indices(germ, &BranchSpec::Axis(axis))?;
                *curve.z_total.as_mut().unwrap() += rec.z;
                let cs = curve.cs_total.take().unwrap();
                curve.cs_total =
                    Some(cs.add(&rec.cs).map_err(|e| {
                        BlowupError::Precondition(format!("index arithmetic: {e}"))
                    })?);
                curve.indices.push(PointIndex {
                    point: pt.id.clone(),
                    record: rec,
                });
            } else {
                let t = axis_tangency(germ, axis);
                if t > 0 {
                    curve.tangency_points.push((pt.id.clone(), t));
                }
                *curve.tang_total.as_mut().unwrap() += t;
            }
        }
    }
    Ok(())
}

fn annotation_kind(c: &SingularityClass) -> AnnotationKind {
    match c.kind {
        ClassKind::NonSingular => AnnotationKind::NonSingular,
        ClassKind::SaddleNode => AnnotationKind::SaddleNode,
        ClassKind::NonDegenerate if c.reduced => AnnotationKind::ReducedNonDegenerate,
        _ => AnnotationKind::NonReduced,
    }
}

impl ResolutionForest {
    pub fn blowup_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn root_class(&self) -> Option<&SingularityClass> {
        self.root_class.as_ref()
    }

    pub fn foliated_discrepancies(&self) -> Vec<Q> {
        self.curves
            .iter()
            .map(|c| c.foliated_discrepancy.clone())
            .collect()
    }

    pub fn ordinary_discrepancies(&self) -> Vec<Q> {
        self.curves
            .iter()
            .map(|c| c.ordinary_discrepancy.clone())
            .collect()
    }

    /// Every reported point is final under the stop criterion.
    pub fn all_final(&self) -> bool {
        self.points.iter().all(|p| self.stop.is_final(&p.class))
    }

    pub fn to_dual_graph(&self) -> Result<DualGraph, GraphError> {
        let nodes = self
            .curves
            .iter()
            .map(|c| {
                let ann = self
                    .points
                    .iter()
                    .filter(|p| p.curves().contains(&c.id))
                    .map(|p| {
                        let rec = c.indices.iter().find(|r| r.point == p.id);
                        Annotation {
                            point: p.id.clone(),
                            kind: annotation_kind(&p.class),
                            lambda: p.class.lambda().cloned(),
                            cs: rec.map(|r| r.record.cs.clone()),
                            z: rec.map(|r| r.record.z),
                        }
                    })
                    .collect();
                CurveNode {
                    id: c.id,
                    self_int: c.self_int,
                    genus: 0,
                    invariant: c.invariant,
                    z_total: c.z_total,
                    sing_annotations: Some(ann),
                    tang_total: c.tang_total,
                    chi: None,
                }
            })
            .collect();
        let edges = self
            .points
            .iter()
            .filter_map(|p| match (p.curve_on_x0, p.curve_on_y0) {
                (Some(a), Some(b)) => Some(Edge {
                    a: a.min(b),
                    b: a.max(b),
                    multiplicity: 1,
                }),
                _ => None,
            })
            .collect();
        DualGraph::new(nodes, edges)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable forest")
    }

    pub fn to_dot(&self) -> Result<String, GraphError> {
        Ok(self.to_dual_graph()?.to_dot())
    }

    /// `Σ CS = E²` on every invariant curve.
    pub fn camacho_sad_audit(&self) -> Vec<(usize, bool)> {
        self.curves
            .iter()
            .filter(|c| c.invariant)
            .map(|c| {
                let want = Scalar::from(Q::from_integer(c.self_int.into()));
                (c.id, c.cs_total.as_ref() == Some(&want))
            })
            .collect()
    }

    /// Human-readable summary.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "input: {}", self.input);
        let _ = writeln!(out, "blowups: {}", self.blowup_count());
        let _ = writeln!(out, "depth: {}", self.depth);
        for c in &self.curves {
            let _ = write!(
                out,
                "E{} self_int={} {} fol_disc={} ord_disc={}",
                c.id,
                c.self_int,
                if c.invariant {
                    "invariant"
                } else {
                    "non-invariant"
                },
                fmt_q(&c.foliated_discrepancy),
                fmt_q(&c.ordinary_discrepancy)
            );
            if let Some(z) = c.z_total {
                let _ = write!(out, " Z={z}");
            }
            if let Some(t) = c.tang_total {
                let _ = write!(out, " tang={t}");
            }
            out.push('\n');
        }
        for p in &self.points {
            let lam = p
                .class
                .lambda()
                .map(|l| format!(" lambda={l}"))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{} on {:?}: {} [{:?}{}]",
                p.id,
                p.curves(),
                p.germ,
                p.class.kind,
                lam
            );
        }
        out
    }
}

/// One clause of the positive-rational structure check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClauseResult {
    pub clause: u8,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosRatReport {
    pub pass: bool,
    pub string_order: Option<Vec<usize>>,
    pub non_invariant: Option<usize>,
    pub clauses: Vec<ClauseResult>,
    pub classification: Option<ComponentClass>,
}

/// Checks the structure of the reduction of a semi-reduced point with a
/// positive rational eigenvalue: a string, one non-invariant curve with
/// tangency zero flanked by F-chains, and foliated discrepancy −1 exactly on
/// that curve.
pub fn verify_pos_rat_structure(forest: &ResolutionForest) -> Result<PosRatReport, BlowupError> {
    let root = forest
        .root_class
        .as_ref()
        .ok_or_else(|| BlowupError::Precondition("forest has no root class".into()))?;
    let pos_rat = root.kind == ClassKind::NonDegenerate
        && !root.reduced
        && root
            .eigen
            .as_ref()
            .and_then(|e| e.positive_rational())
            .is_some();
    if !pos_rat {
        return Err(BlowupError::Precondition(
            "root is not a semi-reduced singularity with positive rational eigenvalue".into(),
        ));
    }
    let g = forest.to_dual_graph()?;
    let ids: Vec<usize> = forest.curves.iter().map(|c| c.id).collect();
    let comps = g.components();
    let order = if comps.len() == 1 {
        g.path_order(&comps[0])
    } else {
        None
    };
    let mut clauses = Vec::new();
    clauses.push(ClauseResult {
        clause: 1,
        name: "string",
        pass: order.is_some(),
        detail: match &order {
            Some(o) => format!("order {o:?}"),
            None => format!("{} components, not a single path", comps.len()),
        },
    });

    let non_inv: Vec<&ExceptionalCurve> = forest.curves.iter().filter(|c| !c.invariant).collect();
    let j = match non_inv[..] {
        [c] => Some(c.id),
        _ => None,
    };
    let tang0 = j.is_some_and(|j| forest.curves[j].tang_total == Some(0));
    clauses.push(ClauseResult {
        clause: 2,
        name: "one non-invariant curve with tangency 0",
        pass: tang0,
        detail: format!(
            "non-invariant curves {:?}, tangency {:?}",
            non_inv.iter().map(|c| c.id).collect::<Vec<_>>(),
            j.and_then(|j| forest.curves[j].tang_total)
        ),
    });

    let flanks = match (&order, j) {
        (Some(o), Some(j)) => {
            let pos = o.iter().position(|&x| x == j).unwrap();
            let left: Vec<usize> = o[..pos].iter().rev().copied().collect();
            let right: Vec<usize> = o[pos + 1..].to_vec();
            let ok = flank_is_f_chain(&g, &left) && flank_is_f_chain(&g, &right);
            (ok, format!("flanks {left:?} and {right:?}"))
        }
        _ => (false, "no string with a unique non-invariant curve".into()),
    };
    clauses.push(ClauseResult {
        clause: 3,
        name: "flanks are F-chains starting next to the non-invariant curve",
        pass: flanks.0,
        detail: flanks.1,
    });

    let lat = g.to_lattice(&ids)?;
    let solved = lat.foliated_discrepancies()?;
    let expected: Vec<Q> = ids
        .iter()
        .map(|&i| if Some(i) == j { -Q::one() } else { Q::zero() })
        .collect();
    let incremental = forest.foliated_discrepancies();
    let disc_ok = solved == expected && incremental == expected;
    clauses.push(ClauseResult {
        clause: 4,
        name: "foliated discrepancy -1 on the non-invariant curve, 0 elsewhere",
        pass: disc_ok,
        detail: format!(
            "lattice [{}], incremental [{}]",
            solved.iter().map(fmt_q).collect::<Vec<_>>().join(", "),
            incremental.iter().map(fmt_q).collect::<Vec<_>>().join(", ")
        ),
    });
    let classification = comps
        .first()
        .and_then(|c| classify_component(&g, c).ok())
        .map(|r| r.class);
    Ok(PosRatReport {
        pass: clauses.iter().all(|c| c.pass),
        string_order: order,
        non_invariant: j,
        clauses,
        classification,
    })
}
