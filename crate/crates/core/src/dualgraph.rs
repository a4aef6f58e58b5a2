//! Weighted dual graphs of exceptional configurations: pattern detection
//! (F-chains, bad tails, elliptic Gorenstein leaves), the A_n / D_n / e.g.l.
//! taxonomy, and eigenvalue propagation along strings of (−2)-curves.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{CurveMeta, ExceptionalLattice, LatticeError};
use crate::scalar::{serde_opt_q, Scalar, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate node id {0}")]
    DuplicateId(usize),
    #[error("edge refers to unknown node {0}")]
    UnknownNode(usize),
    #[error("edge {a}-{b}: multiplicity {multiplicity} outside 1..=2")]
    BadMultiplicity {
        a: usize,
        b: usize,
        multiplicity: u32,
    },
    #[error("node {0}: tang_total is only meaningful on a non-invariant curve")]
    TangOnInvariant(usize),
    #[error("nodes do not form a connected component of the graph")]
    NotAComponent,
    #[error("chain is not a Hirzebruch-Jung string: {0}")]
    NotAString(String),
    #[error("saddle-node propagation: λ_{k} = 0, so the next point is a saddle-node")]
    SaddleNodePropagation { k: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnotationKind {
    ReducedNonDegenerate,
    SaddleNode,
    NonReduced,
    NonSingular,
}

/// Data of one singular point lying on a curve. Points shared by two curves
/// carry the same `point` id on both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub point: String,
    pub kind: AnnotationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Scalar>,
    /// Camacho-Sad index of this curve at the point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cs: Option<Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveNode {
    pub id: usize,
    pub self_int: i64,
    #[serde(default)]
    pub genus: u32,
    #[serde(default = "default_true")]
    pub invariant: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_total: Option<i64>,
    /// `None` means unknown; `Some(vec![])` means no singular points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sing_annotations: Option<Vec<Annotation>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tang_total: Option<u64>,
    #[serde(default, with = "serde_opt_q", skip_serializing_if = "Option::is_none")]
    pub chi: Option<Q>,
}

fn default_true() -> bool {
    true
}

fn default_mult() -> u32 {
    1
}

impl CurveNode {
    pub fn new(id: usize, self_int: i64) -> Self {
        CurveNode {
            id,
            self_int,
            genus: 0,
            invariant: true,
            z_total: None,
            sing_annotations: None,
            tang_total: None,
            chi: None,
        }
    }

    pub fn with_z(mut self, z: i64) -> Self {
        self.z_total = Some(z);
        self
    }

    pub fn with_annotations(mut self, a: Vec<Annotation>) -> Self {
        self.sing_annotations = Some(a);
        self
    }

    pub fn non_invariant(mut self, tang: u64) -> Self {
        self.invariant = false;
        self.tang_total = Some(tang);
        self
    }

    /// Sum of per-point Camacho-Sad indices, if every annotation carries one.
    pub fn cs_sum(&self) -> Option<Scalar> {
        let ann = self.sing_annotations.as_ref()?;
        let mut acc = Scalar::zero();
        for a in ann {
            acc = acc.add(a.cs.as_ref()?).ok()?;
        }
        Some(acc)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    #[serde(default = "default_mult")]
    pub multiplicity: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualGraph {
    nodes: Vec<CurveNode>,
    #[serde(default)]
    edges: Vec<Edge>,
}

impl DualGraph {
    pub fn new(nodes: Vec<CurveNode>, edges: Vec<Edge>) -> Result<Self, GraphError> {
        let g = DualGraph { nodes, edges };
        g.validate()?;
        Ok(g)
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let g: DualGraph = serde_json::from_str(text).map_err(|e| e.to_string())?;
        g.validate().map_err(|e| e.to_string())?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        let mut seen = BTreeSet::new();
        for n in &self.nodes {
            if !seen.insert(n.id) {
                return Err(GraphError::DuplicateId(n.id));
            }
            if n.invariant && n.tang_total.is_some() {
                return Err(GraphError::TangOnInvariant(n.id));
            }
        }
        for e in &self.edges {
            for id in [e.a, e.b] {
                if !seen.contains(&id) {
                    return Err(GraphError::UnknownNode(id));
                }
            }
            if !(1..=2).contains(&e.multiplicity) {
                return Err(GraphError::BadMultiplicity {
                    a: e.a,
                    b: e.b,
                    multiplicity: e.multiplicity,
                });
            }
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[CurveNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, id: usize) -> Option<&CurveNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    fn get(&self, id: usize) -> &CurveNode {
        self.node(id).expect("validated id")
    }

    /// Total multiplicity of edges between distinct nodes `a` and `b`.
    pub fn meet(&self, a: usize, b: usize) -> u32 {
        self.edges
            .iter()
            .filter(|e| (e.a == a && e.b == b) || (e.a == b && e.b == a))
            .map(|e| e.multiplicity)
            .sum()
    }

    /// Number of nodes (self-crossings) of a curve.
    pub fn self_loops(&self, id: usize) -> u32 {
        self.edges
            .iter()
            .filter(|e| e.a == id && e.b == id)
            .map(|e| e.multiplicity)
            .sum()
    }

    pub fn neighbors(&self, id: usize) -> Vec<usize> {
        let mut out = BTreeSet::new();
        for e in &self.edges {
            if e.a == id && e.b != id {
                out.insert(e.b);
            } else if e.b == id && e.a != id {
                out.insert(e.a);
            }
        }
        out.into_iter().collect()
    }

    /// Degree counting multiplicities, self-loops excluded.
    fn degree(&self, id: usize) -> u32 {
        self.neighbors(id).iter().map(|&n| self.meet(id, n)).sum()
    }

    fn is_smooth_rational(&self, id: usize) -> bool {
        self.get(id).genus == 0 && self.self_loops(id) == 0
    }

    /// Connected components as sorted id lists, ordered by smallest id.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut left: BTreeSet<usize> = self.nodes.iter().map(|n| n.id).collect();
        let mut out = Vec::new();
        while let Some(&start) = left.iter().next() {
            let mut comp = BTreeSet::new();
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                if comp.insert(v) {
                    stack.extend(self.neighbors(v));
                }
            }
            for v in &comp {
                left.remove(v);
            }
            out.push(comp.into_iter().collect());
        }
        out
    }

    fn check_component(&self, comp: &[usize]) -> Result<Vec<usize>, GraphError> {
        let set: BTreeSet<usize> = comp.iter().copied().collect();
        if set.is_empty() || set.iter().any(|&i| self.node(i).is_none()) {
            return Err(GraphError::NotAComponent);
        }
        let owning = self
            .components()
            .into_iter()
            .find(|c| c.contains(set.iter().next().unwrap()))
            .unwrap();
        if owning.len() != set.len() || owning.iter().any(|i| !set.contains(i)) {
            return Err(GraphError::NotAComponent);
        }
        Ok(owning)
    }

    /// Ordering of a component as a path of smooth rational curves meeting
    /// transversally once, starting from the endpoint with the smaller id.
    pub fn path_order(&self, comp: &[usize]) -> Option<Vec<usize>> {
        if comp.iter().any(|&i| !self.is_smooth_rational(i)) {
            return None;
        }
        let internal: u32 = comp
            .iter()
            .flat_map(|&i| self.neighbors(i).into_iter().map(move |j| (i, j)))
            .filter(|(i, j)| i < j)
            .map(|(i, j)| self.meet(i, j))
            .sum();
        if internal as usize + 1 != comp.len() {
            return None;
        }
        if comp.iter().any(|&i| self.degree(i) > 2) {
            return None;
        }
        let start = *comp.iter().filter(|&&i| self.degree(i) <= 1).min()?;
        let mut order = vec![start];
        let mut prev = None;
        let mut cur = start;
        loop {
            let next = self.neighbors(cur).into_iter().find(|&n| Some(n) != prev);
            match next {
                Some(n) => {
                    order.push(n);
                    prev = Some(cur);
                    cur = n;
                }
                None => break,
            }
        }
        (order.len() == comp.len()).then_some(order)
    }

    /// Intersection lattice of the given nodes in the given order.
    pub fn to_lattice(&self, ids: &[usize]) -> Result<ExceptionalLattice, GraphError> {
        let gram: Vec<Vec<i64>> = ids
            .iter()
            .map(|&i| {
                ids.iter()
                    .map(|&j| {
                        if i == j {
                            self.get(i).self_int
                        } else {
                            self.meet(i, j) as i64
                        }
                    })
                    .collect()
            })
            .collect();
        let curves = ids
            .iter()
            .map(|&i| {
                let n = self.get(i);
                CurveMeta {
                    genus: n.genus,
                    invariant: n.invariant,
                    z_total: n.z_total,
                    tang_total: n.tang_total,
                    nodes: self.self_loops(i),
                    chi: n.chi.clone(),
                }
            })
            .collect();
        Ok(ExceptionalLattice::new(gram, curves)?)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable graph")
    }

    /// Graphviz rendering; components are colored by their classification.
    pub fn to_dot(&self) -> String {
        let mut color = BTreeMap::new();
        for comp in self.components() {
            let c = match classify_component(self, &comp).map(|r| r.class) {
                Ok(ComponentClass::AnType { .. }) => "blue",
                Ok(ComponentClass::DnType) => "darkgreen",
                Ok(ComponentClass::Egl { .. }) => "red",
                _ => "gray",
            };
            for id in comp {
                color.insert(id, c);
            }
        }
        let mut out = String::from("graph dual {\n");
        for n in &self.nodes {
            let mut label = format!("E{} ({})", n.id, n.self_int);
            if !n.invariant {
                label.push_str(" non-inv");
            }
            if let Some(z) = n.z_total {
                let _ = write!(label, " Z={z}");
            }
            let _ = writeln!(
                out,
                "  n{} [label=\"{}\", color={}];",
                n.id, label, color[&n.id]
            );
        }
        for e in &self.edges {
            if e.multiplicity == 1 {
                let _ = writeln!(out, "  n{} -- n{};", e.a, e.b);
            } else {
                let _ = writeln!(
                    out,
                    "  n{} -- n{} [label=\"{}\"];",
                    e.a, e.b, e.multiplicity
                );
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Three-valued outcome of a clause check; `Missing` lists the data that
/// would be needed to decide.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Tri {
    Yes,
    No,
    Missing(Vec<String>),
}

impl Tri {
    fn from_bool(b: bool) -> Tri {
        if b {
            Tri::Yes
        } else {
            Tri::No
        }
    }

    fn and(self, other: Tri) -> Tri {
        match (self, other) {
            (Tri::No, _) | (_, Tri::No) => Tri::No,
            (Tri::Missing(mut a), Tri::Missing(b)) => {
                a.extend(b);
                Tri::Missing(a)
            }
            (Tri::Missing(a), Tri::Yes) | (Tri::Yes, Tri::Missing(a)) => Tri::Missing(a),
            (Tri::Yes, Tri::Yes) => Tri::Yes,
        }
    }

    fn all(it: impl IntoIterator<Item = Tri>) -> Tri {
        it.into_iter().fold(Tri::Yes, Tri::and)
    }

    /// Best of alternatives: any `Yes` wins, else `Missing` if any, else `No`.
    fn any(it: impl IntoIterator<Item = Tri>) -> Tri {
        let mut missing: Option<Vec<String>> = None;
        for t in it {
            match t {
                Tri::Yes => return Tri::Yes,
                Tri::Missing(m) => missing.get_or_insert_with(Vec::new).extend(m),
                Tri::No => {}
            }
        }
        missing.map_or(Tri::No, Tri::Missing)
    }
}

fn z_is(g: &DualGraph, id: usize, want: i64) -> Tri {
    let n = g.get(id);
    if !n.invariant {
        return Tri::No;
    }
    match n.z_total {
        Some(z) => Tri::from_bool(z == want),
        None => Tri::Missing(vec![format!("E{id}: z_total")]),
    }
}

fn singularities_reduced_nondegenerate(g: &DualGraph, id: usize) -> Tri {
    match &g.get(id).sing_annotations {
        None => Tri::Missing(vec![format!("E{id}: singularity annotations")]),
        Some(ann) => Tri::from_bool(ann.iter().all(|a| {
            matches!(
                a.kind,
                AnnotationKind::ReducedNonDegenerate | AnnotationKind::NonSingular
            )
        })),
    }
}

fn hj_string(g: &DualGraph, order: &[usize]) -> bool {
    order.iter().all(|&i| g.get(i).self_int <= -2)
}

/// F-chain check of an ordered path whose first entry must be `C_1`.
fn f_chain_oriented(g: &DualGraph, order: &[usize]) -> Tri {
    if order.is_empty() || !hj_string(g, order) || order.iter().any(|&i| !g.get(i).invariant) {
        return Tri::No;
    }
    let z = Tri::all(
        order
            .iter()
            .enumerate()
            .map(|(k, &i)| z_is(g, i, if k == 0 { 1 } else { 2 })),
    );
    z.and(Tri::all(
        order
            .iter()
            .map(|&i| singularities_reduced_nondegenerate(g, i)),
    ))
}

/// True when `order` is empty or an F-chain whose first entry is `C_1`.
pub fn flank_is_f_chain(g: &DualGraph, order: &[usize]) -> bool {
    order.is_empty() || f_chain_oriented(g, order) == Tri::Yes
}

fn minus_one_f_curve(g: &DualGraph, id: usize) -> Tri {
    if !g.is_smooth_rational(id) || !g.get(id).invariant {
        return Tri::No;
    }
    z_is(g, id, 1)
}

fn minus_two_f_curve(g: &DualGraph, id: usize) -> Tri {
    if !g.is_smooth_rational(id) || !g.get(id).invariant {
        return Tri::No;
    }
    z_is(g, id, 2)
}

/// (−1)-F-curve of self-intersection −2.
fn minus_one_f_minus_two(g: &DualGraph, id: usize) -> Tri {
    if g.get(id).self_int != -2 {
        return Tri::No;
    }
    minus_one_f_curve(g, id)
}

fn bad_tail(g: &DualGraph, id: usize) -> Tri {
    let n = g.get(id);
    if !g.is_smooth_rational(id) || !n.invariant || n.self_int > -2 {
        return Tri::No;
    }
    let z = z_is(g, id, 3);
    let ends: Vec<Tri> = g
        .neighbors(id)
        .into_iter()
        .filter(|&j| g.meet(id, j) == 1)
        .map(|j| minus_one_f_minus_two(g, j))
        .collect();
    let yes = ends.iter().filter(|t| **t == Tri::Yes).count();
    let unknown: Vec<String> = ends
        .iter()
        .filter_map(|t| match t {
            Tri::Missing(m) => Some(m.clone()),
            _ => None,
        })
        .flatten()
        .collect();
    let meets = if yes >= 2 {
        Tri::Yes
    } else if yes + ends.iter().filter(|t| matches!(t, Tri::Missing(_))).count() >= 2 {
        Tri::Missing(unknown)
    } else {
        Tri::No
    };
    z.and(meets)
}

fn minus_two_chain(g: &DualGraph, order: &[usize]) -> Tri {
    if order.is_empty() || !hj_string(g, order) {
        return Tri::No;
    }
    Tri::all(order.iter().map(|&i| minus_two_f_curve(g, i)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnKind {
    FChain,
    TwoFCurvesBadTail,
    MinusTwoChain,
    GeneralizedChain,
    NonInvariantTangZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EglKind {
    Cycle,
    NodalRational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ComponentClass {
    AnType { via: AnKind },
    DnType,
    Egl { via: EglKind },
    Unknown,
}

/// Classification of one component. When some clause of a matching pattern
/// cannot be decided, `class` is `Unknown`, `candidate` holds the pattern and
/// `missing` lists the absent data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub nodes: Vec<usize>,
    pub class: ComponentClass,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidate: Option<ComponentClass>,
    pub missing: Vec<String>,
    /// Oriented order for string-shaped classes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<usize>>,
}

fn f_chain_either(g: &DualGraph, order: &[usize]) -> (Tri, Vec<usize>) {
    let fwd = f_chain_oriented(g, order);
    if fwd == Tri::Yes {
        return (fwd, order.to_vec());
    }
    let rev: Vec<usize> = order.iter().rev().copied().collect();
    let bwd = f_chain_oriented(g, &rev);
    if bwd == Tri::Yes {
        return (bwd, rev);
    }
    (Tri::any([fwd, bwd]), order.to_vec())
}

/// Generalized chain: one non-invariant curve with tangency order zero whose
/// flanks are F-chains starting next to it.
fn generalized_chain(g: &DualGraph, order: &[usize]) -> Tri {
    if order.len() < 2 {
        return Tri::No;
    }
    let non_inv: Vec<usize> = (0..order.len())
        .filter(|&k| !g.get(order[k]).invariant)
        .collect();
    let [j] = non_inv[..] else {
        return Tri::No;
    };
    let tang = match g.get(order[j]).tang_total {
        Some(t) => Tri::from_bool(t == 0),
        None => Tri::Missing(vec![format!("E{}: tang_total", order[j])]),
    };
    let left: Vec<usize> = order[..j].iter().rev().copied().collect();
    let right: Vec<usize> = order[j + 1..].to_vec();
    let flank = |f: &[usize]| {
        if f.is_empty() {
            Tri::Yes
        } else {
            f_chain_oriented(g, f)
        }
    };
    tang.and(flank(&left)).and(flank(&right))
}

fn is_cycle(g: &DualGraph, comp: &[usize]) -> bool {
    if comp.len() < 2 || comp.iter().any(|&i| !g.is_smooth_rational(i)) {
        return false;
    }
    // components are connected, and a connected 2-regular multigraph is a cycle
    comp.iter().all(|&i| g.degree(i) == 2)
}

fn classify_path(g: &DualGraph, order: &[usize]) -> Vec<(AnKind, Tri, Vec<usize>)> {
    let mut out = Vec::new();
    let (t, o) = f_chain_either(g, order);
    out.push((AnKind::FChain, t, o));
    if order.len() == 3 {
        let t = minus_one_f_minus_two(g, order[0])
            .and(bad_tail(g, order[1]))
            .and(minus_one_f_minus_two(g, order[2]));
        out.push((AnKind::TwoFCurvesBadTail, t, order.to_vec()));
    }
    out.push((
        AnKind::MinusTwoChain,
        minus_two_chain(g, order),
        order.to_vec(),
    ));
    out.push((
        AnKind::GeneralizedChain,
        generalized_chain(g, order),
        order.to_vec(),
    ));
    if order.len() == 1 {
        let n = g.get(order[0]);
        let t = if n.invariant {
            Tri::No
        } else {
            let tang = match n.tang_total {
                Some(t) => Tri::from_bool(t == 0),
                None => Tri::Missing(vec![format!("E{}: tang_total", n.id)]),
            };
            let empty = match &n.sing_annotations {
                Some(a) => Tri::from_bool(a.is_empty()),
                None => Tri::Missing(vec![format!("E{}: singularity annotations", n.id)]),
            };
            tang.and(empty)
        };
        out.push((AnKind::NonInvariantTangZero, t, order.to_vec()));
    }
    out
}

fn classify_dn(g: &DualGraph, comp: &[usize]) -> Tri {
    let internal: u32 = comp
        .iter()
        .flat_map(|&i| g.neighbors(i).into_iter().map(move |j| (i, j)))
        .filter(|(i, j)| i < j)
        .map(|(i, j)| g.meet(i, j))
        .sum();
    if internal as usize + 1 != comp.len() || comp.iter().any(|&i| !g.is_smooth_rational(i)) {
        return Tri::No;
    }
    let branch: Vec<usize> = comp.iter().copied().filter(|&i| g.degree(i) >= 3).collect();
    let [t] = branch[..] else {
        return Tri::No;
    };
    let nb = g.neighbors(t);
    if nb.len() != 3 || g.degree(t) != 3 {
        return Tri::No;
    }
    let tail = bad_tail(g, t);
    let options = (0..3).map(|c| {
        let ends: Vec<usize> = (0..3).filter(|&k| k != c).map(|k| nb[k]).collect();
        let leaves = Tri::from_bool(ends.iter().all(|&e| g.degree(e) == 1));
        let f_ends = Tri::all(ends.iter().map(|&e| minus_one_f_minus_two(g, e)));
        let rest: Vec<usize> = comp
            .iter()
            .copied()
            .filter(|&i| i != t && !ends.contains(&i))
            .collect();
        let chain = match g.path_order_within(&rest) {
            Some(o) => minus_two_chain(g, &o),
            None => Tri::No,
        };
        leaves.and(f_ends).and(chain)
    });
    tail.and(Tri::any(options))
}

impl DualGraph {
    /// Path order of a node subset using only edges inside it.
    fn path_order_within(&self, ids: &[usize]) -> Option<Vec<usize>> {
        let keep: BTreeSet<usize> = ids.iter().copied().collect();
        let nodes = self
            .nodes
            .iter()
            .filter(|n| keep.contains(&n.id))
            .cloned()
            .collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| keep.contains(&e.a) && keep.contains(&e.b))
            .cloned()
            .collect();
        let sub = DualGraph { nodes, edges };
        let comps = sub.components();
        if comps.len() != 1 {
            return None;
        }
        sub.path_order(&comps[0])
    }
}

/// Exact classification of a connected component into the taxonomy.
pub fn classify_component(g: &DualGraph, comp: &[usize]) -> Result<ClassReport, GraphError> {
    let comp = g.check_component(comp)?;
    let mut candidates: Vec<(ComponentClass, Tri, Option<Vec<usize>>)> = Vec::new();

    if comp.len() == 1 && g.self_loops(comp[0]) > 0 {
        let id = comp[0];
        let n = g.get(id);
        let t = Tri::from_bool(n.genus == 0 && g.self_loops(id) == 1 && n.invariant);
        candidates.push((
            ComponentClass::Egl {
                via: EglKind::NodalRational,
            },
            t,
            None,
        ));
    } else if is_cycle(g, &comp) {
        let t = Tri::all(comp.iter().map(|&i| minus_two_f_curve(g, i)));
        candidates.push((
            ComponentClass::Egl {
                via: EglKind::Cycle,
            },
            t,
            None,
        ));
    } else if let Some(order) = g.path_order(&comp) {
        for (kind, t, o) in classify_path(g, &order) {
            candidates.push((ComponentClass::AnType { via: kind }, t, Some(o)));
        }
    } else {
        candidates.push((ComponentClass::DnType, classify_dn(g, &comp), None));
    }

    if let Some((c, _, o)) = candidates.iter().find(|(_, t, _)| *t == Tri::Yes) {
        return Ok(ClassReport {
            nodes: comp.clone(),
            class: *c,
            candidate: None,
            missing: vec![],
            order: o.clone(),
        });
    }
    if let Some((c, Tri::Missing(m), o)) = candidates
        .iter()
        .find(|(_, t, _)| matches!(t, Tri::Missing(_)))
    {
        let mut m = m.clone();
        m.sort();
        m.dedup();
        return Ok(ClassReport {
            nodes: comp.clone(),
            class: ComponentClass::Unknown,
            candidate: Some(*c),
            missing: m,
            order: o.clone(),
        });
    }
    Ok(ClassReport {
        nodes: comp,
        class: ComponentClass::Unknown,
        candidate: None,
        missing: vec![],
        order: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeTag {
    MinusOneFCurve,
    MinusTwoFCurve,
    BadTail,
    NonInvariant,
    InsufficientData(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentPatterns {
    pub nodes: Vec<usize>,
    pub hj_string: bool,
    /// F-chain order starting at `C_1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_chain: Option<Vec<usize>>,
    pub generalized_chain: bool,
    pub minus_two_chain: bool,
    pub egl_candidate: bool,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternReport {
    pub node_tags: BTreeMap<usize, Vec<NodeTag>>,
    pub components: Vec<ComponentPatterns>,
}

/// Distinct non-reduced points on a set of curves.
fn non_reduced_points(g: &DualGraph, ids: &[usize]) -> BTreeSet<String> {
    ids.iter()
        .filter_map(|&i| g.get(i).sing_annotations.as_ref())
        .flatten()
        .filter(|a| a.kind == AnnotationKind::NonReduced)
        .map(|a| a.point.clone())
        .collect()
}

pub fn detect_patterns(g: &DualGraph) -> PatternReport {
    let mut node_tags = BTreeMap::new();
    for n in &g.nodes {
        let mut tags = Vec::new();
        let id = n.id;
        if !n.invariant {
            tags.push(NodeTag::NonInvariant);
            if n.tang_total.is_none() {
                tags.push(NodeTag::InsufficientData("tang_total".into()));
            }
        } else if n.z_total.is_none() {
            tags.push(NodeTag::InsufficientData("z_total".into()));
        }
        if n.sing_annotations.is_none() {
            tags.push(NodeTag::InsufficientData("singularity annotations".into()));
        }
        if minus_one_f_curve(g, id) == Tri::Yes {
            tags.push(NodeTag::MinusOneFCurve);
        }
        if minus_two_f_curve(g, id) == Tri::Yes {
            tags.push(NodeTag::MinusTwoFCurve);
        }
        if bad_tail(g, id) == Tri::Yes {
            tags.push(NodeTag::BadTail);
        }
        tags.sort();
        node_tags.insert(id, tags);
    }
    let components = g
        .components()
        .into_iter()
        .map(|comp| {
            let order = g.path_order(&comp);
            let hj = order.as_ref().is_some_and(|o| hj_string(g, o));
            let f_chain = order.as_ref().and_then(|o| {
                let (t, oo) = f_chain_either(g, o);
                (t == Tri::Yes).then_some(oo)
            });
            let generalized = order
                .as_ref()
                .is_some_and(|o| generalized_chain(g, o) == Tri::Yes);
            let m2 = order
                .as_ref()
                .is_some_and(|o| minus_two_chain(g, o) == Tri::Yes);
            let egl = is_cycle(g, &comp)
                && Tri::all(comp.iter().map(|&i| minus_two_f_curve(g, i))) == Tri::Yes;
            let mut violations = Vec::new();
            if m2 || egl {
                let bad = non_reduced_points(g, &comp);
                if bad.len() > 1 {
                    violations.push(format!(
                        "at most one non-reduced singularity allowed on a string of (-2)-F-curves, found {}: {}",
                        bad.len(),
                        bad.into_iter().collect::<Vec<_>>().join(", ")
                    ));
                }
            }
            ComponentPatterns {
                nodes: comp,
                hj_string: hj,
                f_chain,
                generalized_chain: generalized,
                minus_two_chain: m2,
                egl_candidate: egl,
                violations,
            }
        })
        .collect();
    PatternReport {
        node_tags,
        components,
    }
}

/// Boundary condition for eigenvalue propagation along a string.
#[derive(Debug, Clone, PartialEq)]
pub enum ChainBoundary {
    /// `E_1` carries a single singularity, necessarily a saddle-node, so `λ_2 = E_2²`.
    OneSingularity,
    /// `E_1` is the first curve of an F-chain: `λ_1 = E_1²`.
    FChainEnd,
    /// `λ_1` given.
    Given(Scalar),
}

/// `λ_k = CS(E_k, p_k)` along an oriented string, `p_k = E_k ∩ E_{k+1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainEigenvalues {
    /// Node ids from `E_1` to `E_s`.
    pub orientation: Vec<usize>,
    /// `(k, λ_k)` with `k` 1-based.
    pub lambdas: Vec<(usize, Scalar)>,
    /// Indices `k` of points `p_k` that are saddle-nodes.
    pub saddle_nodes: Vec<usize>,
    /// Every reported `λ_k < −1`.
    pub all_below_minus_one: bool,
}

impl ChainEigenvalues {
    /// Re-checks `1/λ_{k−1} + λ_k = E_k²` (with `CS(E_2, p_1) = 0` after a saddle-node).
    pub fn camacho_sad_holds(&self, self_ints: &[i64]) -> bool {
        let mut prev: Option<&Scalar> = None;
        for (k, l) in &self.lambdas {
            let before = match prev {
                Some(p) => p.recip().ok(),
                None if self.saddle_nodes.contains(&(k - 1)) => Some(Scalar::zero()),
                None => None,
            };
            if let Some(b) = before {
                let lhs = b.add(l).ok();
                if lhs != Some(Scalar::from(Q::from_integer(self_ints[k - 1].into()))) {
                    return false;
                }
            }
            prev = Some(l);
        }
        true
    }
}

pub fn propagate_chain_eigenvalues(
    self_ints: &[i64],
    orientation: &[usize],
    boundary: &ChainBoundary,
) -> Result<ChainEigenvalues, GraphError> {
    if self_ints.is_empty() || self_ints.iter().any(|&e| e > -2) {
        return Err(GraphError::NotAString(
            "needs at least one curve, all self-intersections <= -2".into(),
        ));
    }
    if orientation.len() != self_ints.len() {
        return Err(GraphError::Precondition(
            "orientation length differs from the chain length".into(),
        ));
    }
    let e2 = |k: usize| Scalar::from(Q::from_integer(self_ints[k - 1].into()));
    let s = self_ints.len();
    let mut lambdas = Vec::new();
    let mut saddle_nodes = Vec::new();
    let (start, mut prev) = match boundary {
        ChainBoundary::OneSingularity => {
            saddle_nodes.push(1);
            if s < 2 {
                return Ok(ChainEigenvalues {
                    orientation: orientation.to_vec(),
                    lambdas,
                    saddle_nodes,
                    all_below_minus_one: true,
                });
            }
            lambdas.push((2, e2(2)));
            (3, e2(2))
        }
        ChainBoundary::FChainEnd => {
            lambdas.push((1, e2(1)));
            (2, e2(1))
        }
        ChainBoundary::Given(l) => {
            lambdas.push((1, l.clone()));
            (2, l.clone())
        }
    };
    for k in start..=s {
        let inv = prev
            .recip()
            .map_err(|_| GraphError::SaddleNodePropagation { k: k - 1 })?;
        let l = e2(k)
            .sub(&inv)
            .map_err(|e| GraphError::Precondition(e.to_string()))?;
        lambdas.push((k, l.clone()));
        prev = l;
    }
    let minus_one = Scalar::from(-Q::from_integer(1.into()));
    let all_below = lambdas
        .iter()
        .all(|(_, l)| l.cmp_exact(&minus_one) == Ok(Ordering::Less));
    Ok(ChainEigenvalues {
        orientation: orientation.to_vec(),
        lambdas,
        saddle_nodes,
        all_below_minus_one: all_below,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EglReport {
    pub pass: bool,
    pub failures: Vec<String>,
    pub missing: Vec<String>,
    /// Camacho-Sad sums were available and checked on every node.
    pub cs_checked: bool,
}

/// On a cycle of (−2)-F-curves every singularity must be reduced and
/// non-degenerate; with full CS data the per-node sums must equal `E²`.
pub fn egl_singularity_check(g: &DualGraph, comp: &[usize]) -> Result<EglReport, GraphError> {
    let comp = g.check_component(comp)?;
    if !is_cycle(g, &comp) {
        return Err(GraphError::Precondition(
            "component is not a cycle of length >= 2".into(),
        ));
    }
    match Tri::all(comp.iter().map(|&i| minus_two_f_curve(g, i))) {
        Tri::No => {
            return Err(GraphError::Precondition(
                "cycle members must be invariant with z_total = 2".into(),
            ))
        }
        Tri::Missing(m) => {
            return Ok(EglReport {
                pass: false,
                failures: vec![],
                missing: m,
                cs_checked: false,
            })
        }
        Tri::Yes => {}
    }
    let mut failures = Vec::new();
    let mut missing = Vec::new();
    let mut cs_checked = true;
    for &i in &comp {
        let n = g.get(i);
        let Some(ann) = &n.sing_annotations else {
            missing.push(format!("E{i}: singularity annotations"));
            cs_checked = false;
            continue;
        };
        for a in ann {
            match a.kind {
                AnnotationKind::ReducedNonDegenerate | AnnotationKind::NonSingular => {}
                k => failures.push(format!("E{i} at {}: {:?}", a.point, k)),
            }
        }
        match n.cs_sum() {
            Some(sum) => {
                if sum != Scalar::from(Q::from_integer(n.self_int.into())) {
                    failures.push(format!(
                        "E{i}: Camacho-Sad sum {sum} differs from self-intersection {}",
                        n.self_int
                    ));
                }
            }
            None => cs_checked = false,
        }
    }
    Ok(EglReport {
        pass: failures.is_empty() && missing.is_empty(),
        failures,
        missing,
        cs_checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qi};

    fn ann(point: &str, kind: AnnotationKind) -> Annotation {
        Annotation {
            point: point.into(),
            kind,
            lambda: None,
            cs: None,
            z: None,
        }
    }

    fn rnd(point: &str) -> Annotation {
        ann(point, AnnotationKind::ReducedNonDegenerate)
    }

    fn edge(a: usize, b: usize) -> Edge {
        Edge {
            a,
            b,
            multiplicity: 1,
        }
    }

    fn chain_graph(nodes: Vec<CurveNode>) -> DualGraph {
        let edges = nodes.windows(2).map(|w| edge(w[0].id, w[1].id)).collect();
        DualGraph::new(nodes, edges).unwrap()
    }

    #[test]
    fn f_chain_pattern() {
        let g = chain_graph(vec![
            CurveNode::new(0, -2)
                .with_z(2)
                .with_annotations(vec![rnd("a")]),
            CurveNode::new(1, -2)
                .with_z(2)
                .with_annotations(vec![rnd("a"), rnd("b")]),
            CurveNode::new(2, -3)
                .with_z(1)
                .with_annotations(vec![rnd("b"), rnd("c")]),
        ]);
        let r = classify_component(&g, &[0, 1, 2]).unwrap();
        assert_eq!(
            r.class,
            ComponentClass::AnType {
                via: AnKind::FChain
            }
        );
        assert_eq!(r.order, Some(vec![2, 1, 0]));
        let p = detect_patterns(&g);
        assert_eq!(p.components[0].f_chain, Some(vec![2, 1, 0]));
        assert!(p.node_tags[&2].contains(&NodeTag::MinusOneFCurve));
    }

    #[test]
    fn missing_data_is_not_guessed() {
        let g = chain_graph(vec![
            CurveNode::new(0, -2).with_z(1),
            CurveNode::new(1, -2).with_z(2).with_annotations(vec![]),
        ]);
        let r = classify_component(&g, &[0, 1]).unwrap();
        assert_eq!(r.class, ComponentClass::Unknown);
        assert_eq!(
            r.candidate,
            Some(ComponentClass::AnType {
                via: AnKind::FChain
            })
        );
        assert_eq!(r.missing, vec!["E0: singularity annotations".to_string()]);
        let p = detect_patterns(&g);
        assert!(
            p.node_tags[&0].contains(&NodeTag::InsufficientData("singularity annotations".into()))
        );
    }

    #[test]
    fn generalized_chain_and_single_non_invariant() {
        let g = chain_graph(vec![
            CurveNode::new(1, -2)
                .with_z(2)
                .with_annotations(vec![rnd("p")]),
            CurveNode::new(2, -3)
                .with_z(1)
                .with_annotations(vec![rnd("p"), rnd("q")]),
            CurveNode::new(4, -1)
                .non_invariant(0)
                .with_annotations(vec![rnd("q"), rnd("r")]),
            CurveNode::new(3, -2)
                .with_z(1)
                .with_annotations(vec![rnd("r")]),
        ]);
        let r = classify_component(&g, &[1, 2, 3, 4]).unwrap();
        assert_eq!(
            r.class,
            ComponentClass::AnType {
                via: AnKind::GeneralizedChain
            }
        );
        assert!(detect_patterns(&g).components[0].generalized_chain);

        let single = DualGraph::new(
            vec![CurveNode::new(0, -1)
                .non_invariant(0)
                .with_annotations(vec![])],
            vec![],
        )
        .unwrap();
        assert_eq!(
            classify_component(&single, &[0]).unwrap().class,
            ComponentClass::AnType {
                via: AnKind::NonInvariantTangZero
            }
        );
        let with_sing = DualGraph::new(
            vec![CurveNode::new(0, -1)
                .non_invariant(0)
                .with_annotations(vec![rnd("p")])],
            vec![],
        )
        .unwrap();
        assert_eq!(
            classify_component(&with_sing, &[0]).unwrap().class,
            ComponentClass::Unknown
        );
    }

    fn dn_graph(ids: [usize; 5]) -> DualGraph {
        let [a, b, t, c1, c2] = ids;
        let nodes = vec![
            CurveNode::new(a, -2)
                .with_z(1)
                .with_annotations(vec![rnd("x")]),
            CurveNode::new(b, -2)
                .with_z(1)
                .with_annotations(vec![rnd("y")]),
            CurveNode::new(t, -3).with_z(3).with_annotations(vec![]),
            CurveNode::new(c1, -2).with_z(2).with_annotations(vec![]),
            CurveNode::new(c2, -2).with_z(2).with_annotations(vec![]),
        ];
        DualGraph::new(
            nodes,
            vec![edge(a, t), edge(t, b), edge(t, c1), edge(c1, c2)],
        )
        .unwrap()
    }

    #[test]
    fn dn_and_bad_tail() {
        let g = dn_graph([0, 1, 2, 3, 4]);
        assert_eq!(
            classify_component(&g, &[0, 1, 2, 3, 4]).unwrap().class,
            ComponentClass::DnType
        );
        assert!(detect_patterns(&g).node_tags[&2].contains(&NodeTag::BadTail));
        // relabeling does not change the class
        let h = dn_graph([7, 3, 11, 0, 5]);
        assert_eq!(
            classify_component(&h, &[0, 3, 5, 7, 11]).unwrap().class,
            ComponentClass::DnType
        );

        let two = chain_graph(vec![
            CurveNode::new(0, -2).with_z(1).with_annotations(vec![]),
            CurveNode::new(1, -2).with_z(3).with_annotations(vec![]),
            CurveNode::new(2, -2).with_z(1).with_annotations(vec![]),
        ]);
        assert_eq!(
            classify_component(&two, &[0, 1, 2]).unwrap().class,
            ComponentClass::AnType {
                via: AnKind::TwoFCurvesBadTail
            }
        );
    }

    #[test]
    fn egl_shapes() {
        let nodal =
            DualGraph::new(vec![CurveNode::new(0, -1).with_z(0)], vec![edge(0, 0)]).unwrap();
        assert_eq!(
            classify_component(&nodal, &[0]).unwrap().class,
            ComponentClass::Egl {
                via: EglKind::NodalRational
            }
        );
        assert!(egl_singularity_check(&nodal, &[0]).is_err());

        let cs = |p: &str| Annotation {
            cs: Some(Scalar::from(qi(-1))),
            lambda: Some(Scalar::from(qi(-1))),
            ..rnd(p)
        };
        let nodes = (0..3)
            .map(|i| {
                CurveNode::new(i, -2)
                    .with_z(2)
                    .with_annotations(vec![cs(&format!("p{i}")), cs(&format!("p{}", (i + 2) % 3))])
            })
            .collect();
        let cyc = DualGraph::new(nodes, vec![edge(0, 1), edge(1, 2), edge(2, 0)]).unwrap();
        assert_eq!(
            classify_component(&cyc, &[0, 1, 2]).unwrap().class,
            ComponentClass::Egl {
                via: EglKind::Cycle
            }
        );
        let rep = egl_singularity_check(&cyc, &[0, 1, 2]).unwrap();
        assert!(rep.pass && rep.cs_checked);

        let mut bad = cyc.clone();
        bad.nodes[1].sing_annotations.as_mut().unwrap()[0].kind = AnnotationKind::SaddleNode;
        assert!(!egl_singularity_check(&bad, &[0, 1, 2]).unwrap().pass);

        let two = DualGraph::new(
            vec![
                CurveNode::new(0, -2).with_z(2).with_annotations(vec![]),
                CurveNode::new(1, -2).with_z(2).with_annotations(vec![]),
            ],
            vec![Edge {
                a: 0,
                b: 1,
                multiplicity: 2,
            }],
        )
        .unwrap();
        assert_eq!(
            classify_component(&two, &[0, 1]).unwrap().class,
            ComponentClass::Egl {
                via: EglKind::Cycle
            }
        );
    }

    #[test]
    fn two_non_reduced_on_minus_two_chain() {
        let g = chain_graph(vec![
            CurveNode::new(0, -2)
                .with_z(2)
                .with_annotations(vec![ann("a", AnnotationKind::NonReduced), rnd("b")]),
            CurveNode::new(1, -2)
                .with_z(2)
                .with_annotations(vec![rnd("b"), ann("c", AnnotationKind::NonReduced)]),
        ]);
        let p = detect_patterns(&g);
        assert!(p.components[0].minus_two_chain);
        assert_eq!(p.components[0].violations.len(), 1);
    }

    #[test]
    fn eigenvalue_propagation() {
        for s in 2..=10usize {
            let e = vec![-2; s];
            let ids: Vec<usize> = (0..s).collect();
            let r = propagate_chain_eigenvalues(&e, &ids, &ChainBoundary::OneSingularity).unwrap();
            for (k, l) in &r.lambdas {
                let k = *k as i64;
                assert_eq!(*l, Scalar::from(q(-k, k - 1)));
            }
            assert!(r.camacho_sad_holds(&e));
            assert!(r.all_below_minus_one);
        }
        let r = propagate_chain_eigenvalues(
            &[-2, -3],
            &[0, 1],
            &ChainBoundary::Given(Scalar::from(qi(-2))),
        )
        .unwrap();
        assert_eq!(r.lambdas[1].1, Scalar::from(q(-5, 2)));
        let r = propagate_chain_eigenvalues(&[-3, -2], &[0, 1], &ChainBoundary::FChainEnd).unwrap();
        assert_eq!(r.lambdas[1].1, Scalar::from(q(-5, 3)));
        assert!(r.all_below_minus_one);
        assert!(matches!(
            propagate_chain_eigenvalues(&[-2, -2], &[0, 1], &ChainBoundary::Given(Scalar::zero())),
            Err(GraphError::SaddleNodePropagation { k: 1 })
        ));
    }

    #[test]
    fn json_roundtrip_and_lattice() {
        let g = dn_graph([0, 1, 2, 3, 4]);
        let text = serde_json::to_string(&g).unwrap();
        let back = DualGraph::from_json(&text).unwrap();
        assert_eq!(back, g);
        let lat = g.to_lattice(&[0, 1, 2, 3, 4]).unwrap();
        assert!(lat.is_negative_definite());
        assert!(g.to_dot().contains("darkgreen"));
        assert!(DualGraph::from_json(
            r#"{"nodes":[{"id":0,"self_int":-2}],"edges":[{"a":0,"b":0,"multiplicity":3}]}"#
        )
        .is_err());
    }
}
