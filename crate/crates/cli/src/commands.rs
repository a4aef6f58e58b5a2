use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;

use folsurf_core::blowup::{
    seidenberg_reduce, verify_pos_rat_structure, ResolutionForest, StopCriterion,
};
use folsurf_core::dualgraph::{
    classify_component, detect_patterns, egl_singularity_check, propagate_chain_eigenvalues,
    ChainBoundary, ComponentClass, DualGraph,
};
use folsurf_core::germ::{classify_at_origin, parse_poly, PlaneGerm};
use folsurf_core::lattice::{epsilon_canonical_test, ExceptionalLattice, WeilDivisorData};
use folsurf_core::localindex::{indices_with, series_oracle_cs_z, tangency_order, BranchSpec};
use folsurf_core::numerics::{
    effective_bounds, extract_invariants, hilbert_function, max_terminal_index,
    standard_sample_points, DeltaSource, InvariantSheet,
};
use folsurf_core::quotsing::{
    generalized_chain_profile, quotient_foliation_charts, QuotSingularity,
};
use folsurf_core::scalar::{fmt_q, parse_rational, Scalar, Q};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::Failure;
use crate::Format;

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable value")
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable value")
}

fn q_json(x: &Q) -> Value {
    Value::String(fmt_q(x))
}

fn q_vec(xs: &[Q]) -> Value {
    Value::Array(xs.iter().map(q_json).collect())
}

fn int_json(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(k) => Value::from(k),
        None => Value::String(x.to_string()),
    }
}

fn read_input(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::input("cli", "io", e))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| Failure::input("cli", "io", format!("{path}: {e}")))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &str) -> Result<T, Failure> {
    let text = read_input(path)?;
    serde_json::from_str(&text).map_err(|e| Failure::input("cli", "json", format!("{path}: {e}")))
}

fn parse_q_list(text: &str) -> Result<Vec<Q>, Failure> {
    text.split(',')
        .map(|t| parse_rational(t).map_err(Failure::from))
        .collect()
}

fn not_json(format: Format, what: &str) -> Failure {
    Failure::input(
        "cli",
        "format",
        format!("{what} does not support --format {format:?}").to_lowercase(),
    )
}

// ---------------------------------------------------------------- reduce

fn reduce_report(forest: &ResolutionForest) -> Result<Value, Failure> {
    let graph = forest.to_dual_graph()?;
    let classification: Vec<Value> = graph
        .components()
        .iter()
        .map(|comp| classify_component(&graph, comp).map(|r| to_value(&r)))
        .collect::<Result<_, _>>()?;
    let audit: Vec<Value> = forest
        .camacho_sad_audit()
        .into_iter()
        .map(|(curve, pass)| json!({"curve": curve, "pass": pass}))
        .collect();
    let cs_pass = audit.iter().all(|a| a["pass"] == Value::Bool(true));
    let ids: Vec<usize> = forest.curves.iter().map(|c| c.id).collect();
    let cross_check = if ids.is_empty() {
        Value::Null
    } else {
        let lat = graph.to_lattice(&ids)?;
        match lat.foliated_canonical_degrees() {
            Ok(from_index) => {
                let from_disc = lat.apply(&forest.foliated_discrepancies());
                json!({
                    "pass": from_index == from_disc,
                    "from_indices": q_vec(&from_index),
                    "from_discrepancies": q_vec(&from_disc),
                })
            }
            Err(e) => json!({"pass": Value::Null, "unavailable": e.to_string()}),
        }
    };
    let pos_rat = match verify_pos_rat_structure(forest) {
        Ok(r) => to_value(&r),
        Err(_) => Value::Null,
    };
    Ok(json!({
        "input": forest.input,
        "forest": forest.to_json(),
        "classification": classification,
        "discrepancies": {
            "foliated": q_vec(&forest.foliated_discrepancies()),
            "ordinary": q_vec(&forest.ordinary_discrepancies()),
        },
        "audit": {
            "camacho_sad": audit,
            "camacho_sad_pass": cs_pass,
            "canonical_cross_check": cross_check,
        },
        "positive_rational_structure": pos_rat,
    }))
}

fn reduce_one(
    text: &str,
    stop: StopCriterion,
    max_depth: usize,
    format: Format,
) -> Result<String, Failure> {
    let v = PlaneGerm::parse(text)?;
    let forest = seidenberg_reduce(&v, max_depth, stop)?;
    match format {
        Format::Json => Ok(pretty(&reduce_report(&forest)?)),
        Format::Text => {
            let mut out = forest.render_text();
            let report = reduce_report(&forest)?;
            let _ = writeln!(
                out,
                "camacho-sad audit: {}",
                if report["audit"]["camacho_sad_pass"] == Value::Bool(true) {
                    "pass"
                } else {
                    "FAIL"
                }
            );
            for c in report["classification"].as_array().into_iter().flatten() {
                let _ = writeln!(out, "component {}: {}", c["nodes"], c["class"]);
            }
            Ok(out)
        }
        Format::Dot => Ok(forest.to_dot()?),
    }
}

pub fn reduce(
    germ: Option<String>,
    corpus: Option<String>,
    stop: StopCriterion,
    max_depth: usize,
    format: Format,
) -> Result<String, Failure> {
    match (germ, corpus) {
        (Some(g), None) => reduce_one(&g, stop, max_depth, format),
        (None, Some(path)) => {
            let text = read_input(&path)?;
            let lines: Vec<&str> = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .collect();
            let mut failed = 0usize;
            let mut json_items = Vec::new();
            let mut blocks = Vec::new();
            for line in lines {
                match reduce_one(line, stop, max_depth, format) {
                    Ok(out) => match format {
                        Format::Json => json_items
                            .push(serde_json::from_str::<Value>(&out).expect("own output parses")),
                        _ => blocks.push(out),
                    },
                    Err(f) => {
                        failed += 1;
                        match format {
                            Format::Json => {
                                let mut e = f.to_json();
                                e["input"] = Value::String(line.to_string());
                                json_items.push(e);
                            }
                            _ => blocks.push(format!("# {line}: {}\n", f.message)),
                        }
                    }
                }
            }
            let out = match format {
                Format::Json => pretty(&Value::Array(json_items)),
                _ => blocks.join("\n"),
            };
            if failed > 0 {
                let mut f = Failure::domain(
                    "blowup",
                    "corpus_partial",
                    format!("{failed} germ(s) failed"),
                );
                f.partial = Some(out);
                return Err(f);
            }
            Ok(out)
        }
        _ => Err(Failure::input(
            "cli",
            "usage",
            "reduce needs a germ or --corpus",
        )),
    }
}

// ---------------------------------------------------------------- classify

pub fn classify(germ: &str, format: Format) -> Result<String, Failure> {
    let v = PlaneGerm::parse(germ)?;
    let c = classify_at_origin(&v);
    match format {
        Format::Json => {
            let mut j = c.to_json();
            j["germ"] = Value::String(v.render());
            Ok(pretty(&j))
        }
        Format::Text => {
            let j = c.to_json();
            let mut out = format!("{}: {}", v.render(), j["kind"].as_str().unwrap_or("?"));
            if let Some(l) = j.get("lambda") {
                let _ = write!(out, " lambda={} (reciprocal {})", l, j["lambda_reciprocal"]);
            }
            let _ = write!(
                out,
                " reduced={} semi_reduced={}",
                c.reduced, c.semi_reduced
            );
            Ok(out)
        }
        Format::Dot => Err(not_json(format, "classify")),
    }
}

// ---------------------------------------------------------------- indices

pub fn indices(
    germ: &str,
    branch: Option<String>,
    curve: Option<String>,
    at: &str,
    trunc: usize,
    oracle: bool,
) -> Result<String, Failure> {
    let v = PlaneGerm::parse(germ)?;
    if let Some(b) = branch {
        let br = BranchSpec::parse(&b)?;
        let rec = indices_with(&v, &br, trunc)?;
        let mut j = to_value(&rec);
        j["branch"] = Value::String(b);
        if oracle {
            let o = series_oracle_cs_z(&v, &br, trunc)?;
            j["oracle"] = to_value(&o);
            j["oracle_agrees"] = Value::Bool(o.cs == rec.cs && o.z == rec.z);
        }
        return Ok(pretty(&j));
    }
    let text = curve.expect("clap requires --branch or --curve");
    let f = parse_poly(&text)?;
    let pt = parse_q_list(at)?;
    if pt.len() != 2 {
        return Err(Failure::input("cli", "usage", "--at expects \"a,b\""));
    }
    let t = tangency_order(&v, &f, &pt[0], &pt[1])?;
    Ok(pretty(&json!({
        "curve": text,
        "point": q_vec(&pt),
        "tangency_order": t,
    })))
}

// ---------------------------------------------------------------- graph

fn chain_boundary(text: &str) -> Result<ChainBoundary, Failure> {
    match text {
        "one-singularity" => Ok(ChainBoundary::OneSingularity),
        "f-chain-end" => Ok(ChainBoundary::FChainEnd),
        other => Ok(ChainBoundary::Given(Scalar::from(parse_rational(other)?))),
    }
}

pub fn graph(input: &str, boundary: Option<String>, format: Format) -> Result<String, Failure> {
    let text = read_input(input)?;
    let g = DualGraph::from_json(&text).map_err(|e| Failure::input("dualgraph", "json", e))?;
    if format == Format::Dot {
        return Ok(g.to_dot());
    }
    let boundary = boundary.as_deref().map(chain_boundary).transpose()?;
    let mut components = Vec::new();
    for comp in g.components() {
        let report = classify_component(&g, &comp)?;
        let mut j = to_value(&report);
        if matches!(report.class, ComponentClass::Egl { .. })
            || matches!(report.candidate, Some(ComponentClass::Egl { .. }))
        {
            j["egl_check"] = to_value(&egl_singularity_check(&g, &comp)?);
        }
        if let (Some(b), Some(order)) = (&boundary, g.path_order(&comp)) {
            let self_ints: Vec<i64> = order
                .iter()
                .map(|&i| g.node(i).map_or(0, |n| n.self_int))
                .collect();
            j["eigenvalues"] = match propagate_chain_eigenvalues(&self_ints, &order, b) {
                Ok(r) => {
                    let mut e = to_value(&r);
                    e["camacho_sad_holds"] = Value::Bool(r.camacho_sad_holds(&self_ints));
                    e
                }
                Err(err) => json!({"unavailable": err.to_string()}),
            };
        }
        components.push(j);
    }
    let patterns = detect_patterns(&g);
    match format {
        Format::Json => Ok(pretty(&json!({
            "components": components,
            "patterns": to_value(&patterns),
        }))),
        _ => {
            let mut out = String::new();
            for c in &components {
                let _ = write!(out, "component {}: {}", c["nodes"], c["class"]);
                if let Some(cand) = c.get("candidate") {
                    let _ = write!(out, " (candidate {cand})");
                }
                out.push('\n');
                if let Some(m) = c["missing"].as_array().filter(|m| !m.is_empty()) {
                    let _ = writeln!(out, "  missing: {}", Value::Array(m.clone()));
                }
            }
            for p in &patterns.components {
                for v in &p.violations {
                    let _ = writeln!(out, "violation on {:?}: {v}", p.nodes);
                }
            }
            Ok(out)
        }
    }
}

// ---------------------------------------------------------------- pullback

#[derive(Deserialize)]
struct PullbackInput {
    lattice: ExceptionalLattice,
    #[serde(default)]
    divisor: Option<WeilDivisorData>,
    #[serde(default)]
    second_divisor: Option<WeilDivisorData>,
    /// `D̃₁ · D̃₂` of the proper transforms.
    #[serde(default)]
    cross: Option<String>,
    #[serde(default)]
    epsilon: Option<String>,
}

pub fn pullback(
    input: &str,
    divisor: Option<String>,
    epsilon: Option<String>,
    regime: bool,
) -> Result<String, Failure> {
    let mut inp: PullbackInput = read_json(input)?;
    inp.lattice.validate()?;
    let lat = &inp.lattice;
    if let Some(d) = divisor {
        inp.divisor = Some(WeilDivisorData::new(parse_q_list(&d)?));
    }
    let eps = epsilon
        .or(inp.epsilon.clone())
        .map(|e| parse_rational(&e))
        .transpose()?;
    let mut out = json!({
        "rank": lat.rank(),
        "determinant": int_json(&lat.determinant()),
        "leading_minors": Value::Array(lat.leading_minors().iter().map(int_json).collect()),
        "negative_definite": lat.is_negative_definite(),
    });
    if !lat.is_negative_definite() {
        let mut f = Failure::domain(
            "lattice",
            "not_negative_definite",
            "intersection matrix is not negative definite",
        );
        f.partial = Some(pretty(&out));
        return Err(f);
    }
    if let Some(d) = &inp.divisor {
        out["pullback"] = q_vec(&lat.mumford_pullback(d)?);
        if let Some(d2) = &inp.second_divisor {
            let cross = inp
                .cross
                .as_deref()
                .map(parse_rational)
                .transpose()?
                .unwrap_or_default();
            out["second_pullback"] = q_vec(&lat.mumford_pullback(d2)?);
            out["intersection_number"] = q_json(&lat.intersection_number(d, d2, &cross)?);
        }
        if let Some(s) = &d.self_pairing {
            out["self_intersection"] = q_json(&lat.intersection_number(d, d, s)?);
        }
    }
    let ord = lat.ordinary_discrepancies();
    let fol = lat.foliated_discrepancies();
    out["discrepancies"] = json!({
        "ordinary": ord.as_ref().map(|v| q_vec(v)).unwrap_or_else(|e| json!({"unavailable": e.to_string()})),
        "foliated": fol.as_ref().map(|v| q_vec(v)).unwrap_or_else(|e| json!({"unavailable": e.to_string()})),
    });
    if let Some(eps) = eps {
        let (Ok(ord), Ok(fol)) = (&ord, &fol) else {
            let mut f = Failure::domain(
                "lattice",
                "epsilon_needs_discrepancies",
                "the ε-test needs both discrepancy vectors",
            );
            f.partial = Some(pretty(&out));
            return Err(f);
        };
        let reports: Vec<Value> = fol
            .iter()
            .zip(ord)
            .enumerate()
            .map(|(i, (f, o))| {
                epsilon_canonical_test(f, o, &eps, regime).map(|r| {
                    let mut j = to_value(&r);
                    j["curve"] = Value::from(i);
                    j
                })
            })
            .collect::<Result<_, _>>()?;
        let pass = reports.iter().all(|r| r["pass"] == Value::Bool(true));
        out["epsilon"] = json!({"epsilon": q_json(&eps), "pass": pass, "curves": reports});
    }
    Ok(pretty(&out))
}

// ---------------------------------------------------------------- quot

pub fn quot(
    n: i64,
    q: i64,
    lambda: Option<String>,
    symbolic: bool,
    format: Format,
) -> Result<String, Failure> {
    let s = QuotSingularity::new(n, q)?;
    let lam = lambda.as_deref().map(parse_rational).transpose()?;
    let charts = quotient_foliation_charts(s, lam.as_ref())?;
    let profile = lam
        .as_ref()
        .map(|l| generalized_chain_profile(s, l))
        .transpose()?;
    match format {
        Format::Json => {
            let mut j = to_value(&charts);
            j["mode"] = Value::String(
                if symbolic || lam.is_none() {
                    "symbolic"
                } else {
                    "lambda"
                }
                .into(),
            );
            j["rendered"] = Value::Array(
                charts
                    .fields
                    .iter()
                    .map(|f| json!({"field": f.render(), "coordinates": f.monomials()}))
                    .collect(),
            );
            if let Some(p) = &profile {
                let g = &p.graph;
                let class: Vec<Value> = g
                    .components()
                    .iter()
                    .map(|c| classify_component(g, c).map(|r| to_value(&r)))
                    .collect::<Result<_, _>>()?;
                let mut pj = to_value(p);
                pj["classification"] = Value::Array(class);
                j["profile"] = pj;
            }
            Ok(pretty(&j))
        }
        Format::Text => {
            let mut out = format!("1/{n}(1,{q}): chain {:?}\n", charts.hj.res_chain);
            for f in &charts.fields {
                let _ = writeln!(out, "{}    [{}]", f.render(), f.monomials());
            }
            for c in &charts.curves {
                let _ = write!(
                    out,
                    "E{} (E^2 = {}): non-invariant at λ = {}",
                    c.curve,
                    c.self_int,
                    fmt_q(&c.lambda_j)
                );
                if let Some(inv) = c.invariant {
                    let _ = write!(out, "; {}", if inv { "invariant" } else { "non-invariant" });
                }
                out.push('\n');
            }
            Ok(out)
        }
        Format::Dot => match profile {
            Some(p) => Ok(p.graph.to_dot()),
            None => Err(Failure::input(
                "cli",
                "usage",
                "--format dot needs --lambda",
            )),
        },
    }
}

// ---------------------------------------------------------------- rr

fn parse_samples(text: &str) -> Result<BTreeMap<i64, BigInt>, Failure> {
    let bad = |m: String| Failure::input("numerics", "samples", m);
    let raw: BTreeMap<String, Value> =
        serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    raw.into_iter()
        .map(|(k, v)| {
            let m: i64 = k.trim().parse().map_err(|_| bad(format!("bad m {k:?}")))?;
            let p = match &v {
                Value::Number(n) => n.as_i64().map(BigInt::from),
                Value::String(s) => s.trim().parse().ok(),
                _ => None,
            }
            .ok_or_else(|| bad(format!("P({m}) must be an integer")))?;
            Ok((m, p))
        })
        .collect()
}

pub fn rr(
    sheet: Option<String>,
    eval: Option<String>,
    extract: Option<String>,
    c2_hint: Option<u64>,
) -> Result<String, Failure> {
    if let Some(path) = extract {
        let samples = parse_samples(&read_input(&path)?)?;
        let c2 =
            c2_hint.ok_or_else(|| Failure::input("cli", "usage", "--extract needs --c2-hint"))?;
        let e = extract_invariants(&samples, c2)?;
        let mut j = to_value(&e);
        j["c2_hint"] = Value::from(c2);
        return Ok(pretty(&j));
    }
    let path = sheet.expect("clap requires --sheet without --extract");
    let sheet: InvariantSheet = read_json(&path)?;
    let p = hilbert_function(&sheet)?;
    let c2 = c2_hint.unwrap_or_else(|| max_terminal_index(&sheet));
    let ms: Vec<i64> = match eval {
        Some(list) => list
            .split(',')
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|_| Failure::input("cli", "usage", format!("bad m {t:?}")))
            })
            .collect::<Result<_, _>>()?,
        None => standard_sample_points(&sheet, c2),
    };
    let mut values = serde_json::Map::new();
    for m in &ms {
        values.insert(m.to_string(), int_json(&p.eval(*m)?));
    }
    Ok(pretty(&json!({
        "sheet": to_value(&sheet),
        "values": values,
        "c2_hint": c2,
        "contribution_sum_at_one": q_json(&sheet.contribution_sum_at_one()),
    })))
}

// ---------------------------------------------------------------- bounds

pub fn bounds(
    sheet: &str,
    i_ky: u64,
    delta: Option<String>,
    quotient: Option<String>,
    c2_hint: Option<u64>,
) -> Result<String, Failure> {
    let sheet: InvariantSheet = read_json(sheet)?;
    sheet.validate()?;
    let source = match (delta, quotient) {
        (Some(d), _) => DeltaSource::Given(parse_rational(&d)?),
        (None, Some(nq)) => {
            let parts: Vec<i64> = nq
                .split(',')
                .map(|t| t.trim().parse())
                .collect::<Result<_, _>>()
                .map_err(|_| Failure::input("cli", "usage", "--quotient expects \"n,q\""))?;
            if parts.len() != 2 {
                return Err(Failure::input("cli", "usage", "--quotient expects \"n,q\""));
            }
            DeltaSource::CyclicQuotient(QuotSingularity::new(parts[0], parts[1])?)
        }
        (None, None) => DeltaSource::SmoothOrDuVal,
    };
    let b = effective_bounds(&sheet, i_ky, &source, c2_hint)?;
    let mut j = to_value(&b);
    j["i_KY"] = Value::from(i_ky);
    Ok(pretty(&j))
}
