use std::collections::BTreeMap;

use folsurf_core::dualgraph::{
    classify_component, propagate_chain_eigenvalues, ChainBoundary, CurveNode, DualGraph, Edge,
};
use folsurf_core::germ::classify_at_origin;
use folsurf_core::germ::PlaneGerm;
use folsurf_core::lattice::{ExceptionalLattice, WeilDivisorData};
use folsurf_core::localindex::{
    indices, series_oracle_cs_z, tangency_order, Axis, BranchSpec, IndexRecord,
};
use folsurf_core::numerics::{
    extract_invariants, hilbert_function, local_contribution, max_terminal_index,
    standard_sample_points, InvariantSheet, SingularityKind,
};
use folsurf_core::poly::Poly2;
use folsurf_core::quotsing::{
    continued_fraction_value, hj_expand, quotient_foliation_charts, QuotSingularity,
};
use folsurf_core::scalar::{q, qi, Q};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn poly(terms: &[((u32, u32), i64)]) -> Poly2<Q> {
    Poly2::from_terms(terms.iter().map(|&(e, c)| (e, qi(c))))
}

fn coeff() -> impl Strategy<Value = i64> {
    -4i64..=4
}

/// Field with a given integer linear part and two random quadratic terms per component.
fn germ_strategy() -> impl Strategy<Value = PlaneGerm> {
    (
        [coeff(), coeff(), coeff(), coeff()],
        prop::collection::vec(((0u32..=2), coeff()), 2),
        prop::collection::vec(((0u32..=2), coeff()), 2),
    )
        .prop_filter_map("zero field", |(l, hf, hg)| {
            let mut f = poly(&[((1, 0), l[0]), ((0, 1), l[1])]);
            let mut g = poly(&[((1, 0), l[2]), ((0, 1), l[3])]);
            for (i, c) in hf {
                f = f.add(&poly(&[((i, 2 - i), c)]));
            }
            for (i, c) in hg {
                g = g.add(&poly(&[((i, 2 - i), c)]));
            }
            PlaneGerm::new(f, g).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn classification_survives_linear_conjugation(
        v in germ_strategy(),
        m in [coeff(), coeff(), coeff(), coeff()],
    ) {
        prop_assume!(m[0] * m[3] - m[1] * m[2] != 0);
        let w = v.linear_conjugate(&qi(m[0]), &qi(m[1]), &qi(m[2]), &qi(m[3])).unwrap();
        let (a, b) = (classify_at_origin(&v), classify_at_origin(&w));
        prop_assert_eq!(a.kind, b.kind);
        prop_assert_eq!(a.eigen, b.eigen);
        prop_assert_eq!((a.reduced, a.semi_reduced), (b.reduced, b.semi_reduced));
    }

    #[test]
    fn eigen_pair_is_symmetric_under_axis_swap(v in germ_strategy()) {
        let (a, b) = (classify_at_origin(&v), classify_at_origin(&v.swap_axes()));
        prop_assert_eq!(a.eigen, b.eigen);
        prop_assert_eq!(a.kind, b.kind);
    }

    #[test]
    fn reducedness_flags_are_nested(v in germ_strategy()) {
        let c = classify_at_origin(&v);
        prop_assert!(!c.reduced || c.semi_reduced);
        if !c.is_singular() {
            prop_assert!(!c.reduced && !c.semi_reduced);
        }
    }

    #[test]
    fn print_then_parse_is_identity(v in germ_strategy()) {
        let text = v.render();
        let back = PlaneGerm::parse(&text).unwrap();
        prop_assert_eq!(back.render(), text);
        prop_assert_eq!(back, v);
    }

    #[test]
    fn indices_ignore_unit_multipliers(
        n in 1i64..=5,
        m in -5i64..=5,
        p in prop::collection::vec(((0u32..=2), coeff()), 2),
        u in prop::collection::vec(((0u32..=2), (1u32..=2), coeff()), 2),
        u0 in prop_oneof![1i64..=3, -3i64..=-1],
    ) {
        prop_assume!(m != 0);
        // axes stay invariant: f = x(n + …), g = y(m + …)
        let mut a = poly(&[((0, 0), n)]);
        let mut b = poly(&[((0, 0), m)]);
        for (i, c) in &p {
            a = a.add(&poly(&[((*i, 1 - (*i).min(1)), *c)]));
            b = b.add(&poly(&[((1 - (*i).min(1), *i), *c)]));
        }
        let v = PlaneGerm::new(Poly2::x().mul(&a), Poly2::y().mul(&b)).unwrap();
        let mut unit = poly(&[((0, 0), u0)]);
        for (i, j, c) in &u {
            unit = unit.add(&poly(&[((*i, *j), *c)]));
        }
        let w = v.times_unsaturated(&unit);
        for axis in [Axis::X0, Axis::Y0] {
            let br = BranchSpec::Axis(axis);
            let (ra, rb) = (indices(&v, &br), indices(&w, &br));
            prop_assert_eq!(ra.map(|r| (r.cs, r.z)), rb.map(|r| (r.cs, r.z)));
        }
        let diag = poly(&[((1, 0), 1), ((0, 1), 1)]);
        prop_assert_eq!(
            tangency_order(&v, &diag, &qi(0), &qi(0)),
            tangency_order(&w, &diag, &qi(0), &qi(0))
        );
    }

    #[test]
    fn tangency_positive_at_singular_points(v in germ_strategy(), a in coeff(), b in coeff()) {
        prop_assume!(a != 0 || b != 0);
        prop_assume!(v.is_singular_at_origin());
        let curve = poly(&[((1, 0), a), ((0, 1), b), ((2, 0), 1)]);
        if let Ok(t) = tangency_order(&v, &curve, &qi(0), &qi(0)) {
            prop_assert!(t >= 1);
        }
    }

    #[test]
    fn mumford_pullback_is_orthogonal(
        b in prop::collection::vec(2i64..=5, 1..=6),
        d in prop::collection::vec(-3i64..=3, 6),
    ) {
        let bu: Vec<u32> = b.iter().map(|&x| x as u32).collect();
        let lat = ExceptionalLattice::chain(&bu).unwrap();
        let rhs: Vec<Q> = d[..b.len()].iter().map(|&x| qi(x)).collect();
        let a = lat.mumford_pullback(&WeilDivisorData::new(rhs.clone())).unwrap();
        let ga = lat.apply(&a);
        for i in 0..b.len() {
            prop_assert!((&ga[i] + &rhs[i]).is_zero());
        }
    }

    #[test]
    fn pairing_is_symmetric_and_bilinear(
        b in prop::collection::vec(2i64..=4, 1..=5),
        d1 in prop::collection::vec(-3i64..=3, 5),
        d2 in prop::collection::vec(-3i64..=3, 5),
        k in -3i64..=3,
    ) {
        let bu: Vec<u32> = b.iter().map(|&x| x as u32).collect();
        let lat = ExceptionalLattice::chain(&bu).unwrap();
        let r = b.len();
        let w = |d: &[i64]| WeilDivisorData::new(d[..r].iter().map(|&x| qi(x)).collect());
        let (x, y) = (w(&d1), w(&d2));
        let c = qi(0);
        let xy = lat.intersection_number(&x, &y, &c).unwrap();
        prop_assert_eq!(&xy, &lat.intersection_number(&y, &x, &c).unwrap());
        let sum: Vec<i64> = (0..r).map(|i| k * d1[i] + d2[i]).collect();
        let lhs = lat.intersection_number(&w(&sum), &y, &c).unwrap();
        let rhs = qi(k) * xy + lat.intersection_number(&y, &y, &c).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn cartier_divisors_pull_back_integrally(
        b in prop::collection::vec(2i64..=5, 1..=6),
        z in prop::collection::vec(-3i64..=3, 6),
    ) {
        let bu: Vec<u32> = b.iter().map(|&x| x as u32).collect();
        let lat = ExceptionalLattice::chain(&bu).unwrap();
        let zq: Vec<Q> = z[..b.len()].iter().map(|&x| qi(x)).collect();
        let rhs: Vec<Q> = lat.apply(&zq).iter().map(|x| -x).collect();
        let a = lat.mumford_pullback(&WeilDivisorData::new(rhs)).unwrap();
        prop_assert!(a.iter().all(|x| x.is_integer()));
    }

    #[test]
    fn local_contribution_is_periodic(k in 0usize..6, n in 2i64..=9, m in 1u64..=40) {
        let kinds = [
            SingularityKind::CartierPoint,
            SingularityKind::MildLcNonCanonical,
            SingularityKind::GorensteinCanonical,
            SingularityKind::TwoGorensteinCanonical,
            SingularityKind::NonQGorensteinCanonical,
            SingularityKind::Terminal { n, q: 1 },
        ];
        let kind = kinds[k];
        let (a, b) = (local_contribution(kind, m), local_contribution(kind, m + kind.period()));
        if let (Some(a), Some(b)) = (a, b) {
            prop_assert_eq!(a, b);
        }
    }
}

fn index_pair(r: IndexRecord) -> (String, i64) {
    (r.cs.to_string(), r.z)
}

#[test]
fn oracle_matches_closed_forms_for_small_weights() {
    for m in 1..=7i64 {
        for n in 1..=7i64 {
            if m.gcd(&n) != 1 {
                continue;
            }
            let v = PlaneGerm::parse(&format!("{n}*x*dx + {m}*y*dy")).unwrap();
            for axis in [Axis::X0, Axis::Y0] {
                let br = BranchSpec::Axis(axis);
                let closed = indices(&v, &br).unwrap();
                let oracle = series_oracle_cs_z(&v, &br, 32).unwrap();
                assert_eq!(index_pair(closed), index_pair(oracle), "({m},{n}) {axis:?}");
            }
            if m >= 2 && n >= 2 {
                let br = BranchSpec::Cusp {
                    a: qi(1),
                    m: m as u32,
                    n: n as u32,
                };
                let closed = indices(&v, &br).unwrap();
                let oracle = series_oracle_cs_z(&v, &br, 32).unwrap();
                assert_eq!(index_pair(closed), index_pair(oracle), "({m},{n}) cusp");
            }
        }
    }
}

#[test]
fn hirzebruch_jung_strings_recompose() {
    for n in 2..=50i64 {
        for qq in 1..n {
            if n.gcd(&qq) != 1 {
                continue;
            }
            let hj = hj_expand(n, qq).unwrap();
            assert_eq!(continued_fraction_value(&hj.res_chain), Some(q(n, qq)));
            assert_eq!(continued_fraction_value(&hj.edim_chain), Some(q(n, n - qq)));
            assert!(hj.res_chain.iter().chain(&hj.edim_chain).all(|&b| b >= 2));
            let bu: Vec<u32> = hj.res_chain.iter().map(|&b| b as u32).collect();
            let lat = ExceptionalLattice::chain(&bu).unwrap();
            assert!(lat.is_negative_definite());
            assert_eq!(lat.determinant().abs(), BigInt::from(n));
            for i in 0..bu.len() {
                let mut e = vec![qi(0); bu.len()];
                e[i] = qi(1);
                let a = lat.mumford_pullback(&WeilDivisorData::new(e)).unwrap();
                assert!(a.iter().all(|x| (BigInt::from(n) % x.denom()).is_zero()));
            }
        }
    }
    let a1 = ExceptionalLattice::chain(&[2]).unwrap();
    assert_eq!(
        a1.mumford_pullback(&WeilDivisorData::new(vec![qi(1)]))
            .unwrap(),
        vec![q(1, 2)]
    );
}

#[test]
fn quotient_charts_are_unimodular_with_one_root_per_curve() {
    for n in 2..=12i64 {
        for qq in 1..n {
            if n.gcd(&qq) != 1 {
                continue;
            }
            let charts =
                quotient_foliation_charts(QuotSingularity::new(n, qq).unwrap(), None).unwrap();
            let r = hj_expand(n, qq).unwrap().res_chain.len();
            assert_eq!(charts.curves.len(), r);
            for t in &charts.transitions {
                assert_eq!((t[0][0] * t[1][1] - t[0][1] * t[1][0]).abs(), 1);
            }
            for c in &charts.curves {
                assert!(c.lambda_j > qi(0), "({n},{qq}) curve {}", c.curve);
            }
        }
    }
}

#[test]
fn saddle_node_chains_propagate() {
    for s in 2..=10usize {
        let e = vec![-2i64; s];
        let ids: Vec<usize> = (0..s).collect();
        let r = propagate_chain_eigenvalues(&e, &ids, &ChainBoundary::OneSingularity).unwrap();
        let lam: BTreeMap<usize, Q> = r
            .lambdas
            .iter()
            .map(|(k, l)| (*k, l.as_rational().unwrap().clone()))
            .collect();
        for (&k, l) in &lam {
            assert_eq!(*l, q(-(k as i64), k as i64 - 1));
            if let Some(prev) = lam.get(&(k - 1)) {
                assert_eq!(prev.recip() + l, qi(e[k - 1]));
            }
        }
    }
}

/// Random sheet whose `K_F·K_X` makes `P(1)` integral.
fn random_sheet(rng: &mut StdRng) -> (InvariantSheet, u64) {
    let count = rng.gen_range(0..=5);
    let kinds: Vec<SingularityKind> = (0..count)
        .map(|_| match rng.gen_range(0..6) {
            0 => SingularityKind::CartierPoint,
            1 => SingularityKind::MildLcNonCanonical,
            2 => SingularityKind::GorensteinCanonical,
            3 => SingularityKind::TwoGorensteinCanonical,
            4 => SingularityKind::NonQGorensteinCanonical,
            _ => {
                let n = rng.gen_range(2..=9i64);
                let qs: Vec<i64> = (1..n).filter(|k| k.gcd(&n) == 1).collect();
                SingularityKind::Terminal {
                    n,
                    q: qs[rng.gen_range(0..qs.len())],
                }
            }
        })
        .collect();
    let sum: Q = kinds
        .iter()
        .map(|k| local_contribution(*k, 1).unwrap())
        .sum();
    let den = kinds
        .iter()
        .map(|k| k.period() as i64)
        .fold(1i64, |a, b| a.lcm(&b));
    let kf2 = q(rng.gen_range(1..=40), den);
    let shift = qi(rng.gen_range(-6..=6));
    let kfkx = &kf2 + &sum * qi(2) - shift * qi(2);
    let sheet = InvariantSheet::new(kf2, kfkx, rng.gen_range(-3..=5), kinds);
    let c2 = max_terminal_index(&sheet).max(rng.gen_range(1..=4));
    (sheet, c2)
}

#[test]
fn riemann_roch_roundtrip_on_random_sheets() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for _ in 0..200 {
        let (sheet, c2) = random_sheet(&mut rng);
        let p = hilbert_function(&sheet).unwrap();
        let ms = standard_sample_points(&sheet, c2);
        let samples = p.sample(&ms).unwrap();
        let e = extract_invariants(&samples, c2).unwrap();
        assert_eq!(e.b1, sheet.kf2);
        assert_eq!(e.b2, sheet.kfkx);
        assert_eq!(e.b3, BigInt::from(sheet.chi_o));
        assert_eq!(e.b4, BigInt::from(sheet.cusps()));
        assert_eq!(e.contribution_sum, sheet.contribution_sum_at_one());

        let mut more = sheet.clone();
        more.sing_multiset
            .push(SingularityKind::NonQGorensteinCanonical);
        let p2 = hilbert_function(&more).unwrap();
        for &m in ms.iter().filter(|&&m| m >= 1) {
            assert_eq!(p2.eval(m).unwrap(), p.eval(m).unwrap() - BigInt::one());
        }
    }
}

fn f_chain(ids: [usize; 3]) -> DualGraph {
    let nodes = vec![
        CurveNode::new(ids[0], -2).with_z(1),
        CurveNode::new(ids[1], -2).with_z(2),
        CurveNode::new(ids[2], -2).with_z(2),
    ];
    let edges = vec![
        Edge {
            a: ids[0],
            b: ids[1],
            multiplicity: 1,
        },
        Edge {
            a: ids[1],
            b: ids[2],
            multiplicity: 1,
        },
    ];
    DualGraph::new(nodes, edges).unwrap()
}

proptest! {
    #[test]
    fn classification_is_stable_under_relabeling(ids in prop::sample::subsequence((0usize..40).collect::<Vec<_>>(), 3).prop_shuffle()) {
        let base = classify_component(&f_chain([0, 1, 2]), &[0, 1, 2]).unwrap();
        let ids = [ids[0], ids[1], ids[2]];
        let g = f_chain(ids);
        let r = classify_component(&g, &ids).unwrap();
        prop_assert_eq!(r.class, base.class);
    }
}
