use folsurf_core::blowup::{
    blow_up_origin, chart_consistent, seidenberg_reduce, verify_pos_rat_structure, StopCriterion,
};
use folsurf_core::germ::{classify_at_origin, PlaneGerm};
use folsurf_core::scalar::{Scalar, Q};
use num_integer::Integer;

/// Subtractive Euclid steps from (m, n) down to (1, 1).
fn euclid_steps(mut m: u64, mut n: u64) -> usize {
    let mut steps = 0;
    while (m, n) != (1, 1) {
        if m > n {
            m -= n
        } else {
            n -= m
        }
        steps += 1;
    }
    steps
}

fn linear(n: u64, m: u64) -> PlaneGerm {
    PlaneGerm::parse(&format!("{n}*x*dx + {m}*y*dy")).unwrap()
}

#[test]
fn positive_rational_sweep() {
    for m in 1..=12u64 {
        for n in 1..=m {
            if m.gcd(&n) != 1 {
                continue;
            }
            let f = seidenberg_reduce(&linear(n, m), 64, StopCriterion::Reduced).unwrap();
            assert_eq!(f.blowup_count(), 1 + euclid_steps(m, n), "({m},{n})");
            assert!(f.all_final());
            let r = verify_pos_rat_structure(&f).unwrap();
            assert!(r.pass, "({m},{n}): {r:?}");
            // the non-invariant curve is the last one created
            assert_eq!(r.non_invariant, Some(f.curves.len() - 1));
            for c in &f.curves {
                if c.invariant {
                    assert!(c.self_int <= -2);
                }
            }
        }
    }
}

#[test]
fn camacho_sad_and_canonical_degrees() {
    for m in 1..=12u64 {
        for n in 1..=m {
            if m.gcd(&n) != 1 {
                continue;
            }
            let f = seidenberg_reduce(&linear(n, m), 64, StopCriterion::Reduced).unwrap();
            for c in f.curves.iter().filter(|c| c.invariant) {
                assert_eq!(
                    c.cs_total,
                    Some(Scalar::from(Q::from_integer(c.self_int.into())))
                );
            }
            let g = f.to_dual_graph().unwrap();
            let ids: Vec<usize> = f.curves.iter().map(|c| c.id).collect();
            let lat = g.to_lattice(&ids).unwrap();
            assert!(lat.is_negative_definite());
            // K_G . E_i from index data against gram * (foliated discrepancies)
            let from_index = lat.foliated_canonical_degrees().unwrap();
            let from_disc = lat.apply(&f.foliated_discrepancies());
            assert_eq!(from_index, from_disc, "({m},{n})");
            // the ordinary side as well
            assert_eq!(
                lat.canonical_degrees().unwrap(),
                lat.apply(&f.ordinary_discrepancies())
            );
        }
    }
}

#[test]
fn charts_consistent_on_samples() {
    for s in [
        "x*dx + y*dy",
        "(x + y^2)*dx + (x^2 - 3*y)*dy",
        "y*dx + (x^2 + x*y)*dy",
        "(x^3 - y)*dx + (2*x + y^2)*dy",
        "x^2*dx + (y + 3*x*y)*dy",
    ] {
        let v = PlaneGerm::parse(s).unwrap();
        let b = blow_up_origin(&v);
        assert!(chart_consistent(&v, &b.chart1), "{s}");
        assert!(chart_consistent(&v, &b.chart2), "{s}");
        assert_eq!(b.chart1.saturation_order, b.chart2.saturation_order);
    }
}

#[test]
fn nonlinear_germs_reduce() {
    for s in [
        "y*dx + x^2*dy",
        "(x + y^2)*dx + (2*y + x^2)*dy",
        "y^2*dx + x^3*dy",
        "x^2*dx + y^2*dy",
    ] {
        let v = PlaneGerm::parse(s).unwrap();
        let f = seidenberg_reduce(&v, 64, StopCriterion::Reduced)
            .unwrap_or_else(|e| panic!("{s}: {e:?}"));
        assert!(f.all_final(), "{s}");
        for c in f.curves.iter().filter(|c| c.invariant) {
            assert_eq!(
                c.cs_total,
                Some(Scalar::from(Q::from_integer(c.self_int.into()))),
                "{s}: curve {}",
                c.id
            );
        }
        assert!(!classify_at_origin(&v).reduced || f.blowup_count() == 0);
    }
}

#[test]
fn irrational_centers_abort() {
    let v = PlaneGerm::parse("(x^2 - y^2)*dx + 2*x*y*dy").unwrap();
    let e = seidenberg_reduce(&v, 64, StopCriterion::Reduced).unwrap_err();
    assert!(
        matches!(
            e,
            folsurf_core::blowup::BlowupError::IrrationalCenter { .. }
        ),
        "{e:?}"
    );
}
