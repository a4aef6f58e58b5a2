use super::algo::gcd2;
use super::{Field, Poly2};
use crate::scalar::Q;

/// Intersection multiplicity of the plane curves `f = 0` and `g = 0` at the
/// origin. `None` when the curves share a component through the origin.
pub fn intersection_multiplicity(f: &Poly2<Q>, g: &Poly2<Q>) -> Option<u64> {
    if f.is_zero() || g.is_zero() {
        return None;
    }
    // the elimination below assumes no common component through the origin
    let d = gcd2(f, g);
    if Field::is_zero(&d.constant_term()) {
        return None;
    }
    let (mut f, mut g) = if d.total_degree() == Some(0) {
        (f.clone(), g.clone())
    } else {
        (f.exact_div(&d)?, g.exact_div(&d)?)
    };
    let mut total: u64 = 0;
    loop {
        if f.is_zero() || g.is_zero() {
            return None;
        }
        if !Field::is_zero(&f.constant_term()) || !Field::is_zero(&g.constant_term()) {
            return Some(total);
        }
        let mut f0 = f.at_y0();
        let mut g0 = g.at_y0();
        if f0.degree() > g0.degree() {
            std::mem::swap(&mut f, &mut g);
            std::mem::swap(&mut f0, &mut g0);
        }
        if f0.is_zero() {
            // f = y * h; I(y, g) is the order of g(x, 0) at 0.
            let k = g0.ord()?;
            total += k as u64;
            f = f.unshift_monomial(0, 1).expect("y divides f");
            continue;
        }
        let r = f0.degree().unwrap();
        let s = g0.degree().unwrap();
        let lf = f0.lc();
        let lg = g0.lc();
        let shifted = f.shift_monomial((s - r) as u32, 0).scale(&lg);
        g = g.scale(&lf).sub(&shifted);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::qi;

    fn p(ts: &[(u32, u32, i64)]) -> Poly2<Q> {
        Poly2::from_terms(ts.iter().map(|&(i, j, c)| ((i, j), qi(c))))
    }

    #[test]
    fn classical_values() {
        let x = p(&[(1, 0, 1)]);
        let y = p(&[(0, 1, 1)]);
        assert_eq!(intersection_multiplicity(&x, &y), Some(1));
        // parabola and its tangent line
        let para = p(&[(0, 1, 1), (2, 0, -1)]);
        assert_eq!(intersection_multiplicity(&para, &y), Some(2));
        // cusp y^2 = x^3 against its tangent y = 0
        let cusp = p(&[(0, 2, 1), (3, 0, -1)]);
        assert_eq!(intersection_multiplicity(&cusp, &y), Some(3));
        assert_eq!(intersection_multiplicity(&cusp, &x), Some(2));
        // curves not through the origin
        let off = p(&[(1, 0, 1), (0, 0, 1)]);
        assert_eq!(intersection_multiplicity(&off, &y), Some(0));
        // common component
        assert_eq!(intersection_multiplicity(&x.mul(&y), &x), None);
        // two cusps: (y^2 - x^3, y^2 - x^3 + x^4 y)? use a textbook pair:
        // I(y^2 - x^3, y^3 - x^2) = 4
        let c2 = p(&[(0, 3, 1), (2, 0, -1)]);
        assert_eq!(intersection_multiplicity(&cusp, &c2), Some(4));
        // shared component x = 0 through the origin, plus a factor away from it
        let xm4 = p(&[(1, 0, 1), (0, 0, -4)]);
        let g = p(&[(1, 1, -6), (1, 0, -2)]).mul(&xm4);
        assert_eq!(intersection_multiplicity(&x.mul(&xm4), &g), None);
        // shared component away from the origin does not contribute
        assert_eq!(
            intersection_multiplicity(&y.mul(&xm4), &x.mul(&xm4)),
            Some(1)
        );
    }
}
