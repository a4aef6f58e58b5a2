use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{Field, Poly2, UPoly};
use crate::scalar::Q;

type QPoly = UPoly<Q>;

/// Content (monic gcd of the `y`-coefficients) of a polynomial in `Q[x][y]`.
fn content(cols: &[QPoly]) -> QPoly {
    cols.iter().fold(QPoly::zero(), |g, c| g.gcd(c))
}

fn primitive(cols: &[QPoly]) -> Vec<QPoly> {
    let c = content(cols);
    if c.is_zero() {
        return cols.to_vec();
    }
    cols.iter()
        .map(|p| p.exact_div(&c).expect("content divides"))
        .collect()
}

fn trim(mut cols: Vec<QPoly>) -> Vec<QPoly> {
    while cols.last().is_some_and(|c| c.is_zero()) {
        cols.pop();
    }
    cols
}

/// Pseudo-remainder of `a` by `b` in `Q[x][y]`.
fn prem(a: &[QPoly], b: &[QPoly]) -> Vec<QPoly> {
    let db = b.len() - 1;
    let lb = &b[db];
    let mut r = trim(a.to_vec());
    while r.len() > db && !r.is_empty() {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        let shift = dr - db;
        let mut next: Vec<QPoly> = r.iter().map(|c| c.mul(lb)).collect();
        for (k, bk) in b.iter().enumerate() {
            next[k + shift] = next[k + shift].sub(&bk.mul(&lr));
        }
        r = trim(next);
    }
    r
}

/// Normalizes so that the graded-lex leading coefficient is one.
fn normalize(p: Poly2<Q>) -> Poly2<Q> {
    match p.leading_term() {
        Some((_, c)) => {
            let inv = c.recip();
            p.scale(&inv)
        }
        None => p,
    }
}

/// Greatest common divisor in `Q[x, y]`, normalized so its graded-lex leading
/// coefficient is one. `gcd(0, 0) = 0`.
pub fn gcd2(f: &Poly2<Q>, g: &Poly2<Q>) -> Poly2<Q> {
    if f.is_zero() {
        return normalize(g.clone());
    }
    if g.is_zero() {
        return normalize(f.clone());
    }
    let fa = f.as_poly_in_y();
    let ga = g.as_poly_in_y();
    let cont = content(&fa).gcd(&content(&ga));
    let mut a = primitive(&fa);
    let mut b = primitive(&ga);
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !b.is_empty() {
        let r = prem(&a, &b);
        a = b;
        b = if r.is_empty() { r } else { primitive(&r) };
    }
    let res = Poly2::from_poly_in_y(&a).mul(&Poly2::from_upoly_x(&cont));
    normalize(res)
}

/// Fraction-free determinant over `Q[x]` (Bareiss).
fn det_bareiss(mut m: Vec<Vec<QPoly>>) -> QPoly {
    let n = m.len();
    if n == 0 {
        return QPoly::one();
    }
    let mut sign = false;
    let mut prev = QPoly::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = !sign;
                }
                None => return QPoly::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = m[k][k].mul(&m[i][j]).sub(&m[i][k].mul(&m[k][j]));
                m[i][j] = v.exact_div(&prev).expect("Bareiss division is exact");
            }
            m[i][k] = QPoly::zero();
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign {
        d.neg()
    } else {
        d
    }
}

/// Resultant with respect to `y`, a polynomial in `x`.
pub fn resultant_y(f: &Poly2<Q>, g: &Poly2<Q>) -> QPoly {
    let a = trim(f.as_poly_in_y());
    let b = trim(g.as_poly_in_y());
    if a.is_empty() || b.is_empty() {
        return QPoly::zero();
    }
    let m = a.len() - 1;
    let n = b.len() - 1;
    if m == 0 && n == 0 {
        return QPoly::one();
    }
    if m == 0 {
        return a[0].pow(n as u32);
    }
    if n == 0 {
        return b[0].pow(m as u32);
    }
    let size = m + n;
    let mut mat = vec![vec![QPoly::zero(); size]; size];
    for r in 0..n {
        for (k, c) in a.iter().enumerate() {
            // highest degree first across the row
            mat[r][r + (m - k)] = c.clone();
        }
    }
    for r in 0..m {
        for (k, c) in b.iter().enumerate() {
            mat[n + r][r + (n - k)] = c.clone();
        }
    }
    det_bareiss(mat)
}

/// Square-free part (monic).
pub fn square_free(p: &QPoly) -> QPoly {
    if p.is_zero() {
        return QPoly::zero();
    }
    let g = p.gcd(&p.derivative());
    p.exact_div(&g).expect("gcd divides").monic()
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let mut n = n.abs();
    let mut primes: Vec<(BigInt, u32)> = Vec::new();
    let mut d = BigInt::from(2);
    while &d * &d <= n {
        if (&n % &d).is_zero() {
            let mut e = 0;
            while (&n % &d).is_zero() {
                n /= &d;
                e += 1;
            }
            primes.push((d.clone(), e));
        }
        d += 1;
    }
    if n > BigInt::one() {
        primes.push((n, 1));
    }
    let mut out = vec![BigInt::one()];
    for (p, e) in primes {
        let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
        for base in &out {
            let mut pk = BigInt::one();
            for _ in 0..=e {
                next.push(base * &pk);
                pk *= &p;
            }
        }
        out = next;
    }
    out.sort();
    out
}

/// All rational roots of a nonzero polynomial, sorted ascending, without multiplicity.
pub fn rational_roots(p: &QPoly) -> Vec<Q> {
    if p.is_zero() {
        return Vec::new();
    }
    let sf = square_free(p);
    let mut roots = Vec::new();
    let ord = sf.ord().unwrap_or(0);
    if ord > 0 {
        roots.push(<Q as Zero>::zero());
    }
    let coeffs = &sf.coeffs()[ord..];
    if coeffs.len() <= 1 {
        return roots;
    }
    let lcm = coeffs
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = coeffs
        .iter()
        .map(|c| (c * Q::from_integer(lcm.clone())).to_integer())
        .collect();
    let reduced = QPoly::new(ints.iter().map(|c| Q::from_integer(c.clone())).collect());
    let a0 = &ints[0];
    let an = ints.last().unwrap();
    let ps = divisors(a0);
    let qs = divisors(an);
    for pn in &ps {
        for qd in &qs {
            if !pn.gcd(qd).is_one() {
                continue;
            }
            for sgn in [1i32, -1] {
                let cand = Q::new(pn * BigInt::from(sgn), qd.clone());
                if Field::is_zero(&reduced.eval(&cand)) {
                    roots.push(cand);
                }
            }
        }
    }
    roots.sort();
    roots.dedup();
    roots
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qi};

    fn p(ts: &[(u32, u32, i64)]) -> Poly2<Q> {
        Poly2::from_terms(ts.iter().map(|&(i, j, c)| ((i, j), qi(c))))
    }

    fn u(cs: &[i64]) -> QPoly {
        QPoly::new(cs.iter().map(|&c| qi(c)).collect())
    }

    #[test]
    fn bivariate_gcd() {
        let common = p(&[(1, 0, 1), (0, 1, 1)]); // x + y
        let a = common.mul(&p(&[(1, 0, 2), (0, 0, 1)]));
        let b = common.mul(&p(&[(0, 2, 3), (1, 1, -1)]));
        assert_eq!(gcd2(&a, &b), common);
        let x = p(&[(1, 0, 1)]);
        let y = p(&[(0, 1, 1)]);
        assert_eq!(gcd2(&x, &y), Poly2::one());
        assert_eq!(gcd2(&x.mul(&x), &x.mul(&y)), x);
        let twox = p(&[(1, 0, 2)]);
        let fivey = p(&[(0, 1, 5)]);
        assert_eq!(gcd2(&twox, &fivey), Poly2::one());
    }

    #[test]
    fn resultant_finds_common_x() {
        // f = x^2 - x, g = y: common zeros at x = 0, 1
        let f = p(&[(2, 0, 1), (1, 0, -1)]);
        let g = p(&[(0, 1, 1)]);
        let r = resultant_y(&f, &g);
        assert_eq!(rational_roots(&r), vec![qi(0), qi(1)]);
        // f = y - x, g = y + x - 2 -> x = 1
        let f = p(&[(0, 1, 1), (1, 0, -1)]);
        let g = p(&[(0, 1, 1), (1, 0, 1), (0, 0, -2)]);
        let r = resultant_y(&f, &g);
        assert_eq!(rational_roots(&r), vec![qi(1)]);
    }

    #[test]
    fn rational_root_extraction() {
        // (2t - 1)(t + 3)(t^2 + 1) t^2
        let pp = u(&[-1, 2])
            .mul(&u(&[3, 1]))
            .mul(&u(&[1, 0, 1]))
            .mul(&u(&[0, 0, 1]));
        assert_eq!(rational_roots(&pp), vec![qi(-3), qi(0), q(1, 2)]);
        assert!(rational_roots(&u(&[2, 0, 1])).is_empty());
    }
}
