use std::collections::BTreeMap;
use std::fmt;

use super::{Field, UPoly};
use crate::scalar::qi;

/// Sparse bivariate polynomial; the key `(i, j)` is the monomial `x^i y^j`.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly2<K> {
    terms: BTreeMap<(u32, u32), K>,
}

fn binomial_row(n: u32) -> Vec<i64> {
    let mut row = vec![1i64];
    for k in 0..n as usize {
        let next = row[k] * (n as i64 - k as i64) / (k as i64 + 1);
        row.push(next);
    }
    row
}

impl<K: Field> Poly2<K> {
    pub fn zero() -> Self {
        Poly2 {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: K) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn one() -> Self {
        Self::constant(K::one())
    }

    pub fn x() -> Self {
        Self::monomial(K::one(), 1, 0)
    }

    pub fn y() -> Self {
        Self::monomial(K::one(), 0, 1)
    }

    pub fn monomial(c: K, i: u32, j: u32) -> Self {
        let mut p = Self::zero();
        p.add_term(i, j, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = ((u32, u32), K)>>(it: I) -> Self {
        let mut p = Self::zero();
        for ((i, j), c) in it {
            p.add_term(i, j, c);
        }
        p
    }

    pub fn add_term(&mut self, i: u32, j: u32, c: K) {
        if c.is_zero() {
            return;
        }
        let key = (i, j);
        let sum = match self.terms.get(&key) {
            Some(old) => old.add(&c),
            None => c,
        };
        if sum.is_zero() {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, sum);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &K)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, i: u32, j: u32) -> K {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(K::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|(i, j)| i + j).max()
    }

    /// Lowest total degree of a nonzero term.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|(i, j)| i + j).min()
    }

    pub fn deg_x(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.0).max()
    }

    pub fn deg_y(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.1).max()
    }

    /// Largest `k` with `x^k` dividing the polynomial.
    pub fn x_valuation(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.0).min()
    }

    pub fn y_valuation(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.1).min()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(i, j), c) in &other.terms {
            out.add_term(i, j, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(i, j), c) in &other.terms {
            out.add_term(i, j, c.neg());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Poly2 {
            terms: self.terms.iter().map(|(k, c)| (*k, c.neg())).collect(),
        }
    }

    pub fn scale(&self, c: &K) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Poly2 {
            terms: self.terms.iter().map(|(k, a)| (*k, a.mul(c))).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&(i, j), a) in &self.terms {
            for (&(k, l), b) in &other.terms {
                out.add_term(i + k, j + l, a.mul(b));
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Multiplies by `x^a y^b`.
    pub fn shift_monomial(&self, a: u32, b: u32) -> Self {
        Poly2 {
            terms: self
                .terms
                .iter()
                .map(|(&(i, j), c)| ((i + a, j + b), c.clone()))
                .collect(),
        }
    }

    /// Divides by `x^a y^b`; `None` if not exact.
    pub fn unshift_monomial(&self, a: u32, b: u32) -> Option<Self> {
        let mut terms = BTreeMap::new();
        for (&(i, j), c) in &self.terms {
            if i < a || j < b {
                return None;
            }
            terms.insert((i - a, j - b), c.clone());
        }
        Some(Poly2 { terms })
    }

    pub fn eval(&self, x: &K, y: &K) -> K {
        let mut acc = K::zero();
        for (&(i, j), c) in &self.terms {
            let mut t = c.clone();
            for _ in 0..i {
                t = t.mul(x);
            }
            for _ in 0..j {
                t = t.mul(y);
            }
            acc = acc.add(&t);
        }
        acc
    }

    pub fn constant_term(&self) -> K {
        self.coeff(0, 0)
    }

    pub fn dx(&self) -> Self {
        let mut out = Self::zero();
        for (&(i, j), c) in &self.terms {
            if i > 0 {
                out.add_term(i - 1, j, c.mul(&K::from_q(&qi(i as i64))));
            }
        }
        out
    }

    pub fn dy(&self) -> Self {
        let mut out = Self::zero();
        for (&(i, j), c) in &self.terms {
            if j > 0 {
                out.add_term(i, j - 1, c.mul(&K::from_q(&qi(j as i64))));
            }
        }
        out
    }

    /// Substitution `y -> x*y` (first blowup chart, before dividing by powers of `x`).
    pub fn chart1_substitute(&self) -> Self {
        Poly2 {
            terms: self
                .terms
                .iter()
                .map(|(&(i, j), c)| ((i + j, j), c.clone()))
                .collect(),
        }
    }

    /// Substitution `x -> x*y` (second blowup chart).
    pub fn chart2_substitute(&self) -> Self {
        Poly2 {
            terms: self
                .terms
                .iter()
                .map(|(&(i, j), c)| ((i, i + j), c.clone()))
                .collect(),
        }
    }

    /// `p(x + a, y + b)`.
    pub fn translate(&self, a: &K, b: &K) -> Self {
        if a.is_zero() && b.is_zero() {
            return self.clone();
        }
        let mut out = Self::zero();
        for (&(i, j), c) in &self.terms {
            let bi = binomial_row(i);
            let bj = binomial_row(j);
            for (k, bik) in bi.iter().enumerate() {
                // x^k a^(i-k)
                let mut ca = c.mul(&K::from_q(&qi(*bik)));
                for _ in 0..(i as usize - k) {
                    ca = ca.mul(a);
                }
                if ca.is_zero() {
                    continue;
                }
                for (l, bjl) in bj.iter().enumerate() {
                    let mut cb = ca.mul(&K::from_q(&qi(*bjl)));
                    for _ in 0..(j as usize - l) {
                        cb = cb.mul(b);
                    }
                    out.add_term(k as u32, l as u32, cb);
                }
            }
        }
        out
    }

    /// Linear change of variables `p(a x + b y, c x + d y)`.
    pub fn linear_substitute(&self, a: &K, b: &K, c: &K, d: &K) -> Self {
        let lx = Self::from_terms([((1, 0), a.clone()), ((0, 1), b.clone())]);
        let ly = Self::from_terms([((1, 0), c.clone()), ((0, 1), d.clone())]);
        self.compose(&lx, &ly)
    }

    /// `p(sx, sy)` for polynomial substitutions `sx`, `sy`.
    pub fn compose(&self, sx: &Self, sy: &Self) -> Self {
        let mut out = Self::zero();
        let mut xpows = vec![Self::one()];
        let mut ypows = vec![Self::one()];
        for (&(i, j), c) in &self.terms {
            while xpows.len() <= i as usize {
                let next = xpows.last().unwrap().mul(sx);
                xpows.push(next);
            }
            while ypows.len() <= j as usize {
                let next = ypows.last().unwrap().mul(sy);
                ypows.push(next);
            }
            out = out.add(&xpows[i as usize].mul(&ypows[j as usize]).scale(c));
        }
        out
    }

    /// Restriction to `y = 0`, as a polynomial in `x`.
    pub fn at_y0(&self) -> UPoly<K> {
        let n = self.deg_x().map_or(0, |d| d as usize + 1);
        let mut v = vec![K::zero(); n];
        for (&(i, j), c) in &self.terms {
            if j == 0 {
                v[i as usize] = c.clone();
            }
        }
        UPoly::new(v)
    }

    /// Restriction to `x = 0`, as a polynomial in `y`.
    pub fn at_x0(&self) -> UPoly<K> {
        let n = self.deg_y().map_or(0, |d| d as usize + 1);
        let mut v = vec![K::zero(); n];
        for (&(i, j), c) in &self.terms {
            if i == 0 {
                v[j as usize] = c.clone();
            }
        }
        UPoly::new(v)
    }

    /// Coefficients as a polynomial in `y` over `K[x]`.
    pub fn as_poly_in_y(&self) -> Vec<UPoly<K>> {
        let n = self.deg_y().map_or(0, |d| d as usize + 1);
        let mut cols: Vec<Vec<K>> = vec![Vec::new(); n];
        for (&(i, j), c) in &self.terms {
            let col = &mut cols[j as usize];
            if col.len() <= i as usize {
                col.resize(i as usize + 1, K::zero());
            }
            col[i as usize] = c.clone();
        }
        cols.into_iter().map(UPoly::new).collect()
    }

    pub fn from_poly_in_y(cols: &[UPoly<K>]) -> Self {
        let mut out = Self::zero();
        for (j, col) in cols.iter().enumerate() {
            for (i, c) in col.coeffs().iter().enumerate() {
                out.add_term(i as u32, j as u32, c.clone());
            }
        }
        out
    }

    /// Embeds a univariate polynomial in `x`.
    pub fn from_upoly_x(p: &UPoly<K>) -> Self {
        Self::from_terms(
            p.coeffs()
                .iter()
                .enumerate()
                .map(|(i, c)| ((i as u32, 0), c.clone())),
        )
    }

    pub fn from_upoly_y(p: &UPoly<K>) -> Self {
        Self::from_terms(
            p.coeffs()
                .iter()
                .enumerate()
                .map(|(j, c)| ((0, j as u32), c.clone())),
        )
    }

    /// Homogeneous part of the given total degree.
    pub fn homogeneous_part(&self, d: u32) -> Self {
        Poly2 {
            terms: self
                .terms
                .iter()
                .filter(|(&(i, j), _)| i + j == d)
                .map(|(k, c)| (*k, c.clone()))
                .collect(),
        }
    }

    /// Leading term in graded-lex order (total degree, then `x` exponent).
    pub fn leading_term(&self) -> Option<((u32, u32), &K)> {
        self.terms
            .iter()
            .max_by_key(|(&(i, j), _)| (i + j, i))
            .map(|(k, c)| (*k, c))
    }

    /// Leading term in lex order with `x > y`.
    fn lex_leading(&self) -> Option<((u32, u32), K)> {
        self.terms.iter().next_back().map(|(k, c)| (*k, c.clone()))
    }

    /// Exact division; `None` when `d` does not divide `self`.
    pub fn exact_div(&self, d: &Self) -> Option<Self> {
        let ((di, dj), dc) = d.lex_leading()?;
        let dinv = dc.inv()?;
        let mut rem = self.clone();
        let mut quo = Self::zero();
        while let Some(((ri, rj), rc)) = rem.lex_leading() {
            if ri < di || rj < dj {
                return None;
            }
            let c = rc.mul(&dinv);
            let t = Self::monomial(c.clone(), ri - di, rj - dj);
            rem = rem.sub(&d.mul(&t));
            quo.add_term(ri - di, rj - dj, c);
        }
        Some(quo)
    }

    /// Maps coefficients into another field.
    pub fn map_coeffs<L: Field, F: Fn(&K) -> L>(&self, f: F) -> Poly2<L> {
        Poly2::from_terms(self.terms.iter().map(|(k, c)| (*k, f(c))))
    }

    /// Terms sorted for printing: descending total degree, ties by higher `x` exponent.
    pub fn print_order(&self) -> Vec<((u32, u32), &K)> {
        let mut v: Vec<_> = self.terms.iter().map(|(k, c)| (*k, c)).collect();
        v.sort_by(|a, b| {
            let (ai, aj) = a.0;
            let (bi, bj) = b.0;
            (bi + bj, bi).cmp(&(ai + aj, ai))
        });
        v
    }

    /// Canonical text with the given variable names.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, "");
        if out.is_empty() {
            "0".into()
        } else {
            out
        }
    }

    /// Appends the terms of `self * suffix` to `out`, each term rendered as
    /// `coeff*x^i*y^j*suffix`. Signs are merged with the separator.
    pub fn render_into(&self, out: &mut String, suffix: &str) {
        for ((i, j), c) in self.print_order() {
            let neg = c.is_negative_literal();
            let mag = if neg { c.neg() } else { c.clone() };
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            let (txt, atomic) = mag.render();
            let has_other = i > 0 || j > 0 || !suffix.is_empty();
            if !mag.is_one() || !has_other {
                factors.push(if atomic { txt } else { format!("({txt})") });
            }
            match i {
                0 => {}
                1 => factors.push("x".into()),
                _ => factors.push(format!("x^{i}")),
            }
            match j {
                0 => {}
                1 => factors.push("y".into()),
                _ => factors.push(format!("y^{j}")),
            }
            if !suffix.is_empty() {
                factors.push(suffix.into());
            }
            out.push_str(&factors.join("*"));
        }
    }
}

impl<K: Field> fmt::Debug for Poly2<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl<K: Field> fmt::Display for Poly2<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qi, Q};

    fn p(ts: &[(u32, u32, i64)]) -> Poly2<Q> {
        Poly2::from_terms(ts.iter().map(|&(i, j, c)| ((i, j), qi(c))))
    }

    #[test]
    fn chart_substitutions() {
        let f = p(&[(1, 0, 2), (0, 1, 5)]);
        assert_eq!(f.chart1_substitute(), p(&[(1, 0, 2), (1, 1, 5)]));
        assert_eq!(f.chart2_substitute(), p(&[(1, 1, 2), (0, 1, 5)]));
    }

    #[test]
    fn translate_matches_compose() {
        let f = p(&[(2, 1, 3), (0, 3, -1), (1, 0, 4)]);
        let a = q(1, 2);
        let b = qi(-3);
        let sx = Poly2::from_terms([((1, 0), qi(1)), ((0, 0), a.clone())]);
        let sy = Poly2::from_terms([((0, 1), qi(1)), ((0, 0), b.clone())]);
        assert_eq!(f.translate(&a, &b), f.compose(&sx, &sy));
    }

    #[test]
    fn exact_division() {
        let a = p(&[(1, 0, 1), (0, 1, 1)]);
        let b = p(&[(2, 0, 1), (0, 1, -1), (0, 0, 3)]);
        let prod = a.mul(&b);
        assert_eq!(prod.exact_div(&a), Some(b.clone()));
        assert_eq!(prod.exact_div(&b), Some(a.clone()));
        assert_eq!(b.exact_div(&a), None);
    }

    #[test]
    fn rendering() {
        let f = p(&[(1, 0, 1), (0, 2, -1), (0, 0, 3)]);
        assert_eq!(f.render(), "-y^2 + x + 3");
        let mut s = String::new();
        p(&[(1, 0, 4)]).render_into(&mut s, "dy");
        assert_eq!(s, "4*x*dy");
    }
}
