use num_traits::{One, Zero};

use crate::poly::Poly2;
use crate::scalar::Q;

/// Power series in `s` truncated at a fixed length (terms `s^0 .. s^(len-1)`).
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    c: Vec<Q>,
}

impl Series {
    pub fn zero(len: usize) -> Self {
        Series {
            c: vec![Q::zero(); len],
        }
    }

    pub fn from_coeffs(mut c: Vec<Q>, len: usize) -> Self {
        c.resize(len, Q::zero());
        Series { c }
    }

    pub fn constant(v: Q, len: usize) -> Self {
        let mut s = Self::zero(len);
        if len > 0 {
            s.c[0] = v;
        }
        s
    }

    /// `coef * s^k`.
    pub fn monomial(coef: Q, k: usize, len: usize) -> Self {
        let mut s = Self::zero(len);
        if k < len {
            s.c[k] = coef;
        }
        s
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn coeff(&self, k: usize) -> &Q {
        &self.c[k]
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.c
    }

    /// Order of vanishing; `None` if zero to the available precision.
    pub fn order(&self) -> Option<usize> {
        self.c.iter().position(|x| !x.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        Series {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Series {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, k: &Q) -> Self {
        Series {
            c: self.c.iter().map(|a| a * k).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.c.len().min(o.c.len());
        let mut out = vec![Q::zero(); n];
        for (i, a) in self.c.iter().enumerate().take(n) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate().take(n - i) {
                out[i + j] += a * b;
            }
        }
        Series { c: out }
    }

    pub fn derivative(&self) -> Self {
        let n = self.c.len();
        let mut out = vec![Q::zero(); n];
        for k in 1..n {
            out[k - 1] = &self.c[k] * Q::from_integer(k.into());
        }
        // the top coefficient is unknown after differentiating
        Series {
            c: out[..n.saturating_sub(1)].to_vec(),
        }
    }

    /// Multiplicative inverse of a series with nonzero constant term.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.c.len();
        let c0 = self.c.first()?;
        if c0.is_zero() {
            return None;
        }
        let inv0 = c0.recip();
        let mut out = vec![Q::zero(); n];
        out[0] = inv0.clone();
        for k in 1..n {
            let mut acc = Q::zero();
            for j in 1..=k {
                acc += &self.c[j] * &out[k - j];
            }
            out[k] = -acc * &inv0;
        }
        Some(Series { c: out })
    }

    /// Drops the first `k` coefficients (division by `s^k`); the result is shorter.
    pub fn shift_down(&self, k: usize) -> Self {
        Series {
            c: self.c.get(k..).map(<[Q]>::to_vec).unwrap_or_default(),
        }
    }

    /// `p(x(s), y(s))`.
    pub fn compose(p: &Poly2<Q>, x: &Series, y: &Series) -> Self {
        let n = x.len().min(y.len());
        let mut xp = vec![Series::constant(Q::one(), n)];
        let mut yp = vec![Series::constant(Q::one(), n)];
        let mut out = Series::zero(n);
        for (&(i, j), c) in p.terms() {
            while xp.len() <= i as usize {
                let next = xp.last().unwrap().mul(x);
                xp.push(next);
            }
            while yp.len() <= j as usize {
                let next = yp.last().unwrap().mul(y);
                yp.push(next);
            }
            out = out.add(&xp[i as usize].mul(&yp[j as usize]).scale(c));
        }
        out
    }
}

/// Laurent quotient `a / b` as (leading exponent, unit-part series).
/// Returns `None` when `b` vanishes to the available precision.
pub fn laurent_div(a: &Series, b: &Series) -> Option<(i64, Series)> {
    let kb = b.order()?;
    let ka = a.order().unwrap_or(a.len());
    let ub = b.shift_down(kb).inverse()?;
    let ua = a.shift_down(ka.min(a.len()));
    let n = ua.len().min(ub.len());
    let q = Series::from_coeffs(ua.coeffs()[..n].to_vec(), n)
        .mul(&Series::from_coeffs(ub.coeffs()[..n].to_vec(), n));
    Some((ka as i64 - kb as i64, q))
}

/// Residue at `s = 0` of `a(s)/b(s)`; `None` if precision is insufficient.
pub fn residue(a: &Series, b: &Series) -> Option<Q> {
    let (e, q) = laurent_div(a, b)?;
    if e >= 0 {
        return Some(Q::zero());
    }
    let idx = (-1 - e) as usize;
    q.c.get(idx).cloned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qi};

    #[test]
    fn inverse_and_residue() {
        // 1/(1 - s) = 1 + s + s^2 + ...
        let a = Series::from_coeffs(vec![qi(1), qi(-1)], 6);
        let inv = a.inverse().unwrap();
        assert!(inv.coeffs().iter().all(|c| *c == qi(1)));
        // Res (1 + s)/(2 s^2 + 2 s^3) = coefficient of s in (1+s)/(2(1+s)) = 0
        let num = Series::from_coeffs(vec![qi(1), qi(1)], 8);
        let den = Series::from_coeffs(vec![qi(0), qi(0), qi(2), qi(2)], 8);
        assert_eq!(residue(&num, &den), Some(qi(0)));
        // Res 3/(2 s) = 3/2
        let num = Series::constant(qi(3), 8);
        let den = Series::monomial(qi(2), 1, 8);
        assert_eq!(residue(&num, &den), Some(q(3, 2)));
    }
}
