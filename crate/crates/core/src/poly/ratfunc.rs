use std::fmt;

use super::{Field, UPoly};
use crate::scalar::Q;

/// Element of `Q(t)`, stored as a reduced fraction with monic denominator.
#[derive(Clone, PartialEq, Eq)]
pub struct RatFunc {
    num: UPoly<Q>,
    den: UPoly<Q>,
}

impl RatFunc {
    /// `None` if the denominator is zero.
    pub fn new(num: UPoly<Q>, den: UPoly<Q>) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        if num.is_zero() {
            return Some(Self::from_poly(UPoly::zero()));
        }
        let g = num.gcd(&den);
        let mut n = num.exact_div(&g).expect("gcd divides");
        let mut d = den.exact_div(&g).expect("gcd divides");
        let lc = d.lc();
        let inv = lc.inv().expect("nonzero");
        n = n.scale(&inv);
        d = d.scale(&inv);
        Some(RatFunc { num: n, den: d })
    }

    pub fn from_poly(p: UPoly<Q>) -> Self {
        RatFunc {
            num: p,
            den: UPoly::one(),
        }
    }

    pub fn t() -> Self {
        Self::from_poly(UPoly::var())
    }

    pub fn num(&self) -> &UPoly<Q> {
        &self.num
    }

    pub fn den(&self) -> &UPoly<Q> {
        &self.den
    }

    pub fn as_constant(&self) -> Option<Q> {
        match (self.num.degree(), self.den.degree()) {
            (None, _) => Some(<Q as Zero>::zero()),
            (Some(0), Some(0)) => Some(self.num.coeff(0)),
            _ => None,
        }
    }

    /// Value at a rational point; `None` at a pole.
    pub fn eval(&self, t: &Q) -> Option<Q> {
        let d = self.den.eval(t);
        if Field::is_zero(&d) {
            return None;
        }
        Some(self.num.eval(t) / d)
    }
}

impl Field for RatFunc {
    fn zero() -> Self {
        Self::from_poly(UPoly::zero())
    }
    fn one() -> Self {
        Self::from_poly(UPoly::one())
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    fn add(&self, other: &Self) -> Self {
        if self.den == other.den {
            return Self::new(self.num.add(&other.num), self.den.clone()).expect("nonzero den");
        }
        Self::new(
            self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
        .expect("nonzero den")
    }
    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
    fn mul(&self, other: &Self) -> Self {
        Self::new(self.num.mul(&other.num), self.den.mul(&other.den)).expect("nonzero den")
    }
    fn neg(&self) -> Self {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }
    fn inv(&self) -> Option<Self> {
        Self::new(self.den.clone(), self.num.clone())
    }
    fn from_q(x: &Q) -> Self {
        Self::from_poly(UPoly::constant(x.clone()))
    }
    fn render(&self) -> (String, bool) {
        if let Some(c) = self.as_constant() {
            return (c.to_string(), true);
        }
        let n = self.num.render_in("t");
        let n_atomic = self
            .num
            .coeffs()
            .iter()
            .filter(|c| !Field::is_zero(*c))
            .count()
            == 1
            && !self.num.lc().is_negative_literal();
        if self.den.degree() == Some(0) {
            let atomic = n_atomic && !n.contains('/');
            return (n, atomic);
        }
        let n = if n_atomic { n } else { format!("({n})") };
        let d = self.den.render_in("t");
        let d_atomic = self
            .den
            .coeffs()
            .iter()
            .filter(|c| !Field::is_zero(*c))
            .count()
            == 1
            && self.den.lc() == Q::from_integer(1.into());
        let d = if d_atomic { d } else { format!("({d})") };
        (format!("{n}/{d}"), false)
    }
    fn is_negative_literal(&self) -> bool {
        self.as_constant().is_some_and(|c| c < <Q as Zero>::zero())
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render().0)
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render().0)
    }
}

use num_traits::Zero;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qi};

    #[test]
    fn reduces_fractions() {
        let t = RatFunc::t();
        let one = RatFunc::one();
        let tp1 = t.add(&one);
        let s = tp1.mul(&tp1).div(&t).unwrap();
        assert_eq!(s.eval(&qi(1)), Some(qi(4)));
        assert_eq!(s.eval(&qi(0)), None);
        let back = s.mul(&t).div(&tp1).unwrap();
        assert_eq!(back, tp1);
        assert_eq!(RatFunc::from_q(&q(3, 2)).as_constant(), Some(q(3, 2)));
    }
}
