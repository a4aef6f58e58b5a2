//! Exact polynomial arithmetic used by the germ, blowup and index code.
//!
//! Coefficients live in a [`Field`]; the two fields in use are `Q` and
//! `Q(t)` ([`RatFunc`]) for one-parameter families.

mod algo;
mod intersect;
mod poly2;
mod ratfunc;
mod upoly;

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::scalar::Q;

pub use algo::{gcd2, rational_roots, resultant_y, square_free};
pub use intersect::intersection_multiplicity;
pub use poly2::Poly2;
pub use ratfunc::RatFunc;
pub use upoly::UPoly;

/// Exact field of coefficients.
pub trait Field: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// `None` for zero.
    fn inv(&self) -> Option<Self>;
    fn from_q(x: &Q) -> Self;

    fn div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|i| self.mul(&i))
    }

    fn is_one(&self) -> bool {
        *self == Self::one()
    }

    /// Text form used by the canonical printer. `atomic` is true when the
    /// rendering can be juxtaposed with `*` without parentheses.
    fn render(&self) -> (String, bool);

    /// True when the rendering starts with a minus sign that the printer may
    /// pull out in front of the term.
    fn is_negative_literal(&self) -> bool {
        false
    }
}

impl Field for Q {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        (!Zero::is_zero(self)).then(|| self.recip())
    }
    fn from_q(x: &Q) -> Self {
        x.clone()
    }
    fn render(&self) -> (String, bool) {
        (self.to_string(), true)
    }
    fn is_negative_literal(&self) -> bool {
        self.is_negative()
    }
}
