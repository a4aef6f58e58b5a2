//! Intersection lattices of exceptional curves: Mumford pullback, pairing of
//! pulled-back divisors, ordinary and foliated discrepancies, and the
//! ε-canonical interpolation test.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{serde_opt_q, serde_q, serde_vec_q, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("gram matrix must be square and non-empty")]
    NotSquare,
    #[error("gram matrix is not symmetric")]
    NotSymmetric,
    #[error("gram entry ({0}, {1}) out of range: diagonal must be <= -1, off-diagonal >= 0")]
    BadEntry(usize, usize),
    #[error("intersection matrix is not negative definite")]
    NotNegativeDefinite,
    #[error("vector length {got} does not match lattice rank {rank}")]
    RankMismatch { rank: usize, got: usize },
    #[error("curve {curve}: missing index data for the foliated canonical class")]
    MissingIndexData { curve: usize },
    #[error("curve {curve} is nodal; supply its virtual Euler characteristic")]
    NodalNeedsChi { curve: usize },
    #[error("solution failed the orthogonality re-check")]
    OrthogonalityViolated,
    #[error("epsilon must satisfy 0 < ε < 1/4 in the requested regime")]
    RegimeViolation,
}

/// Per-curve data mirrored from a dual graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    #[serde(default)]
    pub genus: u32,
    #[serde(default = "default_true")]
    pub invariant: bool,
    #[serde(default)]
    pub z_total: Option<i64>,
    #[serde(default)]
    pub tang_total: Option<u64>,
    /// Number of nodes (self-crossings).
    #[serde(default)]
    pub nodes: u32,
    /// Caller-supplied virtual Euler characteristic, required for nodal curves.
    #[serde(default, with = "serde_opt_q", skip_serializing_if = "Option::is_none")]
    pub chi: Option<Q>,
}

fn default_true() -> bool {
    true
}

impl Default for CurveMeta {
    fn default() -> Self {
        CurveMeta {
            genus: 0,
            invariant: true,
            z_total: None,
            tang_total: None,
            nodes: 0,
            chi: None,
        }
    }
}

/// Gram matrix `E_i · E_j` of exceptional curves with their metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalLattice {
    gram: Vec<Vec<i64>>,
    #[serde(default)]
    curves: Vec<CurveMeta>,
}

/// Intersection data of the proper transform of a Weil divisor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeilDivisorData {
    /// `D̃ · E_i`.
    #[serde(with = "serde_vec_q")]
    pub b: Vec<Q>,
    #[serde(default, with = "serde_opt_q", skip_serializing_if = "Option::is_none")]
    pub self_pairing: Option<Q>,
}

impl WeilDivisorData {
    pub fn new(b: Vec<Q>) -> Self {
        WeilDivisorData {
            b,
            self_pairing: None,
        }
    }
}

fn int(x: i64) -> Q {
    Q::from_integer(x.into())
}

impl ExceptionalLattice {
    pub fn new(gram: Vec<Vec<i64>>, curves: Vec<CurveMeta>) -> Result<Self, LatticeError> {
        let lat = ExceptionalLattice { gram, curves };
        lat.validate()?;
        Ok(lat)
    }

    /// Lattice of a chain of smooth rational curves with self-intersections `-b_i`.
    pub fn chain(b: &[u32]) -> Result<Self, LatticeError> {
        let r = b.len();
        let mut gram = vec![vec![0i64; r]; r];
        for i in 0..r {
            gram[i][i] = -(b[i] as i64);
            if i + 1 < r {
                gram[i][i + 1] = 1;
                gram[i + 1][i] = 1;
            }
        }
        Self::new(gram, vec![CurveMeta::default(); r])
    }

    /// Checks shape and sign conventions; fills in default metadata.
    pub fn validate(&self) -> Result<(), LatticeError> {
        let n = self.gram.len();
        if n == 0 || self.gram.iter().any(|row| row.len() != n) {
            return Err(LatticeError::NotSquare);
        }
        for i in 0..n {
            for j in 0..n {
                if self.gram[i][j] != self.gram[j][i] {
                    return Err(LatticeError::NotSymmetric);
                }
                let ok = if i == j {
                    self.gram[i][j] <= -1
                } else {
                    self.gram[i][j] >= 0
                };
                if !ok {
                    return Err(LatticeError::BadEntry(i, j));
                }
            }
        }
        if !self.curves.is_empty() && self.curves.len() != n {
            return Err(LatticeError::RankMismatch {
                rank: n,
                got: self.curves.len(),
            });
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub fn curve(&self, i: usize) -> CurveMeta {
        self.curves.get(i).cloned().unwrap_or_default()
    }

    /// Leading principal minors via fraction-free elimination. Stops at the
    /// first vanishing minor.
    pub fn leading_minors(&self) -> Vec<BigInt> {
        let n = self.rank();
        let mut m: Vec<Vec<BigInt>> = self
            .gram
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        let mut prev = BigInt::one();
        let mut minors = Vec::with_capacity(n);
        for k in 0..n {
            let pivot = m[k][k].clone();
            minors.push(pivot.clone());
            if pivot.is_zero() {
                break;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &pivot * &m[i][j] - &m[i][k] * &m[k][j];
                    m[i][j] = v / &prev;
                }
            }
            prev = pivot;
        }
        minors
    }

    /// Negative definite iff the leading principal minors alternate in sign,
    /// starting negative.
    pub fn is_negative_definite(&self) -> bool {
        let minors = self.leading_minors();
        minors.len() == self.rank()
            && minors.iter().enumerate().all(|(k, d)| {
                if k % 2 == 0 {
                    d.is_negative()
                } else {
                    d.is_positive()
                }
            })
    }

    pub fn determinant(&self) -> BigInt {
        let minors = self.leading_minors();
        if minors.len() == self.rank() {
            return minors.last().cloned().unwrap_or_else(BigInt::one);
        }
        // a vanishing leading minor: fall back to pivoted elimination
        det_pivoted(&self.gram)
    }

    fn require_definite(&self) -> Result<(), LatticeError> {
        self.validate()?;
        if !self.is_negative_definite() {
            return Err(LatticeError::NotNegativeDefinite);
        }
        Ok(())
    }

    fn check_len(&self, v: &[Q]) -> Result<(), LatticeError> {
        if v.len() != self.rank() {
            return Err(LatticeError::RankMismatch {
                rank: self.rank(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// `gram · v`.
    pub fn apply(&self, v: &[Q]) -> Vec<Q> {
        self.gram
            .iter()
            .map(|row| row.iter().zip(v).map(|(&g, x)| int(g) * x).sum())
            .collect()
    }

    /// Exact solution of `gram · a = rhs` by fraction-free elimination.
    pub fn solve(&self, rhs: &[Q]) -> Result<Vec<Q>, LatticeError> {
        self.require_definite()?;
        self.check_len(rhs)?;
        let n = self.rank();
        let l = rhs.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let lq = Q::from_integer(l.clone());
        let mut m: Vec<Vec<BigInt>> = (0..n)
            .map(|i| {
                let mut row: Vec<BigInt> = self.gram[i].iter().map(|&x| BigInt::from(x)).collect();
                row.push((&rhs[i] * &lq).to_integer());
                row
            })
            .collect();
        let mut prev = BigInt::one();
        for k in 0..n {
            // leading minors are nonzero for a definite matrix, so no pivoting
            let pivot = m[k][k].clone();
            for i in k + 1..n {
                for j in k + 1..=n {
                    let v = &pivot * &m[i][j] - &m[i][k] * &m[k][j];
                    m[i][j] = v / &prev;
                }
                m[i][k] = BigInt::zero();
            }
            prev = pivot;
        }
        let mut a = vec![Q::zero(); n];
        for k in (0..n).rev() {
            let mut acc = Q::from_integer(m[k][n].clone());
            for j in k + 1..n {
                acc -= Q::from_integer(m[k][j].clone()) * &a[j];
            }
            a[k] = acc / Q::from_integer(m[k][k].clone());
        }
        let a: Vec<Q> = a.into_iter().map(|x| x / &lq).collect();
        if self.apply(&a) != rhs {
            return Err(LatticeError::OrthogonalityViolated);
        }
        Ok(a)
    }

    /// Coefficients `a_j` with `(D̃ + Σ a_j E_j) · E_i = 0` for every `i`.
    pub fn mumford_pullback(&self, d: &WeilDivisorData) -> Result<Vec<Q>, LatticeError> {
        self.check_len(&d.b)?;
        let rhs: Vec<Q> = d.b.iter().map(|x| -x).collect();
        let a = self.solve(&rhs)?;
        let check: Vec<Q> = self
            .apply(&a)
            .iter()
            .zip(&d.b)
            .map(|(x, b)| x + b)
            .collect();
        if check.iter().any(|x| !x.is_zero()) {
            return Err(LatticeError::OrthogonalityViolated);
        }
        Ok(a)
    }

    /// Pairing of the two pulled-back divisors, given `D̃₁ · D̃₂ = cross`.
    pub fn intersection_number(
        &self,
        d1: &WeilDivisorData,
        d2: &WeilDivisorData,
        cross: &Q,
    ) -> Result<Q, LatticeError> {
        let a1 = self.mumford_pullback(d1)?;
        let a2 = self.mumford_pullback(d2)?;
        let ga2 = self.apply(&a2);
        let mut total = cross.clone();
        for i in 0..self.rank() {
            total += &a1[i] * &d2.b[i] + &a2[i] * &d1.b[i] + &a1[i] * &ga2[i];
        }
        Ok(total)
    }

    fn chi(&self, i: usize) -> Result<Q, LatticeError> {
        let c = self.curve(i);
        if let Some(chi) = c.chi {
            return Ok(chi);
        }
        if c.nodes > 0 {
            return Err(LatticeError::NodalNeedsChi { curve: i });
        }
        Ok(int(2 - 2 * c.genus as i64))
    }

    /// `K_Y · E_i = -χ(E_i) - E_i²` (adjunction).
    pub fn canonical_degrees(&self) -> Result<Vec<Q>, LatticeError> {
        (0..self.rank())
            .map(|i| Ok(-self.chi(i)? - int(self.gram[i][i])))
            .collect()
    }

    /// Ordinary discrepancies: `K_Y = f*K_X + Σ a_j E_j`.
    pub fn ordinary_discrepancies(&self) -> Result<Vec<Q>, LatticeError> {
        let rhs = self.canonical_degrees()?;
        self.solve(&rhs)
    }

    /// `K_G · E_i` from index data: `Z − χ` for invariant curves, `tang − E²` otherwise.
    pub fn foliated_canonical_degrees(&self) -> Result<Vec<Q>, LatticeError> {
        (0..self.rank())
            .map(|i| {
                let c = self.curve(i);
                if c.invariant {
                    let z = c
                        .z_total
                        .ok_or(LatticeError::MissingIndexData { curve: i })?;
                    Ok(int(z) - self.chi(i)?)
                } else {
                    let t = c
                        .tang_total
                        .ok_or(LatticeError::MissingIndexData { curve: i })?;
                    Ok(int(t as i64) - int(self.gram[i][i]))
                }
            })
            .collect()
    }

    /// Foliated discrepancies: `K_G = f*K_F + Σ a_j E_j`.
    pub fn foliated_discrepancies(&self) -> Result<Vec<Q>, LatticeError> {
        let rhs = self.foliated_canonical_degrees()?;
        self.solve(&rhs)
    }
}

fn det_pivoted(g: &[Vec<i64>]) -> BigInt {
    let n = g.len();
    let mut m: Vec<Vec<BigInt>> = g
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let mut prev = BigInt::one();
    let mut neg = false;
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    neg = !neg;
                }
                None => return BigInt::zero(),
            }
        }
        let pivot = m[k][k].clone();
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &pivot * &m[i][j] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = pivot;
    }
    if neg {
        -prev
    } else {
        prev
    }
}

/// Outcome of the ε-canonical interpolation test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonReport {
    pub pass: bool,
    #[serde(with = "serde_q")]
    pub slope: Q,
    #[serde(with = "serde_q")]
    pub value_at_epsilon: Q,
    /// Smallest `t ≥ 0` from which `a(t) ≥ 0` holds, when the slope permits one.
    #[serde(with = "serde_opt_q")]
    pub threshold: Option<Q>,
}

/// Evaluates `a(t) = (1 − t)·fol + t·ord` at `ε`; passes iff the slope is
/// nonnegative and `a(ε) ≥ 0`.
pub fn epsilon_canonical_test(
    fol: &Q,
    ord: &Q,
    eps: &Q,
    regime: bool,
) -> Result<EpsilonReport, LatticeError> {
    if regime && !(eps.is_positive() && *eps < Q::new(1.into(), 4.into())) {
        return Err(LatticeError::RegimeViolation);
    }
    let slope = ord - fol;
    let value = fol + eps * &slope;
    let threshold = if slope.is_positive() {
        let t = -fol / &slope;
        Some(if t.is_negative() { Q::zero() } else { t })
    } else if slope.is_zero() && !fol.is_negative() {
        Some(Q::zero())
    } else {
        None
    };
    Ok(EpsilonReport {
        pass: !slope.is_negative() && !value.is_negative(),
        slope,
        value_at_epsilon: value,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qi};

    #[test]
    fn pullback_examples() {
        let a1 = ExceptionalLattice::chain(&[2]).unwrap();
        assert_eq!(
            a1.mumford_pullback(&WeilDivisorData::new(vec![qi(1)]))
                .unwrap(),
            vec![q(1, 2)]
        );
        let a2 = ExceptionalLattice::chain(&[2, 2]).unwrap();
        assert_eq!(
            a2.mumford_pullback(&WeilDivisorData::new(vec![qi(1), qi(0)]))
                .unwrap(),
            vec![q(2, 3), q(1, 3)]
        );
        assert_eq!(
            a2.mumford_pullback(&WeilDivisorData::new(vec![qi(0), qi(0)]))
                .unwrap(),
            vec![qi(0), qi(0)]
        );
    }

    #[test]
    fn pairing_examples() {
        let l = ExceptionalLattice::chain(&[5]).unwrap();
        let d = WeilDivisorData::new(vec![qi(1)]);
        assert_eq!(l.intersection_number(&d, &d, &qi(0)).unwrap(), q(1, 5));
        let a1 = ExceptionalLattice::chain(&[2]).unwrap();
        assert_eq!(a1.intersection_number(&d, &d, &qi(0)).unwrap(), q(1, 2));
        let z = WeilDivisorData::new(vec![qi(0)]);
        assert_eq!(a1.intersection_number(&z, &z, &qi(3)).unwrap(), qi(3));
    }

    #[test]
    fn discrepancies() {
        let l = ExceptionalLattice::chain(&[3]).unwrap();
        assert_eq!(l.ordinary_discrepancies().unwrap(), vec![q(-1, 3)]);
        let l = ExceptionalLattice::chain(&[2, 2, 2]).unwrap();
        assert_eq!(l.ordinary_discrepancies().unwrap(), vec![qi(0); 3]);
        let l = ExceptionalLattice::chain(&[2, 4]).unwrap();
        assert_eq!(
            l.ordinary_discrepancies().unwrap(),
            vec![q(-2, 7), q(-4, 7)]
        );
    }

    #[test]
    fn definiteness_and_errors() {
        let bad = ExceptionalLattice::new(vec![vec![-1, 1], vec![1, -1]], vec![]).unwrap();
        assert!(!bad.is_negative_definite());
        assert_eq!(
            bad.mumford_pullback(&WeilDivisorData::new(vec![qi(1), qi(0)])),
            Err(LatticeError::NotNegativeDefinite)
        );
        assert_eq!(bad.determinant(), BigInt::zero());
        assert!(matches!(
            ExceptionalLattice::new(vec![vec![-2, 1], vec![0, -2]], vec![]),
            Err(LatticeError::NotSymmetric)
        ));
        let l = ExceptionalLattice::chain(&[2, 4]).unwrap();
        assert_eq!(l.determinant(), BigInt::from(7));
        let nodal = ExceptionalLattice::new(
            vec![vec![-2]],
            vec![CurveMeta {
                nodes: 1,
                ..CurveMeta::default()
            }],
        )
        .unwrap();
        assert_eq!(
            nodal.ordinary_discrepancies(),
            Err(LatticeError::NodalNeedsChi { curve: 0 })
        );
    }

    #[test]
    fn epsilon_examples() {
        let r = epsilon_canonical_test(&qi(0), &qi(0), &q(1, 10), true).unwrap();
        assert!(r.pass);
        assert_eq!(r.threshold, Some(qi(0)));
        let r = epsilon_canonical_test(&qi(-1), &qi(3), &q(1, 5), false).unwrap();
        assert!(!r.pass);
        assert_eq!(r.threshold, Some(q(1, 4)));
        let r = epsilon_canonical_test(&qi(-1), &qi(3), &q(1, 4), false).unwrap();
        assert!(r.pass);
        let r = epsilon_canonical_test(&qi(1), &qi(-1), &q(1, 100), false).unwrap();
        assert!(!r.pass);
        assert_eq!(r.threshold, None);
        assert_eq!(
            epsilon_canonical_test(&qi(0), &qi(0), &q(1, 2), true),
            Err(LatticeError::RegimeViolation)
        );
    }
}
