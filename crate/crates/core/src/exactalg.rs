//! Exact multivariate Laurent polynomials with integer coefficients.
//!
//! These carry torus characters `ξ^e`, the fundamental characters `b_i`, the
//! Weyl denominator and the discriminant. All arithmetic is exact; the only
//! place a ring other than `ℤ` enters is [`LaurentPoly::evaluate`], which is
//! generic over [`EvalRing`].

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },
    #[error("coordinate index {index} out of range for rank {rank}")]
    IndexOutOfRange { index: usize, rank: usize },
    #[error("expected {expected} polynomials for a square Jacobian, got {got}")]
    WrongCount { expected: usize, got: usize },
    #[error("evaluation point has length {got}, expected {expected}")]
    PointLength { expected: usize, got: usize },
    #[error("coordinate {index} is not invertible in the target ring")]
    NotInvertible { index: usize },
}

/// Exponent vector of a monomial `ξ_1^{e_1} ⋯ ξ_r^{e_r}`. Ordered lexicographically.
pub type Monomial = Vec<i32>;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    rank: usize,
    terms: BTreeMap<Monomial, BigInt>,
}

impl LaurentPoly {
    pub fn zero(rank: usize) -> Self {
        assert!(rank > 0, "rank must be positive");
        LaurentPoly { rank, terms: BTreeMap::new() }
    }

    pub fn one(rank: usize) -> Self {
        Self::constant(rank, 1)
    }

    pub fn constant(rank: usize, c: impl Into<BigInt>) -> Self {
        Self::monomial(vec![0; rank], c)
    }

    pub fn monomial(exponents: Monomial, c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero(exponents.len());
        p.add_term(exponents, c.into());
        p
    }

    /// The coordinate `ξ_j` (zero-based `j`).
    pub fn variable(rank: usize, j: usize) -> Self {
        assert!(j < rank, "variable index {j} out of range for rank {rank}");
        let mut e = vec![0; rank];
        e[j] = 1;
        Self::monomial(e, 1)
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs; repeated
    /// monomials are summed and zeros dropped.
    pub fn from_terms<I, C>(rank: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, C)>,
        C: Into<BigInt>,
    {
        let mut p = Self::zero(rank);
        for (e, c) in terms {
            assert_eq!(e.len(), rank, "monomial length must equal rank");
            p.add_term(e, c.into());
        }
        p
    }

    fn add_term(&mut self, e: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &[i32]) -> BigInt {
        self.terms.get(e).cloned().unwrap_or_else(BigInt::zero)
    }

    /// Largest monomial in lexicographic order.
    pub fn leading_term(&self) -> Option<(&Monomial, &BigInt)> {
        self.terms.iter().next_back()
    }

    fn check_rank(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.rank != other.rank {
            return Err(AlgebraError::RankMismatch { left: self.rank, right: other.rank });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_rank(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.try_add(&-other)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_rank(other)?;
        let mut acc: BTreeMap<Monomial, BigInt> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Monomial = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_insert_with(BigInt::zero) += c1 * c2;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(LaurentPoly { rank: self.rank, terms: acc })
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero(self.rank);
        }
        LaurentPoly {
            rank: self.rank,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(self.rank);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Logarithmic derivation `ξ_j ∂/∂ξ_j` (zero-based `j`): `c·ξ^e ↦ c·e_j·ξ^e`.
    pub fn log_derive(&self, j: usize) -> Result<Self, AlgebraError> {
        if j >= self.rank {
            return Err(AlgebraError::IndexOutOfRange { index: j, rank: self.rank });
        }
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| e[j] != 0)
            .map(|(e, c)| (e.clone(), c * BigInt::from(e[j])))
            .collect();
        Ok(LaurentPoly { rank: self.rank, terms })
    }

    /// Applies `f` to every exponent vector, summing collisions.
    pub fn map_exponents<F: Fn(&[i32]) -> Monomial>(&self, f: F) -> Self {
        let mut out = Self::zero(self.rank);
        for (e, c) in &self.terms {
            let ne = f(e);
            assert_eq!(ne.len(), self.rank);
            out.add_term(ne, c.clone());
        }
        out
    }

    /// Substitutes `subs[i]` for the `i`-th variable. All exponents must be
    /// nonnegative (the polynomial lives on an affine space such as the
    /// Steinberg base).
    pub fn substitute(&self, subs: &[LaurentPoly]) -> Result<LaurentPoly, AlgebraError> {
        if subs.len() != self.rank {
            return Err(AlgebraError::PointLength { expected: self.rank, got: subs.len() });
        }
        let target = subs.first().map(|s| s.rank).unwrap_or(1);
        for s in subs {
            if s.rank != target {
                return Err(AlgebraError::RankMismatch { left: target, right: s.rank });
            }
        }
        let mut out = LaurentPoly::zero(target);
        for (e, c) in &self.terms {
            let mut t = LaurentPoly::constant(target, c.clone());
            for (i, &k) in e.iter().enumerate() {
                assert!(k >= 0, "substitute needs nonnegative exponents");
                t = &t * &subs[i].pow(k as u32);
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// Exact substitution of `point` into the polynomial over the ring `R`.
    pub fn evaluate<R: EvalRing>(&self, point: &[R]) -> Result<R, AlgebraError> {
        if point.len() != self.rank {
            return Err(AlgebraError::PointLength { expected: self.rank, got: point.len() });
        }
        // only coordinates raised to negative powers need to be units
        let inverses = point
            .iter()
            .enumerate()
            .map(|(i, x)| {
                if self.terms.keys().any(|e| e[i] < 0) {
                    x.inverse().map(Some).ok_or(AlgebraError::NotInvertible { index: i })
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let proto = &point[0];
        let mut total = proto.zero_like();
        for (e, c) in &self.terms {
            let mut t = proto.from_bigint_like(c);
            for (i, &k) in e.iter().enumerate() {
                let base = if k >= 0 { &point[i] } else { inverses[i].as_ref().expect("inverted above") };
                for _ in 0..k.unsigned_abs() {
                    t = t.mul(base);
                }
            }
            total = total.add(&t);
        }
        Ok(total)
    }

    /// Sum of coefficients, i.e. the value at the all-ones point.
    pub fn coefficient_sum(&self) -> BigInt {
        self.terms.values().sum()
    }
}

impl fmt::Display for LaurentPoly {
    /// Canonical rendering: terms in descending lexicographic order of the
    /// exponent vector, variables named `x1..xr`, signs written explicitly
    /// between terms.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (idx, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k != 0)
                .map(|(i, &k)| if k == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, k) })
                .collect();
            if vars.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", mag, vars.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly[r={}]({})", self.rank, self)
    }
}

impl<'a> Add<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &'a LaurentPoly) -> LaurentPoly {
        self.try_add(rhs).expect("rank mismatch in LaurentPoly addition")
    }
}

impl<'a> Sub<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &'a LaurentPoly) -> LaurentPoly {
        self.try_sub(rhs).expect("rank mismatch in LaurentPoly subtraction")
    }
}

impl<'a> Mul<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &'a LaurentPoly) -> LaurentPoly {
        self.try_mul(rhs).expect("rank mismatch in LaurentPoly multiplication")
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            rank: self.rank,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

/// Determinant of the `r×r` matrix `[ξ_j ∂/∂ξ_j p_i]`, by cofactor expansion.
pub fn jacobian_log_det(ps: &[LaurentPoly]) -> Result<LaurentPoly, AlgebraError> {
    let r = ps.first().map(|p| p.rank).ok_or(AlgebraError::WrongCount { expected: 1, got: 0 })?;
    if ps.len() != r {
        return Err(AlgebraError::WrongCount { expected: r, got: ps.len() });
    }
    let mut m = Vec::with_capacity(r);
    for p in ps {
        if p.rank != r {
            return Err(AlgebraError::RankMismatch { left: r, right: p.rank });
        }
        m.push((0..r).map(|j| p.log_derive(j)).collect::<Result<Vec<_>, _>>()?);
    }
    Ok(determinant(&m, r))
}

/// Laplace expansion along the first row. Fine for the `r ≤ 3` matrices used here.
pub fn determinant(m: &[Vec<LaurentPoly>], rank: usize) -> LaurentPoly {
    let n = m.len();
    match n {
        0 => LaurentPoly::one(rank),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = LaurentPoly::zero(rank);
            for col in 0..n {
                if m[0][col].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<LaurentPoly>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(j, _)| *j != col)
                            .map(|(_, x)| x.clone())
                            .collect()
                    })
                    .collect();
                let term = &m[0][col] * &determinant(&minor, rank);
                acc = if col % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

/// A commutative ring a Laurent polynomial can be evaluated in. The `_like`
/// constructors take `self` as a prototype so that rings carrying runtime
/// data (a modulus) can build constants.
pub trait EvalRing: Clone {
    fn zero_like(&self) -> Self;
    fn from_bigint_like(&self, c: &BigInt) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn inverse(&self) -> Option<Self>;
}

impl EvalRing for BigRational {
    fn zero_like(&self) -> Self {
        BigRational::zero()
    }
    fn from_bigint_like(&self, c: &BigInt) -> Self {
        BigRational::from_integer(c.clone())
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }
}

impl EvalRing for Complex64 {
    fn zero_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_bigint_like(&self, c: &BigInt) -> Self {
        Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn inverse(&self) -> Option<Self> {
        if self.norm_sqr() == 0.0 {
            None
        } else {
            Some(self.inv())
        }
    }
}

/// Residue class in `ℤ/nℤ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ZMod {
    value: u64,
    modulus: u64,
}

impl ZMod {
    pub fn new(value: i128, modulus: u64) -> Self {
        assert!(modulus > 0, "modulus must be positive");
        ZMod { value: value.rem_euclid(modulus as i128) as u64, modulus }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

impl EvalRing for ZMod {
    fn zero_like(&self) -> Self {
        ZMod { value: 0, modulus: self.modulus }
    }
    fn from_bigint_like(&self, c: &BigInt) -> Self {
        let r = c.mod_floor(&BigInt::from(self.modulus));
        ZMod { value: r.to_u64().expect("reduced residue fits"), modulus: self.modulus }
    }
    fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.modulus, other.modulus);
        ZMod::new(self.value as i128 + other.value as i128, self.modulus)
    }
    fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.modulus, other.modulus);
        let v = (self.value as u128 * other.value as u128) % self.modulus as u128;
        ZMod { value: v as u64, modulus: self.modulus }
    }
    fn inverse(&self) -> Option<Self> {
        let g = (self.value as i128).extended_gcd(&(self.modulus as i128));
        if g.gcd != 1 {
            return None;
        }
        Some(ZMod::new(g.x, self.modulus))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xi(e: i32) -> LaurentPoly {
        LaurentPoly::monomial(vec![e], 1)
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn add_examples() {
        let p = &xi(1) + &xi(-1);
        assert_eq!(&p + &LaurentPoly::zero(1), p);
        assert!((&xi(1) + &(-&xi(1))).is_zero());
        let lhs = &(&xi(1) + &LaurentPoly::one(1)) + &(&xi(-1) + &LaurentPoly::one(1));
        let want = LaurentPoly::from_terms(1, [(vec![1], 1), (vec![0], 2), (vec![-1], 1)]);
        assert_eq!(lhs, want);
    }

    #[test]
    fn mul_examples() {
        let a = &xi(1) - &xi(-1);
        let b = &xi(1) + &xi(-1);
        assert_eq!(&a * &b, &xi(2) - &xi(-2));
        assert_eq!(&a * &LaurentPoly::one(1), a);
        let c = &(&xi(1) - &LaurentPoly::one(1)) * &(&xi(-1) - &LaurentPoly::one(1));
        assert_eq!(c, LaurentPoly::from_terms(1, [(vec![0], 2), (vec![1], -1), (vec![-1], -1)]));
    }

    #[test]
    fn rank_mismatch_is_an_error() {
        let a = LaurentPoly::one(1);
        let b = LaurentPoly::one(2);
        assert_eq!(a.try_add(&b), Err(AlgebraError::RankMismatch { left: 1, right: 2 }));
        assert!(a.try_mul(&b).is_err());
    }

    #[test]
    fn log_derive_examples() {
        let p = &xi(1) + &xi(-1);
        assert_eq!(p.log_derive(0).unwrap(), &xi(1) - &xi(-1));
        assert!(LaurentPoly::constant(1, 7).log_derive(0).unwrap().is_zero());
        let m = LaurentPoly::monomial(vec![2, -1], 1);
        assert_eq!(m.log_derive(1).unwrap(), LaurentPoly::monomial(vec![2, -1], -1));
        assert!(m.log_derive(2).is_err());
    }

    #[test]
    fn jacobian_examples() {
        let b = &xi(1) + &xi(-1);
        assert_eq!(jacobian_log_det(&[b]).unwrap(), &xi(1) - &xi(-1));
        let x1 = LaurentPoly::variable(2, 0);
        let x2 = LaurentPoly::variable(2, 1);
        assert_eq!(jacobian_log_det(&[x1.clone(), x2.clone()]).unwrap(), &x1 * &x2);
        assert!(matches!(jacobian_log_det(&[x1]), Err(AlgebraError::WrongCount { .. })));
    }

    #[test]
    fn evaluate_examples() {
        let p = &xi(1) + &xi(-1);
        assert_eq!(p.evaluate(&[q(2, 1)]).unwrap(), q(5, 2));
        let r = LaurentPoly::from_terms(2, [(vec![3, -2], 4), (vec![0, 1], -7), (vec![-1, -1], 2)]);
        assert_eq!(r.evaluate(&[q(1, 1), q(1, 1)]).unwrap(), BigRational::from_integer(r.coefficient_sum()));
        let d = &xi(1) - &xi(-1);
        assert_eq!(d.evaluate(&[ZMod::new(3, 25)]).unwrap(), ZMod::new(11, 25));
        assert_eq!(p.evaluate(&[ZMod::new(5, 25)]), Err(AlgebraError::NotInvertible { index: 0 }));
        assert_eq!(p.evaluate(&[q(0, 1)]), Err(AlgebraError::NotInvertible { index: 0 }));
    }

    #[test]
    fn canonical_rendering() {
        assert_eq!((&xi(1) - &xi(-1)).to_string(), "x1 - x1^-1");
        assert_eq!(LaurentPoly::zero(2).to_string(), "0");
        let p = LaurentPoly::from_terms(2, [(vec![2, -1], 1), (vec![0, 0], -3), (vec![-1, 2], -2)]);
        assert_eq!(p.to_string(), "x1^2*x2^-1 - 3 - 2*x1^-1*x2^2");
    }
}
