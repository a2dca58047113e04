//! Root data of the split groups `SL(2)` and `SL(3)` in fundamental-weight
//! coordinates.
//!
//! A torus element is written `t = (ξ_1, …, ξ_r)` with `ξ_i = t^{μ_i}` for the
//! fundamental weights `μ_i`. For type `A_n` the eigenvalues of `t` in the
//! standard representation are
//! `x_1 = ξ_1, x_k = ξ_k/ξ_{k-1} (2 ≤ k ≤ n), x_{n+1} = ξ_n^{-1}`
//! and the fundamental characters are `b_k = e_k(x_1, …, x_{n+1})`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactalg::{LaurentPoly, Monomial};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RootDataError {
    #[error("unsupported root system label {0:?} (supported: A1, A2)")]
    Unsupported(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CartanType {
    A1,
    A2,
}

impl CartanType {
    pub fn rank(self) -> usize {
        match self {
            CartanType::A1 => 1,
            CartanType::A2 => 2,
        }
    }
}

impl FromStr for CartanType {
    type Err = RootDataError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A1" => Ok(CartanType::A1),
            "A2" => Ok(CartanType::A2),
            _ => Err(RootDataError::Unsupported(s.to_string())),
        }
    }
}

impl fmt::Display for CartanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CartanType::A1 => write!(f, "A1"),
            CartanType::A2 => write!(f, "A2"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RootSystem {
    label: CartanType,
    rank: usize,
    positive_roots: Vec<Monomial>,
    rho: Monomial,
    fundamental_chars: Vec<LaurentPoly>,
}

impl RootSystem {
    pub fn build(label: CartanType) -> Self {
        let n = label.rank();
        let eig = eigenvalue_exponents(n);

        let mut positive_roots = Vec::new();
        for i in 0..=n {
            for j in (i + 1)..=n {
                positive_roots.push(sub(&eig[i], &eig[j]));
            }
        }

        let mut twice_rho = vec![0; n];
        for a in &positive_roots {
            for (r, x) in twice_rho.iter_mut().zip(a) {
                *r += x;
            }
        }
        assert!(twice_rho.iter().all(|x| x % 2 == 0), "2ρ must be even in weight coordinates");
        let rho = twice_rho.iter().map(|x| x / 2).collect();

        // e_k(x) via the product Π(1 + x_i T)
        let xs: Vec<LaurentPoly> = eig.iter().map(|e| LaurentPoly::monomial(e.clone(), 1)).collect();
        let mut e = vec![LaurentPoly::one(n)];
        e.extend((0..=n).map(|_| LaurentPoly::zero(n)));
        for x in &xs {
            for k in (1..e.len()).rev() {
                let t = &e[k - 1] * x;
                e[k] = &e[k] + &t;
            }
        }
        let fundamental_chars = e[1..=n].to_vec();

        RootSystem { label, rank: n, positive_roots, rho, fundamental_chars }
    }

    pub fn from_label(label: &str) -> Result<Self, RootDataError> {
        Ok(Self::build(label.parse()?))
    }

    pub fn label(&self) -> CartanType {
        self.label
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn positive_roots(&self) -> &[Monomial] {
        &self.positive_roots
    }

    /// Positive and negative roots.
    pub fn roots(&self) -> Vec<Monomial> {
        let mut all = self.positive_roots.clone();
        all.extend(self.positive_roots.iter().map(|a| a.iter().map(|x| -x).collect()));
        all
    }

    pub fn rho(&self) -> &[i32] {
        &self.rho
    }

    pub fn fundamental_chars(&self) -> &[LaurentPoly] {
        &self.fundamental_chars
    }

    /// Eigenvalue coordinates `x_1, …, x_{n+1}` of the standard representation.
    pub fn eigenvalue_coordinates(&self) -> Vec<LaurentPoly> {
        eigenvalue_exponents(self.rank).into_iter().map(|e| LaurentPoly::monomial(e, 1)).collect()
    }

    /// `t^{-ρ} ∏_{α>0} (t^α − 1)`, expanded.
    pub fn weyl_delta(&self) -> LaurentPoly {
        let neg_rho: Monomial = self.rho.iter().map(|x| -x).collect();
        let mut acc = LaurentPoly::monomial(neg_rho, 1);
        for a in &self.positive_roots {
            let factor = &LaurentPoly::monomial(a.clone(), 1) - &LaurentPoly::one(self.rank);
            acc = &acc * &factor;
        }
        acc
    }

    /// `∏_α (t^α − 1)` over all roots.
    pub fn weyl_discriminant(&self) -> LaurentPoly {
        let mut acc = LaurentPoly::one(self.rank);
        for a in self.roots() {
            let factor = &LaurentPoly::monomial(a, 1) - &LaurentPoly::one(self.rank);
            acc = &acc * &factor;
        }
        acc
    }

    /// Action of the simple reflection `s_i` (zero-based, swaps `x_i` and
    /// `x_{i+1}`) on an exponent vector in `ξ`-coordinates.
    pub fn simple_reflection(&self, i: usize, e: &[i32]) -> Monomial {
        assert!(i < self.rank, "simple reflection index out of range");
        let n = self.rank;
        // ξ_k = x_1⋯x_k, so ξ^e has x-exponents a_i = Σ_{k≥i} e_k, a_{n+1} = 0
        let mut a = vec![0i32; n + 1];
        for idx in 0..n {
            a[idx] = e[idx..].iter().sum();
        }
        a.swap(i, i + 1);
        (0..n).map(|k| a[k] - a[k + 1]).collect()
    }

    pub fn reflect_poly(&self, i: usize, p: &LaurentPoly) -> LaurentPoly {
        p.map_exponents(|e| self.simple_reflection(i, e))
    }
}

fn sub(a: &[i32], b: &[i32]) -> Monomial {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn eigenvalue_exponents(n: usize) -> Vec<Monomial> {
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut e = vec![0; n];
        if k < n {
            e[k] += 1;
        }
        if k > 0 {
            e[k - 1] -= 1;
        }
        out.push(e);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn lp(rank: usize, t: &[(&[i32], i64)]) -> LaurentPoly {
        LaurentPoly::from_terms(rank, t.iter().map(|(e, c)| (e.to_vec(), *c)))
    }

    #[test]
    fn a1_data() {
        let rs = RootSystem::build(CartanType::A1);
        assert_eq!(rs.positive_roots(), &[vec![2]]);
        assert_eq!(rs.rho(), &[1]);
        assert_eq!(rs.fundamental_chars()[0], lp(1, &[(&[1], 1), (&[-1], 1)]));
        assert_eq!(rs.weyl_delta(), lp(1, &[(&[1], 1), (&[-1], -1)]));
        assert_eq!(rs.weyl_discriminant(), lp(1, &[(&[0], 2), (&[2], -1), (&[-2], -1)]));
    }

    #[test]
    fn a2_data() {
        let rs = RootSystem::build(CartanType::A2);
        let mut roots = rs.positive_roots().to_vec();
        roots.sort();
        assert_eq!(roots, vec![vec![-1, 2], vec![1, 1], vec![2, -1]]);
        assert_eq!(rs.rho(), &[1, 1]);
        assert_eq!(rs.fundamental_chars()[0], lp(2, &[(&[1, 0], 1), (&[-1, 1], 1), (&[0, -1], 1)]));
        assert_eq!(rs.fundamental_chars()[1], lp(2, &[(&[-1, 0], 1), (&[1, -1], 1), (&[0, 1], 1)]));
    }

    #[test]
    fn a2_delta_matches_hand_product() {
        let rs = RootSystem::build(CartanType::A2);
        let one = LaurentPoly::one(2);
        let f = |e: Vec<i32>| &LaurentPoly::monomial(e, 1) - &one;
        let hand = &(&(&LaurentPoly::monomial(vec![-1, -1], 1) * &f(vec![2, -1])) * &f(vec![-1, 2]))
            * &f(vec![1, 1]);
        assert_eq!(rs.weyl_delta(), hand);
    }

    #[test]
    fn unsupported_label() {
        assert_eq!(
            RootSystem::from_label("B2").unwrap_err(),
            RootDataError::Unsupported("B2".to_string())
        );
        assert!(RootSystem::from_label("a2").is_ok());
    }

    #[test]
    fn fundamental_chars_are_weyl_invariant() {
        for label in [CartanType::A1, CartanType::A2] {
            let rs = RootSystem::build(label);
            for b in rs.fundamental_chars() {
                for i in 0..rs.rank() {
                    assert_eq!(&rs.reflect_poly(i, b), b, "{label} b not invariant under s_{i}");
                }
            }
            assert_eq!(rs.fundamental_chars()[0].num_terms(), rs.rank() + 1);
        }
    }

    #[test]
    fn discriminant_is_delta_squared_up_to_sign() {
        for label in [CartanType::A1, CartanType::A2] {
            let rs = RootSystem::build(label);
            let d = rs.weyl_discriminant();
            let sq = &rs.weyl_delta() * &rs.weyl_delta();
            assert!(d == sq || d == -&sq);
            for i in 0..rs.rank() {
                assert_eq!(rs.reflect_poly(i, &d), d);
            }
        }
    }

    #[test]
    fn delta_vanishes_on_weyl_fixed_points() {
        let rs = RootSystem::build(CartanType::A1);
        for x in [1i64, -1] {
            let v = rs.weyl_delta().evaluate(&[BigRational::from_integer(x.into())]).unwrap();
            assert_eq!(v, BigRational::from_integer(0.into()));
            let d = rs.weyl_discriminant().evaluate(&[BigRational::from_integer(x.into())]).unwrap();
            assert_eq!(d, BigRational::from_integer(0.into()));
        }
    }
}
