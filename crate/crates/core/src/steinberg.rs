//! The Steinberg–Hitchin base: the character map `t ↦ (b_1(t), …, b_r(t))`,
//! the discriminant as a polynomial on the base, and the Jacobian identity
//! `db_1 ∧ ⋯ ∧ db_r = ±Δ(t) ω_T`.
//!
//! The differential identity is checked in the invariant frame
//! `ω_T = ∧ dξ_i/ξ_i`, i.e. with the logarithmic derivations `ξ_j ∂/∂ξ_j`.

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

use crate::exactalg::{jacobian_log_det, AlgebraError, EvalRing, LaurentPoly};
use crate::rootdata::RootSystem;

#[derive(Debug, Clone, PartialEq)]
pub struct SteinbergBasePoint<R> {
    pub coords: Vec<R>,
}

pub fn char_map<R: EvalRing>(rs: &RootSystem, torus_point: &[R]) -> Result<SteinbergBasePoint<R>, AlgebraError> {
    let coords = rs
        .fundamental_chars()
        .iter()
        .map(|b| b.evaluate(torus_point))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SteinbergBasePoint { coords })
}

/// Discriminant as a polynomial in `b_1, …, b_r` (stored in a
/// [`LaurentPoly`] with nonnegative exponents). The stored polynomial is the
/// classical discriminant of the characteristic polynomial, which differs from
/// the pullback `∏_α (t^α − 1)` by `sign = (−1)^{#Φ⁺}`.
#[derive(Debug, Clone)]
pub struct BaseDiscriminant {
    pub poly: LaurentPoly,
    pub sign: i32,
}

impl BaseDiscriminant {
    /// Pulls the polynomial back to the torus through the character map.
    pub fn pullback(&self, rs: &RootSystem) -> LaurentPoly {
        self.poly
            .substitute(rs.fundamental_chars())
            .expect("base discriminant rank matches root system")
    }

    pub fn evaluate<R: EvalRing>(&self, b: &[R]) -> Result<R, AlgebraError> {
        self.poly.evaluate(b)
    }
}

pub fn base_discriminant(rs: &RootSystem) -> BaseDiscriminant {
    let n = rs.rank();
    let m = n + 1;
    // ∏_{i≠j} (x_i − x_j) in independent variables x_1..x_m; on det = 1 this
    // equals ∏_α (t^α − 1).
    let vars: Vec<LaurentPoly> = (0..m).map(|i| LaurentPoly::variable(m, i)).collect();
    let mut prod = LaurentPoly::one(m);
    for i in 0..m {
        for j in 0..m {
            if i != j {
                prod = &prod * &(&vars[i] - &vars[j]);
            }
        }
    }
    let in_e = symmetric_reduction(&prod);
    // e_m = det = 1: drop the last variable
    let mut poly = LaurentPoly::zero(n);
    for (e, c) in in_e.terms() {
        poly = &poly + &LaurentPoly::monomial(e[..n].to_vec(), c.clone());
    }
    let sign = if rs.positive_roots().len().is_multiple_of(2) { 1 } else { -1 };
    BaseDiscriminant { poly: poly.scale(&BigInt::from(sign)), sign }
}

/// Rewrites a symmetric polynomial in `x_1..x_m` as a polynomial in the
/// elementary symmetric functions `e_1..e_m` by repeatedly cancelling the
/// lexicographically leading term.
///
/// Panics if `p` is not symmetric (a leading exponent fails to be
/// non-increasing).
pub fn symmetric_reduction(p: &LaurentPoly) -> LaurentPoly {
    let m = p.rank();
    let vars: Vec<LaurentPoly> = (0..m).map(|i| LaurentPoly::variable(m, i)).collect();
    let mut elem = vec![LaurentPoly::one(m)];
    elem.extend((0..m).map(|_| LaurentPoly::zero(m)));
    for x in &vars {
        for k in (1..=m).rev() {
            let t = &elem[k - 1] * x;
            elem[k] = &elem[k] + &t;
        }
    }

    let mut rest = p.clone();
    let mut out = LaurentPoly::zero(m);
    while let Some((lead, c)) = rest.leading_term() {
        let lead = lead.clone();
        let c = c.clone();
        assert!(lead.iter().all(|&k| k >= 0), "symmetric reduction needs a polynomial");
        assert!(lead.windows(2).all(|w| w[0] >= w[1]), "input is not symmetric");
        let d: Vec<i32> = (0..m).map(|k| lead[k] - lead.get(k + 1).copied().unwrap_or(0)).collect();
        let mut term = LaurentPoly::constant(m, c.clone());
        for (k, &dk) in d.iter().enumerate() {
            term = &term * &elem[k + 1].pow(dk as u32);
        }
        rest = &rest - &term;
        out = &out + &LaurentPoly::monomial(d, c);
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct Hc1Report {
    pub holds: bool,
    /// `+1` if `J = Δ`, `-1` if `J = −Δ`, `0` if neither.
    pub sign: i32,
    #[serde(serialize_with = "crate::records::display")]
    pub jacobian: LaurentPoly,
    #[serde(serialize_with = "crate::records::display")]
    pub delta: LaurentPoly,
    /// `J − Δ` or `J + Δ`, whichever has fewer terms; zero when the identity holds.
    #[serde(serialize_with = "crate::records::display")]
    pub residual: LaurentPoly,
}

pub fn verify_hc1(rs: &RootSystem) -> Hc1Report {
    verify_hc1_for(rs.fundamental_chars(), &rs.weyl_delta()).expect("root system data is well-formed")
}

/// Checks `det[ξ_j ∂_j b_i] = ±Δ` for arbitrary inputs, so broken identities can
/// be exercised.
pub fn verify_hc1_for(chars: &[LaurentPoly], delta: &LaurentPoly) -> Result<Hc1Report, AlgebraError> {
    let j = jacobian_log_det(chars)?;
    let minus = j.try_sub(delta)?;
    let plus = j.try_add(delta)?;
    let (sign, residual) = if minus.is_zero() {
        (1, minus)
    } else if plus.is_zero() {
        (-1, plus)
    } else if minus.num_terms() <= plus.num_terms() {
        (0, minus)
    } else {
        (0, plus)
    };
    Ok(Hc1Report { holds: sign != 0, sign, jacobian: j, delta: delta.clone(), residual })
}

/// Characteristic polynomial `X² − bX + 1` of the `SL(2)` stable class over `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sl2Chart<R> {
    pub trace: R,
}

impl<R: EvalRing> Sl2Chart<R> {
    /// Coefficients `[1, −b, 1]`, leading first.
    pub fn coefficients(&self) -> [R; 3] {
        let one = self.trace.from_bigint_like(&BigInt::one());
        let neg = self.trace.mul(&self.trace.from_bigint_like(&-BigInt::one()));
        [one.clone(), neg, one]
    }

    /// `b² − 4`.
    pub fn discriminant(&self) -> R {
        self.trace.mul(&self.trace).add(&self.trace.from_bigint_like(&BigInt::from(-4)))
    }

    pub fn is_regular(&self) -> bool
    where
        R: PartialEq,
    {
        self.discriminant() != self.trace.zero_like()
    }
}

pub fn sl2_chart<R: EvalRing>(b: R) -> Sl2Chart<R> {
    Sl2Chart { trace: b }
}

/// Returns true if the polynomial has no negative exponents.
pub fn is_polynomial(p: &LaurentPoly) -> bool {
    p.terms().all(|(e, _)| e.iter().all(|&k| k >= 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::ZMod;
    use crate::rootdata::CartanType;
    use num_rational::BigRational;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn char_map_examples() {
        let a1 = RootSystem::build(CartanType::A1);
        assert_eq!(char_map(&a1, &[q(1)]).unwrap().coords, vec![q(2)]);
        assert_eq!(char_map(&a1, &[q(-1)]).unwrap().coords, vec![q(-2)]);
        let a2 = RootSystem::build(CartanType::A2);
        assert_eq!(char_map(&a2, &[q(1), q(1)]).unwrap().coords, vec![q(3), q(3)]);
        assert!(char_map(&a1, &[q(0)]).is_err());
    }

    #[test]
    fn base_discriminant_a1() {
        let a1 = RootSystem::build(CartanType::A1);
        let bd = base_discriminant(&a1);
        let want = LaurentPoly::from_terms(1, [(vec![2], 1), (vec![0], -4)]);
        assert_eq!(bd.poly, want);
        assert_eq!(bd.sign, -1);
        assert_eq!(bd.pullback(&a1), a1.weyl_discriminant().scale(&BigInt::from(-1)));
    }

    #[test]
    fn base_discriminant_a2() {
        let a2 = RootSystem::build(CartanType::A2);
        let bd = base_discriminant(&a2);
        // classical discriminant of X³ − b₁X² + b₂X − 1
        let want = LaurentPoly::from_terms(
            2,
            [
                (vec![2, 2], 1),
                (vec![3, 0], -4),
                (vec![0, 3], -4),
                (vec![1, 1], 18),
                (vec![0, 0], -27),
            ],
        );
        assert_eq!(bd.poly, want);
        assert_eq!(bd.evaluate(&[q(3), q(3)]).unwrap(), q(0));
        assert_eq!(bd.pullback(&a2), a2.weyl_discriminant().scale(&BigInt::from(bd.sign)));
    }

    #[test]
    fn hc1_holds() {
        for label in [CartanType::A1, CartanType::A2] {
            let r = verify_hc1(&RootSystem::build(label));
            assert!(r.holds, "{label}: residual {}", r.residual);
            assert!(r.residual.is_zero());
        }
    }

    #[test]
    fn hc1_detects_broken_identity() {
        let a1 = RootSystem::build(CartanType::A1);
        let broken = &a1.fundamental_chars()[0] + &LaurentPoly::variable(1, 0);
        let r = verify_hc1_for(&[broken], &a1.weyl_delta()).unwrap();
        assert!(!r.holds);
        assert!(!r.residual.is_zero());
    }

    #[test]
    fn hc1_is_blind_to_additive_constants() {
        // ξ∂_ξ kills constants, so b₁ + 1 has the same Jacobian as b₁
        let a1 = RootSystem::build(CartanType::A1);
        let shifted = &a1.fundamental_chars()[0] + &LaurentPoly::one(1);
        assert!(verify_hc1_for(&[shifted], &a1.weyl_delta()).unwrap().holds);
    }

    #[test]
    fn sl2_chart_examples() {
        let c = sl2_chart(q(2));
        assert_eq!(c.coefficients(), [q(1), q(-2), q(1)]);
        assert!(!c.is_regular());
        assert_eq!(sl2_chart(q(0)).coefficients(), [q(1), q(0), q(1)]);
        let c1 = sl2_chart(q(1));
        assert_eq!(c1.coefficients(), [q(1), q(-1), q(1)]);
        assert_eq!(c1.discriminant(), q(-3));
        assert_eq!(sl2_chart(ZMod::new(3, 5)).discriminant(), ZMod::new(0, 5));
    }

    #[test]
    fn discriminant_vanishes_exactly_on_root_value_one_over_small_fields() {
        let a1 = RootSystem::build(CartanType::A1);
        let bd = base_discriminant(&a1);
        for p in [3u64, 5, 7, 11, 13] {
            for xi in 1..p {
                let t = ZMod::new(xi as i128, p);
                let b = char_map(&a1, &[t]).unwrap();
                let d = bd.evaluate(&b.coords).unwrap();
                let root_is_one = (xi * xi) % p == 1;
                assert_eq!(d.value() == 0, root_is_one, "p={p} ξ={xi}");
            }
        }
    }

    #[test]
    fn symmetric_reduction_power_sums() {
        // x² + y² = e₁² − 2e₂
        let x = LaurentPoly::variable(2, 0);
        let y = LaurentPoly::variable(2, 1);
        let p2 = &(&x * &x) + &(&y * &y);
        let r = symmetric_reduction(&p2);
        assert_eq!(r, LaurentPoly::from_terms(2, [(vec![2, 0], 1), (vec![0, 1], -2)]));
        assert!(is_polynomial(&r));
    }
}
