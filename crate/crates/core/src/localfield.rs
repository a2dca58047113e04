//! Finite-precision `p`-adic numbers, the `SL(2)` torus classification by the
//! discriminant `b² − 4`, and the local factors `L_p(s, σ_{T/G})`.
//!
//! A [`PAdicApprox`] is `p^v · u + O(p^N)` where `N` is the absolute precision
//! and `u` is a unit known modulo `p^{N−v}`. Zero is stored as `O(p^N)`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::primes::{checked_pow, is_prime, legendre};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocalFieldError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("residue characteristic 2 is not supported here")]
    EvenPrime,
    #[error("operands live over different primes ({0} vs {1})")]
    PrimeMismatch(u64, u64),
    #[error("insufficient precision: need absolute precision {required}, have {available}")]
    Precision { required: i64, available: i64 },
    #[error("discriminant vanishes at working precision (central/unipotent locus)")]
    NotRegular,
    #[error("operation undefined at zero")]
    Zero,
    #[error("p^{digits} does not fit in 64 bits for p = {p}")]
    Overflow { p: u64, digits: i64 },
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PAdicApprox {
    p: u64,
    valuation: Option<i64>,
    unit: u64,
    abs_prec: i64,
}

fn modulus(p: u64, digits: i64) -> Result<u64, LocalFieldError> {
    if digits < 0 {
        return Ok(1);
    }
    u32::try_from(digits)
        .ok()
        .and_then(|d| checked_pow(p, d))
        .filter(|&m| m < (1u64 << 63))
        .ok_or(LocalFieldError::Overflow { p, digits })
}

fn check_prime(p: u64) -> Result<(), LocalFieldError> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(LocalFieldError::NotPrime(p))
    }
}

impl PAdicApprox {
    pub fn zero(p: u64, abs_prec: i64) -> Result<Self, LocalFieldError> {
        check_prime(p)?;
        Ok(PAdicApprox { p, valuation: None, unit: 0, abs_prec })
    }

    /// `p^valuation · unit + O(p^abs_prec)`; `unit` is reduced and must be prime to `p`.
    pub fn new(p: u64, valuation: i64, unit: u64, abs_prec: i64) -> Result<Self, LocalFieldError> {
        check_prime(p)?;
        if abs_prec <= valuation {
            return Ok(PAdicApprox { p, valuation: None, unit: 0, abs_prec });
        }
        let m = modulus(p, abs_prec - valuation)?;
        let unit = unit % m;
        if unit.is_multiple_of(p) {
            return Err(LocalFieldError::Zero);
        }
        Ok(PAdicApprox { p, valuation: Some(valuation), unit, abs_prec })
    }

    pub fn from_i64(p: u64, n: i64, abs_prec: i64) -> Result<Self, LocalFieldError> {
        Self::from_rational(p, &BigRational::from_integer(n.into()), abs_prec)
    }

    pub fn from_rational(p: u64, q: &BigRational, abs_prec: i64) -> Result<Self, LocalFieldError> {
        check_prime(p)?;
        if q.is_zero() {
            return Self::zero(p, abs_prec);
        }
        let pb = BigInt::from(p);
        let (mut num, mut den) = (q.numer().clone(), q.denom().clone());
        let mut val: i64 = 0;
        while num.is_multiple_of(&pb) {
            num /= &pb;
            val += 1;
        }
        while den.is_multiple_of(&pb) {
            den /= &pb;
            val -= 1;
        }
        if val >= abs_prec {
            return Self::zero(p, abs_prec);
        }
        let m = BigInt::from(modulus(p, abs_prec - val)?);
        let inv = den.mod_floor(&m).extended_gcd(&m).x;
        let unit = (num * inv).mod_floor(&m).to_u64().expect("reduced below 2^63");
        Ok(PAdicApprox { p, valuation: Some(val), unit, abs_prec })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    /// `None` for the zero element.
    pub fn valuation(&self) -> Option<i64> {
        self.valuation
    }

    pub fn unit(&self) -> u64 {
        self.unit
    }

    /// Absolute precision `N`: the value is known modulo `p^N`.
    pub fn precision(&self) -> i64 {
        self.abs_prec
    }

    pub fn relative_precision(&self) -> i64 {
        self.valuation.map(|v| self.abs_prec - v).unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.valuation.is_none()
    }

    pub fn norm(&self) -> f64 {
        match self.valuation {
            None => 0.0,
            Some(v) => (self.p as f64).powi(-(v as i32)),
        }
    }

    /// Exact rational representative `p^v · u`.
    pub fn to_rational(&self) -> BigRational {
        match self.valuation {
            None => BigRational::zero(),
            Some(v) => {
                let pv = BigRational::from_integer(BigInt::from(self.p)).pow(v as i32);
                pv * BigRational::from_integer(self.unit.into())
            }
        }
    }

    /// Principal part `x'`: the rational with `p`-power denominator and
    /// `0 ≤ x' < 1` such that `x − x'` is integral.
    pub fn principal_part(&self) -> Result<BigRational, LocalFieldError> {
        if self.abs_prec < 0 {
            return Err(LocalFieldError::Precision { required: 0, available: self.abs_prec });
        }
        match self.valuation {
            Some(v) if v < 0 => {
                let digits = -v;
                let m = modulus(self.p, digits)?;
                Ok(BigRational::new((self.unit % m).into(), m.into()))
            }
            _ => Ok(BigRational::zero()),
        }
    }

    fn same_prime(&self, other: &Self) -> Result<(), LocalFieldError> {
        if self.p != other.p {
            return Err(LocalFieldError::PrimeMismatch(self.p, other.p));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, LocalFieldError> {
        self.same_prime(other)?;
        let abs = self.abs_prec.min(other.abs_prec);
        let base = self.valuation.unwrap_or(abs).min(other.valuation.unwrap_or(abs));
        if base >= abs {
            return Self::zero(self.p, abs);
        }
        let width = abs - base;
        let m = modulus(self.p, width)? as u128;
        let scaled = |x: &Self| -> Result<u128, LocalFieldError> {
            match x.valuation {
                Some(v) if v < abs => {
                    let shift = modulus(x.p, v - base)? as u128;
                    Ok((x.unit as u128 % m) * shift % m)
                }
                _ => Ok(0),
            }
        };
        let sum = (scaled(self)? + scaled(other)?) % m;
        self.from_scaled(base, sum as u64, abs)
    }

    fn from_scaled(&self, base: i64, mut s: u64, abs: i64) -> Result<Self, LocalFieldError> {
        if s == 0 {
            return Self::zero(self.p, abs);
        }
        let mut v = base;
        while s.is_multiple_of(self.p) {
            s /= self.p;
            v += 1;
        }
        let m = modulus(self.p, abs - v)?;
        Ok(PAdicApprox { p: self.p, valuation: Some(v), unit: s % m, abs_prec: abs })
    }

    pub fn neg(&self) -> Self {
        match self.valuation {
            None => self.clone(),
            Some(v) => {
                let m = modulus(self.p, self.abs_prec - v).expect("existing modulus fits");
                PAdicApprox { unit: (m - self.unit) % m, ..self.clone() }
            }
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LocalFieldError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, LocalFieldError> {
        self.same_prime(other)?;
        match (self.valuation, other.valuation) {
            (None, None) => Self::zero(self.p, self.abs_prec + other.abs_prec),
            (None, Some(v)) => Self::zero(self.p, self.abs_prec + v),
            (Some(v), None) => Self::zero(self.p, other.abs_prec + v),
            (Some(v1), Some(v2)) => {
                let rel = self.relative_precision().min(other.relative_precision());
                let m = modulus(self.p, rel)? as u128;
                let u = (self.unit as u128 % m) * (other.unit as u128 % m) % m;
                Ok(PAdicApprox { p: self.p, valuation: Some(v1 + v2), unit: u as u64, abs_prec: v1 + v2 + rel })
            }
        }
    }

    /// Agreement modulo the coarser of the two precisions.
    pub fn agrees_with(&self, other: &Self) -> Result<bool, LocalFieldError> {
        Ok(self.sub(other)?.is_zero())
    }

    /// Squareness in `ℚ_p` for odd `p`: even valuation and a residue unit
    /// part. Requires absolute precision at least `val + 2`.
    pub fn is_square(&self) -> Result<bool, LocalFieldError> {
        if self.p == 2 {
            return Err(LocalFieldError::EvenPrime);
        }
        let v = self.valuation.ok_or(LocalFieldError::Zero)?;
        if self.abs_prec < v + 2 {
            return Err(LocalFieldError::Precision { required: v + 2, available: self.abs_prec });
        }
        Ok(v % 2 == 0 && legendre(self.unit, self.p) == 1)
    }
}

impl fmt::Debug for PAdicApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PAdicApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.valuation {
            None => write!(f, "O({}^{})", self.p, self.abs_prec),
            Some(v) => write!(f, "{}^{} * {} + O({}^{})", self.p, v, self.unit, self.p, self.abs_prec),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TorusClass {
    Split,
    UnramifiedQuad,
    RamifiedQuad,
}

impl fmt::Display for TorusClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TorusClass::Split => "split",
            TorusClass::UnramifiedQuad => "unramified_quad",
            TorusClass::RamifiedQuad => "ramified_quad",
        })
    }
}

/// `b² − 4` at the precision carried by `b`.
pub fn discriminant_sl2(b: &PAdicApprox) -> Result<PAdicApprox, LocalFieldError> {
    let four = PAdicApprox::from_i64(b.prime(), 4, b.precision().max(1))?;
    b.mul(b)?.sub(&four)
}

pub fn classify_torus_sl2(b: &PAdicApprox) -> Result<TorusClass, LocalFieldError> {
    if b.prime() == 2 {
        return Err(LocalFieldError::EvenPrime);
    }
    let d = discriminant_sl2(b)?;
    let v = d.valuation().ok_or(LocalFieldError::NotRegular)?;
    if v % 2 != 0 {
        return Ok(TorusClass::RamifiedQuad);
    }
    Ok(if d.is_square()? { TorusClass::Split } else { TorusClass::UnramifiedQuad })
}

/// `|Δ|_p = |b² − 4|_p^{1/2}`.
pub fn delta_norm_sl2(b: &PAdicApprox) -> Result<f64, LocalFieldError> {
    let d = discriminant_sl2(b)?;
    let v = d.valuation().ok_or(LocalFieldError::NotRegular)?;
    Ok((b.prime() as f64).powf(-(v as f64) / 2.0))
}

/// `L_p(s, η) = (1 − η p^{−s})^{−1}` for the quadratic character `η` of the
/// splitting field of the torus; `η = 0` gives the constant factor 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LocalLFactor {
    pub eta: i8,
}

pub fn local_l_factor(tc: TorusClass) -> LocalLFactor {
    LocalLFactor {
        eta: match tc {
            TorusClass::Split => 1,
            TorusClass::UnramifiedQuad => -1,
            TorusClass::RamifiedQuad => 0,
        },
    }
}

impl LocalLFactor {
    pub fn value(&self, p: u64, s: f64) -> f64 {
        1.0 / (1.0 - self.eta as f64 * (p as f64).powf(-s))
    }

    pub fn at_one(&self, p: u64) -> BigRational {
        let pq = BigRational::from_integer(p.into());
        let eta = BigRational::from_integer(self.eta.into());
        (BigRational::one() - eta / pq).recip()
    }

    /// `L(s)/L(1) − 1 = η (p^{−s} − p^{−1}) / (1 − η p^{−s})`, evaluated without
    /// cancellation near `s = 1`.
    pub fn ratio_to_one_minus_one(&self, p: u64, s: f64) -> f64 {
        if self.eta == 0 {
            return 0.0;
        }
        let lp = (p as f64).ln();
        let x = 1.0 / p as f64;
        let y = (-s * lp).exp();
        let diff = x * ((1.0 - s) * lp).exp_m1();
        self.eta as f64 * diff / (1.0 - self.eta as f64 * y)
    }

    pub fn ratio_to_one(&self, p: u64, s: f64) -> f64 {
        1.0 + self.ratio_to_one_minus_one(p, s)
    }

    /// `d/ds [L(s)/L(1)]` at `s = 1`, divided by `log p · p^{−1}`; exact.
    pub fn log_derivative_coefficient(&self, p: u64) -> BigRational {
        let pq = BigRational::from_integer(p.into());
        let eta = BigRational::from_integer(self.eta.into());
        -eta.clone() / (BigRational::one() - eta / pq)
    }
}

/// Helper for `|x|` of a possibly-negative exact rational as `f64`.
pub fn abs_f64(q: &BigRational) -> f64 {
    q.abs().to_f64().unwrap_or(f64::NAN)
}
