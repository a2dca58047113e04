//! Rational adeles, the standard additive character, the truncation lemmas and
//! a truncated Poisson summation over `ℚ ∩ 𝔸^{S′}`.
//!
//! Characters: `χ_∞(x) = exp(−2πix)`, `χ_p(x) = exp(2πi x′)` where `x′` is the
//! principal part of `x ∈ ℚ_p`. Their product is trivial on `ℚ`. With these
//! characters the self-dual measures give `ℤ_p` and `[0, 1]` mass one.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::localfield::{LocalFieldError, PAdicApprox};
use crate::primes::{is_prime, primes_up_to};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdelicError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("could not parse place {0:?} (expected a prime or inf)")]
    ParsePlace(String),
    #[error("component at {p} has precision {precision}, below valuation + 2 = {required}")]
    ComponentPrecision { p: u64, precision: i64, required: i64 },
    #[error("stored component at {key} is over the prime {stored}")]
    ComponentPrime { key: u64, stored: u64 },
    #[error(transparent)]
    Local(#[from] LocalFieldError),
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Place {
    Infinity,
    Finite(u64),
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinity => write!(f, "inf"),
            Place::Finite(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for Place {
    type Err = AdelicError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "oo" | "∞" | "infinity" => Ok(Place::Infinity),
            t => {
                let p: u64 = t.parse().map_err(|_| AdelicError::ParsePlace(s.to_string()))?;
                if !is_prime(p) {
                    return Err(AdelicError::NotPrime(p));
                }
                Ok(Place::Finite(p))
            }
        }
    }
}

/// A finite set of places, always containing `∞`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TruncationSet {
    primes: BTreeSet<u64>,
}

impl TruncationSet {
    pub fn infinity() -> Self {
        TruncationSet::default()
    }

    pub fn new(primes: impl IntoIterator<Item = u64>) -> Result<Self, AdelicError> {
        let primes: BTreeSet<u64> = primes.into_iter().collect();
        if let Some(&p) = primes.iter().find(|&&p| !is_prime(p)) {
            return Err(AdelicError::NotPrime(p));
        }
        Ok(TruncationSet { primes })
    }

    /// `{∞} ∪ {p ≤ n}`.
    pub fn up_to(n: u64) -> Self {
        TruncationSet { primes: primes_up_to(n).into_iter().collect() }
    }

    pub fn from_places(places: &[Place]) -> Self {
        let primes = places
            .iter()
            .filter_map(|pl| match pl {
                Place::Finite(p) => Some(*p),
                Place::Infinity => None,
            })
            .collect();
        TruncationSet { primes }
    }

    /// Comma-separated places, e.g. `"inf,2,3"`.
    pub fn parse(s: &str) -> Result<Self, AdelicError> {
        let places = s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(Place::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_places(&places))
    }

    pub fn primes(&self) -> &BTreeSet<u64> {
        &self.primes
    }

    pub fn contains(&self, p: u64) -> bool {
        self.primes.contains(&p)
    }

    pub fn places(&self) -> Vec<Place> {
        std::iter::once(Place::Infinity).chain(self.primes.iter().map(|&p| Place::Finite(p))).collect()
    }

    /// Whether the set has the shape `{∞} ∪ {p ≤ n}` for some `n`.
    pub fn is_initial_segment(&self) -> bool {
        match self.primes.iter().next_back() {
            None => true,
            Some(&m) => primes_up_to(m).len() == self.primes.len(),
        }
    }
}

impl fmt::Display for TruncationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.places().iter().map(|p| p.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl Serialize for TruncationSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.places().iter().map(|p| p.to_string()))
    }
}

/// An adele of `ℚ`: a real component and finitely many non-integral (or
/// otherwise recorded) `p`-adic components; unlisted primes are `ℤ_p`-integral.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalAdele {
    real: f64,
    finite: BTreeMap<u64, PAdicApprox>,
}

impl RationalAdele {
    pub fn new(real: f64, finite: BTreeMap<u64, PAdicApprox>) -> Result<Self, AdelicError> {
        for (&key, x) in &finite {
            if x.prime() != key {
                return Err(AdelicError::ComponentPrime { key, stored: x.prime() });
            }
            let required = x.valuation().map_or(0, |v| v + 2);
            if x.precision() < required {
                return Err(AdelicError::ComponentPrecision { p: key, precision: x.precision(), required });
            }
        }
        Ok(RationalAdele { real, finite })
    }

    /// Diagonal image of `q`; components are stored at the primes of the denominator.
    pub fn diagonal(q: &BigRational) -> Result<Self, AdelicError> {
        let mut finite = BTreeMap::new();
        for (p, _) in crate::primes::factorize(q.denom().to_u64().ok_or_else(|| {
            AdelicError::Parameter("denominator exceeds 64 bits".to_string())
        })?) {
            finite.insert(p, PAdicApprox::from_rational(p, q, 1)?);
        }
        Self::new(q.to_f64().unwrap_or(f64::NAN), finite)
    }

    pub fn real(&self) -> f64 {
        self.real
    }

    pub fn finite(&self) -> &BTreeMap<u64, PAdicApprox> {
        &self.finite
    }

    pub fn component(&self, p: u64) -> Option<&PAdicApprox> {
        self.finite.get(&p)
    }

    /// Primes where the stored component has negative valuation.
    pub fn polar_primes(&self) -> Vec<u64> {
        self.finite.iter().filter(|(_, x)| x.valuation().is_some_and(|v| v < 0)).map(|(&p, _)| p).collect()
    }
}

impl fmt::Display for RationalAdele {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(inf: {}", self.real)?;
        for (p, x) in &self.finite {
            write!(f, ", {p}: {x}")?;
        }
        write!(f, ")")
    }
}

/// `exp(2πi·r)` for an exact rational `r`, reduced mod 1 first.
fn unit_circle(r: &BigRational) -> Complex64 {
    let frac = r.numer().mod_floor(r.denom());
    let x = BigRational::new(frac, r.denom().clone()).to_f64().unwrap_or(f64::NAN);
    Complex64::from_polar(1.0, 2.0 * PI * x)
}

pub fn chi_infinity(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, -2.0 * PI * x.rem_euclid(1.0))
}

/// `χ_p(x) = exp(2πi x′)`.
pub fn chi_finite(x: &PAdicApprox) -> Result<Complex64, AdelicError> {
    Ok(unit_circle(&x.principal_part()?))
}

pub fn chi_global(a: &RationalAdele) -> Result<Complex64, AdelicError> {
    let mut acc = chi_infinity(a.real);
    for x in a.finite.values() {
        acc *= chi_finite(x)?;
    }
    Ok(acc)
}

/// `S ∪ {∞} ∪ {p : p ≤ Aⁿ}`.
pub fn getz_bound(s: &TruncationSet, a: f64, n: u32) -> Result<TruncationSet, AdelicError> {
    if !(a.is_finite() && a >= 1.0) {
        return Err(AdelicError::Parameter(format!("A = {a} must be a finite real ≥ 1")));
    }
    if n == 0 {
        return Err(AdelicError::Parameter("n must be ≥ 1".to_string()));
    }
    let bound = a.powi(n as i32);
    if bound > 1e7 {
        return Err(AdelicError::Parameter(format!("A^n = {bound:e} exceeds the prime-table limit 1e7")));
    }
    // guard against A^n landing just below an integer
    let bound = (bound * (1.0 + 4.0 * f64::EPSILON)).floor() as u64;
    let mut primes = s.primes.clone();
    primes.extend(primes_up_to(bound));
    Ok(TruncationSet { primes })
}

#[derive(Debug, Clone)]
pub struct GetzDecomposition {
    pub a_prime: RationalAdele,
    pub b: BigRational,
    /// Primes outside `S′` whose principal parts were moved into `b`.
    pub corrected: Vec<u64>,
}

impl GetzDecomposition {
    /// Exact check that `a′ = a − b` is integral at every prime outside `S′`
    /// and that `a′ + b` reproduces every finite component of `a`.
    pub fn verify(&self, a: &RationalAdele, sp: &TruncationSet) -> Result<bool, AdelicError> {
        for (&p, x) in self.a_prime.finite() {
            if !sp.contains(p) && x.valuation().is_some_and(|v| v < 0) {
                return Ok(false);
            }
        }
        // b has no poles outside the corrected primes, which are all stored in a
        let den = self.b.denom().to_u64().unwrap_or(0);
        for (p, _) in crate::primes::factorize(den) {
            if !sp.contains(p) && !self.a_prime.finite().contains_key(&p) {
                return Ok(false);
            }
        }
        for (&p, x) in a.finite() {
            let Some(xp) = self.a_prime.component(p) else { return Ok(false) };
            let bp = PAdicApprox::from_rational(p, &self.b, x.precision())?;
            if !xp.add(&bp)?.agrees_with(x)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `a = a′ + b` with `b ∈ ℚ` and `a′` integral outside `S′`: `b` is the sum of
/// the principal parts of `a` at the primes outside `S′`.
pub fn getz_decompose(a: &RationalAdele, sp: &TruncationSet) -> Result<GetzDecomposition, AdelicError> {
    let mut b = BigRational::zero();
    let mut corrected = Vec::new();
    for (&p, x) in &a.finite {
        if sp.contains(p) {
            continue;
        }
        let pp = x.principal_part()?;
        if !pp.is_zero() {
            b += pp;
            corrected.push(p);
        }
    }
    let mut finite = BTreeMap::new();
    for (&p, x) in &a.finite {
        let bp = PAdicApprox::from_rational(p, &b, x.precision())?;
        finite.insert(p, x.sub(&bp)?);
    }
    let a_prime = RationalAdele { real: a.real - b.to_f64().unwrap_or(f64::NAN), finite };
    Ok(GetzDecomposition { a_prime, b, corrected })
}

/// `c · exp(−π t x²) · Π_{p ∈ S′} 1_{p^{k_p} ℤ_p}` on `ℝ × Π_{p∈S′} ℚ_p`.
///
/// The scalar is split into a real factor and an exact rational factor so that
/// the indicator part of the transform stays exact.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredTestFunction {
    pub scale: f64,
    pub mass: BigRational,
    pub t: f64,
    pub levels: BTreeMap<u64, i32>,
}

impl FactoredTestFunction {
    pub fn gaussian(t: f64) -> Self {
        FactoredTestFunction { scale: 1.0, mass: BigRational::from_integer(1.into()), t, levels: BTreeMap::new() }
    }

    pub fn with_level(mut self, p: u64, k: i32) -> Self {
        self.levels.insert(p, k);
        self
    }

    pub fn level(&self, p: u64) -> i32 {
        self.levels.get(&p).copied().unwrap_or(0)
    }

    /// Fourier transform: `t ↦ 1/t` with factor `t^{−1/2}`, `k ↦ −k` with factor `p^{−k}`.
    pub fn transform(&self) -> Self {
        let mut mass = self.mass.clone();
        for (&p, &k) in &self.levels {
            mass *= BigRational::from_integer(BigInt::from(p)).pow(-k);
        }
        FactoredTestFunction {
            scale: self.scale / self.t.sqrt(),
            mass,
            t: 1.0 / self.t,
            levels: self.levels.iter().map(|(&p, &k)| (p, -k)).collect(),
        }
    }

    /// The lattice `c·ℤ` of rationals in the support, with `c = Π p^{k_p}`.
    pub fn lattice_step(&self) -> BigRational {
        self.levels
            .iter()
            .fold(BigRational::from_integer(1.into()), |acc, (&p, &k)| acc * BigRational::from_integer(p.into()).pow(k))
    }

    /// Value at a rational `x` (all components equal to `x`).
    pub fn eval_diagonal(&self, x: &BigRational) -> f64 {
        for (&p, &k) in &self.levels {
            let v = PAdicApprox::from_rational(p, x, k.max(0) as i64 + 1).ok().and_then(|a| a.valuation());
            if let Some(v) = v {
                if v < k as i64 {
                    return 0.0;
                }
            }
        }
        let xf = x.to_f64().unwrap_or(f64::NAN);
        self.scale * self.mass.to_f64().unwrap_or(f64::NAN) * (-PI * self.t * xf * xf).exp()
    }

    pub fn describe(&self) -> String {
        let mut s = format!("exp(-pi*{}*x^2)", self.t);
        for (p, k) in &self.levels {
            s.push_str(&format!("*1[{p}^{k}Z_{p}]"));
        }
        s
    }
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

/// Truncated theta series `Σ_{|m|≤M} exp(−a m²)` and a bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaSum {
    pub value: f64,
    pub height: u64,
    pub tail_bound: f64,
}

/// Largest truncation height accepted.
pub const MAX_HEIGHT: u64 = 10_000_000;
/// Relative size of the omitted tail.
pub const TAIL_TARGET: f64 = 1e-13;

fn gaussian_tail(a: f64, m: u64) -> f64 {
    // 2 Σ_{j>M} e^{−a j²} ≤ 2 e^{−a(M+1)²} / (1 − e^{−2a(M+1)})
    let m1 = (m + 1) as f64;
    2.0 * (-a * m1 * m1).exp() / (-(-2.0 * a * m1).exp_m1())
}

pub fn theta_sum(a: f64) -> Result<ThetaSum, AdelicError> {
    if !(a.is_finite() && a > 0.0) {
        return Err(AdelicError::Parameter(format!("Gaussian exponent {a} must be finite and positive")));
    }
    let mut height = 0u64;
    while gaussian_tail(a, height) > TAIL_TARGET {
        height += 1;
        if height > MAX_HEIGHT {
            return Err(AdelicError::Parameter(format!(
                "Gaussian exponent {a:e} needs more than {MAX_HEIGHT} terms"
            )));
        }
    }
    let mut terms: Vec<f64> = Vec::with_capacity(2 * height as usize + 1);
    // smallest terms first
    for m in (1..=height).rev() {
        let x = m as f64;
        let v = (-a * x * x).exp();
        terms.push(v);
        terms.push(v);
    }
    terms.push(1.0);
    Ok(ThetaSum { value: pairwise_sum(&terms), height, tail_bound: gaussian_tail(a, height) })
}

#[derive(Debug, Clone, Serialize)]
pub struct PoissonRecord {
    #[serde(rename = "Sp")]
    pub sp: TruncationSet,
    pub test_function: String,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    /// Omitted tails on both sides plus a floating-point rounding allowance.
    pub tail_bound: f64,
    pub height_lhs: u64,
    pub height_rhs: u64,
}

impl PoissonRecord {
    pub fn within_bound(&self) -> bool {
        self.gap <= self.tail_bound
    }
}

/// `Σ_{b ∈ F_{S′}} f(b)` against `Σ_{b ∈ F_{S′}} f̂(−b)`, where
/// `F_{S′} = ℚ ∩ Π_{p ∉ S′} ℤ_p`.
///
/// For the test family both sums run over a lattice `c·ℤ` and reduce to theta
/// series, truncated where the Gaussian tail drops below `10⁻¹³` of the
/// leading term.
pub fn poisson_truncated(f: &FactoredTestFunction, sp: &TruncationSet) -> Result<PoissonRecord, AdelicError> {
    if let Some(&p) = f.levels.keys().find(|&&p| !sp.contains(p)) {
        return Err(AdelicError::Parameter(format!("test function has a level at {p} outside {sp}")));
    }
    if !(f.t.is_finite() && f.t > 0.0) {
        return Err(AdelicError::Parameter(format!("Gaussian parameter t = {} must be positive", f.t)));
    }
    let side = |g: &FactoredTestFunction| -> Result<(f64, ThetaSum), AdelicError> {
        let c = g.lattice_step().to_f64().unwrap_or(f64::NAN);
        let th = theta_sum(PI * g.t * c * c)?;
        let pref = g.scale * g.mass.to_f64().unwrap_or(f64::NAN);
        Ok((pref, th))
    };
    let (pl, tl) = side(f)?;
    let (pr, tr) = side(&f.transform())?;
    let lhs = pl * tl.value;
    let rhs = pr * tr.value;
    let rounding = 8.0 * f64::EPSILON * (lhs.abs() + rhs.abs());
    Ok(PoissonRecord {
        sp: sp.clone(),
        test_function: f.describe(),
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
        tail_bound: pl.abs() * tl.tail_bound + pr.abs() * tr.tail_bound + rounding,
        height_lhs: tl.height,
        height_rhs: tr.height,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{fourier_quadrature, padic_indicator_transform_by_sum};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn chi_component_examples() {
        assert!(close(chi_infinity(1.0 / 3.0), Complex64::from_polar(1.0, -2.0 * PI / 3.0), 1e-15));
        let x = PAdicApprox::from_rational(5, &q(1, 5), 2).unwrap();
        assert!(close(chi_finite(&x).unwrap(), Complex64::from_polar(1.0, 2.0 * PI / 5.0), 1e-15));
        let y = PAdicApprox::from_i64(7, 3, 4).unwrap();
        assert!(close(chi_finite(&y).unwrap(), Complex64::new(1.0, 0.0), 1e-15));
    }

    #[test]
    fn chi_finite_needs_precision() {
        let x = PAdicApprox::zero(5, -1).unwrap();
        assert!(matches!(chi_finite(&x), Err(AdelicError::Local(LocalFieldError::Precision { .. }))));
    }

    #[test]
    fn chi_global_examples() {
        let a = RationalAdele::diagonal(&q(1, 5)).unwrap();
        assert!(close(chi_global(&a).unwrap(), Complex64::new(1.0, 0.0), 1e-12));
        for (n, d) in [(7, 6), (-5, 12), (1, 1024), (35, 81), (3, 2)] {
            let a = RationalAdele::diagonal(&q(n, d)).unwrap();
            assert!(close(chi_global(&a).unwrap(), Complex64::new(1.0, 0.0), 1e-9), "{n}/{d}");
        }
        let half = RationalAdele::new(0.5, BTreeMap::new()).unwrap();
        assert!(close(chi_global(&half).unwrap(), Complex64::new(-1.0, 0.0), 1e-15));
    }

    #[test]
    fn adele_invariants() {
        let low = PAdicApprox::new(3, -1, 1, 0).unwrap();
        let mut m = BTreeMap::new();
        m.insert(3, low);
        assert!(matches!(RationalAdele::new(0.0, m), Err(AdelicError::ComponentPrecision { .. })));
        let mut m = BTreeMap::new();
        m.insert(5, PAdicApprox::from_i64(3, 1, 4).unwrap());
        assert!(matches!(RationalAdele::new(0.0, m), Err(AdelicError::ComponentPrime { .. })));
    }

    #[test]
    fn getz_bound_examples() {
        let inf = TruncationSet::infinity();
        assert_eq!(getz_bound(&inf, 2.0, 3).unwrap().to_string(), "{inf,2,3,5,7}");
        assert_eq!(getz_bound(&inf, 1.0, 5).unwrap().to_string(), "{inf}");
        let s = TruncationSet::new([11]).unwrap();
        let b = getz_bound(&s, 2.0, 2).unwrap();
        assert_eq!(b.to_string(), "{inf,2,3,11}");
        assert!(!b.is_initial_segment());
        assert!(getz_bound(&inf, 0.5, 2).is_err());
        assert!(getz_bound(&inf, 2.0, 0).is_err());
    }

    #[test]
    fn truncation_set_parsing() {
        let s = TruncationSet::parse("inf,3,2").unwrap();
        assert_eq!(s.to_string(), "{inf,2,3}");
        assert!(s.is_initial_segment());
        assert_eq!(TruncationSet::parse("inf,4").unwrap_err(), AdelicError::NotPrime(4));
        assert!(TruncationSet::parse("x").is_err());
    }

    #[test]
    fn getz_decompose_examples() {
        let sp = TruncationSet::parse("inf,2,3").unwrap();
        let a = RationalAdele::diagonal(&q(5, 4)).unwrap();
        let d = getz_decompose(&a, &sp).unwrap();
        assert!(d.b.is_zero());
        assert!(d.verify(&a, &sp).unwrap());

        let mut m = BTreeMap::new();
        m.insert(11, PAdicApprox::from_rational(11, &q(1, 11), 3).unwrap());
        let a = RationalAdele::new(0.25, m).unwrap();
        let d = getz_decompose(&a, &sp).unwrap();
        assert_eq!(d.b, q(1, 11));
        assert_eq!(d.corrected, vec![11]);
        assert!(d.verify(&a, &sp).unwrap());
        assert!(d.a_prime.component(11).unwrap().valuation().is_none_or(|v| v >= 0));
    }

    #[test]
    fn gaussian_transform_matches_quadrature() {
        for t in [0.5, 1.0, 3.0] {
            let f = FactoredTestFunction::gaussian(t);
            let g = f.transform();
            for xi in [0.0, 0.4, 1.3] {
                let quad = fourier_quadrature(|x| (-PI * t * x * x).exp(), xi, 12.0, 6000);
                let closed = g.eval_diagonal(&BigRational::from_float(xi).unwrap());
                assert!((quad.re - closed).abs() < 1e-10, "t={t} xi={xi}");
            }
        }
    }

    #[test]
    fn indicator_transform_matches_character_sum() {
        for (p, k) in [(2u64, 0i32), (2, 1), (2, 2), (3, 1)] {
            let g = FactoredTestFunction::gaussian(1.0).with_level(p, k).transform();
            for (num, e) in [(0i64, 0i32), (1, 1), (1, 2), (3, 3), (5, 0)] {
                let by_sum = padic_indicator_transform_by_sum(p, k, num, e);
                let xi = BigRational::new(num.into(), BigInt::from(p).pow(e as u32));
                let ind = if xi.is_zero() {
                    1.0
                } else {
                    let v = PAdicApprox::from_rational(p, &xi, 10).unwrap().valuation().unwrap();
                    if v >= -k as i64 { 1.0 } else { 0.0 }
                };
                let closed = g.mass.to_f64().unwrap() * ind;
                assert!((by_sum - closed).abs() < 1e-12, "p={p} k={k} xi={xi}");
            }
        }
    }

    #[test]
    fn transform_is_involutive() {
        let f = FactoredTestFunction::gaussian(2.5).with_level(2, 3).with_level(3, -1);
        let ff = f.transform().transform();
        assert_eq!(ff.levels, f.levels);
        assert_eq!(ff.mass, f.mass);
        assert!((ff.t - f.t).abs() < 1e-15);
        assert!((ff.scale - f.scale).abs() < 1e-10);
    }

    #[test]
    fn poisson_examples() {
        let inf = TruncationSet::infinity();
        let r = poisson_truncated(&FactoredTestFunction::gaussian(1.0), &inf).unwrap();
        assert!(r.gap < 1e-12 && r.within_bound());

        let s2 = TruncationSet::parse("inf,2").unwrap();
        let r = poisson_truncated(&FactoredTestFunction::gaussian(1.0).with_level(2, 0), &s2).unwrap();
        assert!(r.gap < 1e-8 && r.within_bound());

        let f = FactoredTestFunction::gaussian(1.0).with_level(2, 1);
        let r = poisson_truncated(&f, &s2).unwrap();
        assert!(r.gap < 1e-8 && r.within_bound());
        assert_eq!(f.transform().mass, q(1, 2));
        assert_eq!(f.transform().lattice_step(), q(1, 2));
    }

    #[test]
    fn poisson_parameter_errors() {
        let inf = TruncationSet::infinity();
        assert!(poisson_truncated(&FactoredTestFunction::gaussian(0.0), &inf).is_err());
        assert!(poisson_truncated(&FactoredTestFunction::gaussian(1e-16), &inf).is_err());
        let f = FactoredTestFunction::gaussian(1.0).with_level(5, 1);
        assert!(poisson_truncated(&f, &TruncationSet::parse("inf,2").unwrap()).is_err());
    }

    #[test]
    fn pairwise_sum_small() {
        let xs: Vec<f64> = (1..=100).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&xs), 5050.0);
    }
}
