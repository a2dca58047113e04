//! Local orbital densities for `SL(2)` by exact fiber counting.
//!
//! The test function is the indicator of `SL₂(ℤ_p)`. For a trace `b` the
//! fiber of the Steinberg map over `b mod pᴺ` is counted exactly,
//!
//! ```text
//! count(p, N, b) = #{ g ∈ SL₂(ℤ/pᴺ) : tr g = b },
//! ```
//!
//! and `θ_p(b; 1) = count / p^{2N}` once `N` is large enough for the fiber
//! density to stabilize. The whole stable class sits in the fiber, so no
//! per-class decomposition is needed.
//!
//! Two counting routes are provided:
//!
//! * [`count_fiber`] loops over the diagonal entry `x` and uses the closed
//!   count of solutions of `yz = m` in `ℤ/pᴺ` (which depends only on
//!   `min(val m, N)`); cost `O(pᴺ)`.
//! * [`count_fiber_fast`] uses that `4(x(b−x) − 1) = D − w²` with
//!   `w = 2x − b`, `D = b² − 4`, so the count depends only on the valuation of
//!   `D` and the square class of its unit part; cost `O(N)`.
//!
//! Aggregates over the base ([`theta_hat_zero`], [`torus_breakdown`],
//! [`dominant_product`]) enumerate the trace classes in closed form
//! ([`trace_census`]) and count one representative per class.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::localfield::{local_l_factor, TorusClass};
use crate::primes::{checked_pow, is_prime, legendre, odd_primes_up_to};
use crate::records;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrbitalError {
    #[error("p = {0} must be an odd prime")]
    NotOddPrime(u64),
    #[error("precision N must be at least 1")]
    ZeroPrecision,
    #[error("p^N = {p}^{n} is too large for residue arithmetic")]
    TooLarge { p: u64, n: u32 },
    #[error("b = {b} is not regular: b² − 4 ≡ 0 mod p^N")]
    NotRegular { b: u64 },
    #[error("precision N = {n} too small, need N ≥ {required} for val(D) = {valuation}")]
    Precision { n: u32, required: u32, valuation: u32 },
    #[error("fiber density did not stabilize between N = {n} and N + 1 at b = {b}")]
    StabilizationFailed { n: u32, b: u64 },
    #[error("s = {0} must be a finite real ≥ 1")]
    InvalidS(f64),
    #[error("residue class {residue} mod 4 has {got} primes, need at least {needed}")]
    TooFewPrimes { residue: u64, got: usize, needed: usize },
    #[error("breakdown rows mix precisions {0} and {1}")]
    MixedPrecision(u32, u32),
    #[error("degree-{degree} model in 1/p fails at held-out prime {p} for the {class} contribution")]
    ModelDegree { degree: usize, p: u64, class: &'static str },
    #[error("pmax = {0} is outside the supported range 3..=1000")]
    PmaxRange(u64),
}

/// Residue ring `ℤ/pᴺ` for an odd prime `p`.
#[derive(Debug, Clone, Copy)]
struct Level {
    p: u64,
    n: u32,
    q: u64,
}

impl Level {
    fn new(p: u64, n: u32) -> Result<Self, OrbitalError> {
        if p == 2 || !is_prime(p) {
            return Err(OrbitalError::NotOddPrime(p));
        }
        if n == 0 {
            return Err(OrbitalError::ZeroPrecision);
        }
        let q = checked_pow(p, n).filter(|&q| q < (1 << 62)).ok_or(OrbitalError::TooLarge { p, n })?;
        Ok(Level { p, n, q })
    }

    fn reduce(&self, b: i64) -> u64 {
        b.rem_euclid(self.q as i64) as u64
    }

    /// `val_p(m)` for a residue `m`, capped at `N` (so `0 ↦ N`).
    fn valuation(&self, mut m: u64) -> u32 {
        if m == 0 {
            return self.n;
        }
        let mut k = 0;
        while m.is_multiple_of(self.p) {
            m /= self.p;
            k += 1;
        }
        k
    }

    fn pow(&self, k: u32) -> BigUint {
        BigUint::from(self.p).pow(k)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiberCount {
    pub p: u64,
    #[serde(rename = "N")]
    pub n: u32,
    pub b: u64,
    #[serde(serialize_with = "records::display")]
    pub count: BigUint,
}

/// Exact `#{g ∈ SL₂(ℤ/pᴺ) : tr g = b}` by looping over the diagonal entry.
pub fn count_fiber(p: u64, n: u32, b: i64) -> Result<FiberCount, OrbitalError> {
    let lv = Level::new(p, n)?;
    let b = lv.reduce(b);
    let q = lv.q as u128;
    let mut hist = vec![0u64; n as usize + 1];
    for x in 0..lv.q {
        let x = x as u128;
        let w = (b as u128 + q - x) % q;
        let m = ((x * w) % q + q - 1) % q;
        hist[lv.valuation(m as u64) as usize] += 1;
    }
    // #{(y, z) : yz = m} in ℤ/pᴺ is (k+1)(pᴺ − pᴺ⁻¹) for val m = k < N,
    // and N(pᴺ − pᴺ⁻¹) + pᴺ for m = 0
    let q_big = BigUint::from(lv.q);
    let step = &q_big - BigUint::from(lv.q / p);
    let mut count = BigUint::zero();
    for (k, &h) in hist.iter().enumerate() {
        if h == 0 {
            continue;
        }
        let per = if k < n as usize {
            &step * BigUint::from(k as u64 + 1)
        } else {
            &step * BigUint::from(n) + &q_big
        };
        count += per * BigUint::from(h);
    }
    Ok(FiberCount { p, n, b, count })
}

/// Valuation and square class of `D = b² − 4` modulo `pᴺ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DiscClass {
    /// `None` when `D ≡ 0 mod pᴺ`.
    pub valuation: Option<u32>,
    /// Legendre symbol of the unit part of `D`; 0 when `valuation` is `None`
    /// or odd (the square class does not affect ramified counts).
    pub square: i8,
}

impl DiscClass {
    pub fn torus_class(&self) -> Option<TorusClass> {
        let v = self.valuation?;
        Some(if v % 2 == 1 {
            TorusClass::RamifiedQuad
        } else if self.square == 1 {
            TorusClass::Split
        } else {
            TorusClass::UnramifiedQuad
        })
    }
}

fn disc_class(lv: &Level, b: u64) -> DiscClass {
    let q = lv.q as u128;
    let d = ((b as u128 * b as u128) % q + q - 4 % q) % q;
    let d = d as u64;
    if d == 0 {
        return DiscClass { valuation: None, square: 0 };
    }
    let v = lv.valuation(d);
    if v % 2 == 1 {
        return DiscClass { valuation: Some(v), square: 0 };
    }
    let unit = d / checked_pow(lv.p, v).expect("divides q");
    DiscClass { valuation: Some(v), square: legendre(unit, lv.p) }
}

pub fn discriminant_class(p: u64, n: u32, b: i64) -> Result<DiscClass, OrbitalError> {
    let lv = Level::new(p, n)?;
    Ok(disc_class(&lv, lv.reduce(b)))
}

/// Fiber count from the discriminant class alone.
///
/// With `R_k = #{w mod p^k : w² ≡ D mod p^k}` the count is
/// `(pᴺ − pᴺ⁻¹) Σ_{k<N} p^{N−k} R_k + pᴺ R_N`, and `R_k` is `p^{⌊k/2⌋}` for
/// `k ≤ val D`, then `(1 + χ(u)) p^{val D / 2}` for even `val D` and `0` for
/// odd `val D`.
fn count_from_disc(lv: &Level, dc: DiscClass) -> BigUint {
    let n = lv.n;
    let roots = |k: u32| -> BigUint {
        match dc.valuation {
            None => lv.pow(k / 2),
            Some(v) if k <= v => lv.pow(k / 2),
            Some(v) if v % 2 == 1 => BigUint::zero(),
            Some(v) => lv.pow(v / 2) * BigUint::from((1 + dc.square as i32) as u32),
        }
    };
    let q = BigUint::from(lv.q);
    let step = &q - BigUint::from(lv.q / lv.p);
    let mut acc = BigUint::zero();
    for k in 0..n {
        acc += lv.pow(n - k) * roots(k);
    }
    step * acc + q * roots(n)
}

/// Same count as [`count_fiber`] in `O(N)` operations.
pub fn count_fiber_fast(p: u64, n: u32, b: i64) -> Result<FiberCount, OrbitalError> {
    let lv = Level::new(p, n)?;
    let b = lv.reduce(b);
    Ok(FiberCount { p, n, b, count: count_from_disc(&lv, disc_class(&lv, b)) })
}

// per-x loops beyond this many residues go through the discriminant kernel
const DIRECT_COUNT_LIMIT: u64 = 1 << 22;

fn count_auto(p: u64, n: u32, b: i64) -> Result<BigUint, OrbitalError> {
    let lv = Level::new(p, n)?;
    if lv.q <= DIRECT_COUNT_LIMIT {
        Ok(count_fiber(p, n, b)?.count)
    } else {
        Ok(count_fiber_fast(p, n, b)?.count)
    }
}

/// A set of traces mod `pᴺ` sharing one discriminant class.
#[derive(Debug, Clone, Serialize)]
pub struct TraceClass {
    pub disc: DiscClass,
    pub torus_class: Option<TorusClass>,
    #[serde(serialize_with = "records::display")]
    pub multiplicity: BigUint,
    pub representative: u64,
    #[serde(serialize_with = "records::display")]
    pub count: BigUint,
}

impl TraceClass {
    /// Haar mass of `{g ∈ SL₂(ℤ_p) : tr g mod pᴺ ∈ class}`.
    pub fn mass(&self, p: u64, n: u32) -> BigRational {
        let num = BigInt::from(&self.multiplicity * &self.count);
        BigRational::new(num, BigInt::from(p).pow(3 * n))
    }
}

/// Partition of `ℤ/pᴺ` by the discriminant class of `b² − 4`, in closed form.
///
/// Traces with `val D = 0` are `b ≢ ±2 mod p`; with `1 ≤ val D = v < N` they are
/// `b = ±2 + pᵛu`, `u` a unit, and then the unit part of `D` has the square
/// class of `u` (resp. `−u`). The remaining two traces `b ≡ ±2 mod pᴺ` form the
/// unresolved class.
pub fn trace_census(p: u64, n: u32) -> Result<Vec<TraceClass>, OrbitalError> {
    let lv = Level::new(p, n)?;
    let mut out = Vec::new();
    let mut push = |dc: DiscClass, mult: BigUint, rep: u64| {
        if mult.is_zero() {
            return;
        }
        debug_assert_eq!(disc_class(&lv, rep), dc);
        let count = count_from_disc(&lv, dc);
        out.push(TraceClass { disc: dc, torus_class: dc.torus_class(), multiplicity: mult, representative: rep, count });
    };

    let lift = lv.pow(n - 1);
    let find_rep = |chi: i8| (0..p).find(|&b| legendre((b * b + p * p - 4) % p, p) == chi);
    let n_split = BigUint::from((p - 3) / 2);
    let n_unram = BigUint::from((p - 1) / 2);
    if let Some(b) = find_rep(1) {
        push(DiscClass { valuation: Some(0), square: 1 }, &n_split * &lift, b);
    }
    if let Some(b) = find_rep(-1) {
        push(DiscClass { valuation: Some(0), square: -1 }, &n_unram * &lift, b);
    }

    let nonresidue = (2..p).find(|&u| legendre(u, p) == -1).expect("odd prime has a nonresidue");
    for v in 1..n {
        let pv = checked_pow(p, v).expect("below q");
        let units = lv.pow(n - v - 1) * BigUint::from(p - 1);
        if v % 2 == 1 {
            push(DiscClass { valuation: Some(v), square: 0 }, units * 2u32, (2 + pv) % lv.q);
        } else {
            push(DiscClass { valuation: Some(v), square: 1 }, units.clone(), (2 + pv) % lv.q);
            push(DiscClass { valuation: Some(v), square: -1 }, units, (2 + pv * nonresidue) % lv.q);
        }
    }
    push(DiscClass { valuation: None, square: 0 }, BigUint::from(2u32), 2);
    Ok(out)
}

/// Exact rational at `s = 1`, real otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum ThetaNumber {
    Exact(BigRational),
    Real(f64),
}

impl ThetaNumber {
    pub fn to_f64(&self) -> f64 {
        match self {
            ThetaNumber::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            ThetaNumber::Real(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            ThetaNumber::Exact(q) => Some(q),
            ThetaNumber::Real(_) => None,
        }
    }
}

impl std::fmt::Display for ThetaNumber {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ThetaNumber::Exact(q) => f.write_str(&records::rational(q)),
            ThetaNumber::Real(x) => write!(f, "{x:.17e}"),
        }
    }
}

impl Serialize for ThetaNumber {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ThetaNumber::Exact(q) => records::serialize_rational(q, s),
            ThetaNumber::Real(x) => s.serialize_f64(*x),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaValue {
    pub p: u64,
    #[serde(rename = "N")]
    pub n: u32,
    pub s: f64,
    pub b: u64,
    pub value: ThetaNumber,
    pub torus_class: TorusClass,
}

fn check_s(s: f64) -> Result<(), OrbitalError> {
    if s.is_finite() && s >= 1.0 {
        Ok(())
    } else {
        Err(OrbitalError::InvalidS(s))
    }
}

/// `θ_p(b; s) = θ_p(b; 1) · L(s)/L(1)` with `θ_p(b; 1)` the stabilized fiber
/// density. Requires `N ≥ 2·val(D) + 2` and checks stabilization against `N + 1`.
pub fn theta_at(p: u64, n: u32, b: i64, s: f64) -> Result<ThetaValue, OrbitalError> {
    check_s(s)?;
    let lv = Level::new(p, n)?;
    let br = lv.reduce(b);
    let dc = disc_class(&lv, br);
    let v = dc.valuation.ok_or(OrbitalError::NotRegular { b: br })?;
    if n < 2 * v + 2 {
        return Err(OrbitalError::Precision { n, required: 2 * v + 2, valuation: v });
    }
    let c_n = count_auto(p, n, b)?;
    let c_next = count_auto(p, n + 1, b)?;
    if c_next != &c_n * BigUint::from(p * p) {
        return Err(OrbitalError::StabilizationFailed { n, b: br });
    }
    let theta1 = BigRational::new(BigInt::from(c_n), BigInt::from(p).pow(2 * n));
    let tc = dc.torus_class().expect("regular class");
    let value = if s == 1.0 {
        ThetaNumber::Exact(theta1)
    } else {
        ThetaNumber::Real(theta1.to_f64().unwrap_or(f64::NAN) * local_l_factor(tc).ratio_to_one(p, s))
    };
    Ok(ThetaValue { p, n, s, b: br, value, torus_class: tc })
}

/// `q^{−dim G + dim T} |G(𝔽_q)| / |T(𝔽_q)|` for `SL(2)`: `(p+1)/p` (split) or
/// `(p−1)/p` (nonsplit).
pub fn transversal_lemma_value(p: u64, tc: TorusClass) -> Option<BigRational> {
    let torus_order = match tc {
        TorusClass::Split => p - 1,
        TorusClass::UnramifiedQuad => p + 1,
        TorusClass::RamifiedQuad => return None,
    };
    let g = BigInt::from(p) * (BigInt::from(p) * BigInt::from(p) - 1);
    Some(BigRational::new(g, BigInt::from(p * p) * BigInt::from(torus_order)))
}

#[derive(Debug, Clone, Serialize)]
pub struct TransversalRow {
    pub b: u64,
    pub torus_class: TorusClass,
    #[serde(serialize_with = "records::serialize_rational")]
    pub theta: BigRational,
    #[serde(serialize_with = "records::serialize_rational")]
    pub expected: BigRational,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransversalReport {
    pub p: u64,
    #[serde(rename = "N")]
    pub n: u32,
    pub rows: Vec<TransversalRow>,
    pub passed: bool,
}

impl TransversalReport {
    pub fn failures(&self) -> Vec<u64> {
        self.rows.iter().filter(|r| !r.ok).map(|r| r.b).collect()
    }
}

/// Checks `θ_p(b; 1)` against the closed form for every `b mod p` with a
/// unit discriminant.
pub fn verify_transversal_lemma(p: u64, n: u32) -> Result<TransversalReport, OrbitalError> {
    let lv = Level::new(p, n)?;
    let mut rows = Vec::new();
    for b in 0..p {
        let dc = disc_class(&lv, b);
        if dc.valuation != Some(0) {
            continue;
        }
        let th = theta_at(p, n, b as i64, 1.0)?;
        let theta = th.value.exact().cloned().expect("s = 1 is exact");
        let expected = transversal_lemma_value(p, th.torus_class).expect("unit discriminant is unramified");
        rows.push(TransversalRow { b, torus_class: th.torus_class, ok: theta == expected, theta, expected });
    }
    let passed = rows.iter().all(|r| r.ok);
    Ok(TransversalReport { p, n, rows, passed })
}

/// `θ̂_p(0; s) = ∫ θ_p(b; s) db` at precision `N`.
///
/// Classes resolved at precision `N` contribute exactly (their mass is exact
/// and the `s`-factor is constant on the class). The two traces `b ≡ ±2 mod pᴺ`
/// are unresolved; their exact mass is carried with the extreme `s`-factors as
/// an interval.
#[derive(Debug, Clone, Serialize)]
pub struct ThetaHat {
    pub p: u64,
    #[serde(rename = "N")]
    pub n: u32,
    pub s: f64,
    /// `Σ mass` over all classes, i.e. `θ̂_p(0; 1)`.
    #[serde(serialize_with = "records::serialize_rational")]
    pub mass_at_one: BigRational,
    #[serde(serialize_with = "records::serialize_rational")]
    pub unresolved_mass: BigRational,
    /// Exact value at `s = 1`.
    #[serde(serialize_with = "records::serialize_opt_rational")]
    pub exact: Option<BigRational>,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    /// Bounds on `θ̂ − 1`, accumulated without forming `θ̂` first.
    pub deviation_lower: f64,
    pub deviation_upper: f64,
}

impl ThetaHat {
    /// Midpoint of the deviation interval.
    pub fn deviation(&self) -> f64 {
        0.5 * (self.deviation_lower + self.deviation_upper)
    }

    /// Largest `|θ̂ − 1|` compatible with the interval.
    pub fn max_abs_deviation(&self) -> f64 {
        self.deviation_lower.abs().max(self.deviation_upper.abs())
    }

    /// Smallest `|θ̂ − 1|` compatible with the interval.
    pub fn min_abs_deviation(&self) -> f64 {
        if self.deviation_lower <= 0.0 && self.deviation_upper >= 0.0 {
            0.0
        } else {
            self.deviation_lower.abs().min(self.deviation_upper.abs())
        }
    }
}

pub fn theta_hat_zero(p: u64, n: u32, s: f64) -> Result<ThetaHat, OrbitalError> {
    check_s(s)?;
    let census = trace_census(p, n)?;
    let mut total = BigRational::zero();
    let mut unresolved = BigRational::zero();
    let mut dev = 0.0;
    for c in &census {
        let m = c.mass(p, n);
        match c.torus_class {
            Some(tc) => dev += m.to_f64().unwrap_or(f64::NAN) * local_l_factor(tc).ratio_to_one_minus_one(p, s),
            None => unresolved += &m,
        }
        total += m;
    }
    let base = (&total - BigRational::one()).to_f64().unwrap_or(f64::NAN);
    let um = unresolved.to_f64().unwrap_or(f64::NAN);
    let lo_factor = local_l_factor(TorusClass::Split).ratio_to_one_minus_one(p, s);
    let hi_factor = local_l_factor(TorusClass::UnramifiedQuad).ratio_to_one_minus_one(p, s);
    let deviation_lower = base + dev + um * lo_factor;
    let deviation_upper = base + dev + um * hi_factor;
    let exact = (s == 1.0).then(|| total.clone());
    Ok(ThetaHat {
        p,
        n,
        s,
        mass_at_one: total,
        unresolved_mass: unresolved,
        exact,
        value: 1.0 + 0.5 * (deviation_lower + deviation_upper),
        lower: 1.0 + deviation_lower,
        upper: 1.0 + deviation_upper,
        deviation_lower,
        deviation_upper,
    })
}

/// Per-torus-class contributions to `∫ 1` over `SL₂(ℤ_p)` and to the
/// `s`-derivative at `s = 1`.
///
/// `k_*` is `(d/ds Σ_class θ(b; s) db)|_{s=1} / (p⁻¹ log p)`. The traces
/// unresolved at precision `N` (`b ≡ ±2 mod pᴺ`) are booked in the ramified
/// column with no `s`-dependence; their mass is also reported on its own.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakdownRow {
    pub p: u64,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(serialize_with = "records::serialize_rational")]
    pub c_split: BigRational,
    #[serde(serialize_with = "records::serialize_rational")]
    pub c_unram: BigRational,
    #[serde(serialize_with = "records::serialize_rational")]
    pub c_ram: BigRational,
    #[serde(serialize_with = "records::serialize_rational")]
    pub c_unresolved: BigRational,
    #[serde(serialize_with = "records::serialize_rational")]
    pub k_split: BigRational,
    #[serde(serialize_with = "records::serialize_rational")]
    pub k_unram: BigRational,
    #[serde(serialize_with = "records::serialize_rational")]
    pub k_ram: BigRational,
}

impl BreakdownRow {
    pub const CSV_HEADER: [&'static str; 9] =
        ["p", "N", "c_split", "c_unram", "c_ram", "c_unresolved", "k_split", "k_unram", "k_ram"];

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.p.to_string(),
            self.n.to_string(),
            records::rational(&self.c_split),
            records::rational(&self.c_unram),
            records::rational(&self.c_ram),
            records::rational(&self.c_unresolved),
            records::rational(&self.k_split),
            records::rational(&self.k_unram),
            records::rational(&self.k_ram),
        ]
    }

    pub fn total_mass(&self) -> BigRational {
        &self.c_split + &self.c_unram + &self.c_ram
    }
}

pub fn torus_breakdown(p: u64, n: u32) -> Result<BreakdownRow, OrbitalError> {
    let census = trace_census(p, n)?;
    let mut by_class: BTreeMap<TorusClass, BigRational> = BTreeMap::new();
    let mut unresolved = BigRational::zero();
    for c in &census {
        let m = c.mass(p, n);
        match c.torus_class {
            Some(tc) => *by_class.entry(tc).or_insert_with(BigRational::zero) += m,
            None => unresolved += m,
        }
    }
    let get = |tc| by_class.get(&tc).cloned().unwrap_or_else(BigRational::zero);
    let c_split = get(TorusClass::Split);
    let c_unram = get(TorusClass::UnramifiedQuad);
    let c_ram = get(TorusClass::RamifiedQuad) + &unresolved;
    let k_split = &c_split * local_l_factor(TorusClass::Split).log_derivative_coefficient(p);
    let k_unram = &c_unram * local_l_factor(TorusClass::UnramifiedQuad).log_derivative_coefficient(p);
    let k_ram = BigRational::zero();
    Ok(BreakdownRow { p, n, c_split, c_unram, c_ram, c_unresolved: unresolved, k_split, k_unram, k_ram })
}

/// Degree of the model `C(p) = Σ_k c_k p^{−k}` used by [`fit_breakdown_coefficients`].
pub const FIT_DEGREE: usize = 3;
/// Primes required per residue class mod 4.
pub const FIT_MIN_PRIMES: usize = 6;

#[derive(Debug, Clone, Serialize)]
pub struct ClassFit {
    pub residue_mod_4: u64,
    pub interpolation_primes: Vec<u64>,
    pub held_out_primes: Vec<u64>,
    #[serde(serialize_with = "serialize_rational_vec")]
    pub split: Vec<BigRational>,
    #[serde(serialize_with = "serialize_rational_vec")]
    pub unram: Vec<BigRational>,
    #[serde(serialize_with = "serialize_rational_vec")]
    pub ram: Vec<BigRational>,
}

fn serialize_rational_vec<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(records::rational))
}

/// Leading coefficients of the per-class masses as polynomials in `p⁻¹`:
/// split `a₁ + a₂p⁻¹ + …`, unramified `b₁ + b₂p⁻¹ + …`, ramified `c₁ + c₂p⁻¹ + …`,
/// and the constant terms `a₃`, `b₃` of the derivative coefficients.
#[derive(Debug, Clone, Serialize)]
pub struct BreakdownFit {
    pub classes: Vec<ClassFit>,
    #[serde(serialize_with = "records::serialize_rational")]
    pub a1: BigRational,
    #[serde(serialize_with = "records::serialize_rational")]
    pub a2: BigRational,
    #[serde(serialize_with = "records::serialize_rational")]
    pub a3: BigRational,
    #[serde(serialize_with = "records::serialize_rational")]
    pub b1: BigRational,
    #[serde(serialize_with = "records::serialize_rational")]
    pub b2: BigRational,
    #[serde(serialize_with = "records::serialize_rational")]
    pub b3: BigRational,
    #[serde(serialize_with = "records::serialize_rational")]
    pub c1: BigRational,
    #[serde(serialize_with = "records::serialize_rational")]
    pub c2: BigRational,
    /// Both residue classes produce the same interpolants.
    pub classes_agree: bool,
    /// `a₁ + b₁ = 1`, `c₁ = 0` and `a₂ + b₂ + c₂ = 0`, exactly, in every class.
    pub identities_hold: bool,
}

/// Lagrange interpolation through `(x_i, y_i)`, returning power-basis coefficients.
pub fn interpolate(xs: &[BigRational], ys: &[BigRational]) -> Vec<BigRational> {
    let n = xs.len();
    let mut coeffs = vec![BigRational::zero(); n];
    for i in 0..n {
        let mut basis = vec![BigRational::one()];
        let mut denom = BigRational::one();
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut next = vec![BigRational::zero(); basis.len() + 1];
            for (k, c) in basis.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * &xs[j];
            }
            basis = next;
            denom *= &xs[i] - &xs[j];
        }
        let scale = &ys[i] / denom;
        for (k, c) in basis.iter().enumerate() {
            coeffs[k] += c * &scale;
        }
    }
    coeffs
}

pub fn eval_poly(coeffs: &[BigRational], x: &BigRational) -> BigRational {
    coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
}

pub fn fit_breakdown_coefficients(rows: &[BreakdownRow]) -> Result<BreakdownFit, OrbitalError> {
    if let Some(first) = rows.first() {
        if let Some(r) = rows.iter().find(|r| r.n != first.n) {
            return Err(OrbitalError::MixedPrecision(first.n, r.n));
        }
    }
    let mut classes = Vec::new();
    for residue in [1u64, 3] {
        let mut group: Vec<&BreakdownRow> = rows.iter().filter(|r| r.p % 4 == residue).collect();
        group.sort_by_key(|r| r.p);
        group.dedup_by_key(|r| r.p);
        if group.len() < FIT_MIN_PRIMES {
            return Err(OrbitalError::TooFewPrimes { residue, got: group.len(), needed: FIT_MIN_PRIMES });
        }
        let (fit_rows, held) = group.split_at(FIT_DEGREE + 1);
        let xs: Vec<BigRational> = fit_rows.iter().map(|r| BigRational::new(1.into(), r.p.into())).collect();
        let column = |f: fn(&BreakdownRow) -> &BigRational, name: &'static str| {
            let ys: Vec<BigRational> = fit_rows.iter().map(|r| f(r).clone()).collect();
            let poly = interpolate(&xs, &ys);
            for r in held {
                let x = BigRational::new(1.into(), r.p.into());
                if &eval_poly(&poly, &x) != f(r) {
                    return Err(OrbitalError::ModelDegree { degree: FIT_DEGREE, p: r.p, class: name });
                }
            }
            Ok(poly)
        };
        let split = column(|r| &r.c_split, "split")?;
        let unram = column(|r| &r.c_unram, "unramified")?;
        let ram = column(|r| &r.c_ram, "ramified")?;
        classes.push(ClassFit {
            residue_mod_4: residue,
            interpolation_primes: fit_rows.iter().map(|r| r.p).collect(),
            held_out_primes: held.iter().map(|r| r.p).collect(),
            split,
            unram,
            ram,
        });
    }

    let identities_hold = classes.iter().all(|c| {
        &c.split[0] + &c.unram[0] == BigRational::one()
            && c.ram[0].is_zero()
            && (&c.split[1] + &c.unram[1] + &c.ram[1]).is_zero()
    });
    let classes_agree = classes[0].split == classes[1].split
        && classes[0].unram == classes[1].unram
        && classes[0].ram == classes[1].ram;
    let c = &classes[0];
    // K_split = −C_split/(1 − p⁻¹), K_unram = C_unram/(1 + p⁻¹): constant terms −a₁, b₁
    Ok(BreakdownFit {
        a1: c.split[0].clone(),
        a2: c.split[1].clone(),
        a3: -c.split[0].clone(),
        b1: c.unram[0].clone(),
        b2: c.unram[1].clone(),
        b3: c.unram[0].clone(),
        c1: c.ram[0].clone(),
        c2: c.ram[1].clone(),
        classes_agree,
        identities_hold,
        classes,
    })
}

/// `max_p |K_split(p) + K_unram(p)| · p` over the rows.
pub fn derivative_balance_bound(rows: &[BreakdownRow]) -> BigRational {
    rows.iter()
        .map(|r| (&r.k_split + &r.k_unram).abs() * BigRational::from_integer(r.p.into()))
        .max()
        .unwrap_or_else(BigRational::zero)
}

/// Largest `N ≤ 12` with `pᴺ < 2⁶²`; used by the aggregate routines.
pub fn working_precision(p: u64) -> u32 {
    (1..=12).rev().find(|&n| checked_pow(p, n).is_some_and(|q| q < (1 << 62))).unwrap_or(1)
}

#[derive(Debug, Clone, Serialize)]
pub struct DominantProduct {
    pub pmax: u64,
    pub s: f64,
    pub primes: usize,
    /// `Π_{3 ≤ p ≤ pmax} θ̂_p(0; s)`, midpoint and enclosure.
    pub theta_product: f64,
    pub theta_lower: f64,
    pub theta_upper: f64,
    /// `Π_{3 ≤ p ≤ pmax} (1 − p⁻²)`.
    pub euler_product: f64,
    /// Same product including the factor `3/4` at `p = 2`.
    pub euler_product_with_two: f64,
    pub gap: f64,
    pub gap_lower: f64,
    pub gap_upper: f64,
    #[serde(serialize_with = "records::serialize_opt_rational")]
    pub exact_gap: Option<BigRational>,
}

impl DominantProduct {
    pub fn min_abs_gap(&self) -> f64 {
        if self.gap_lower <= 0.0 && self.gap_upper >= 0.0 {
            0.0
        } else {
            self.gap_lower.abs().min(self.gap_upper.abs())
        }
    }

    pub fn max_abs_gap(&self) -> f64 {
        self.gap_lower.abs().max(self.gap_upper.abs())
    }
}

pub fn dominant_product(pmax: u64, s: f64) -> Result<DominantProduct, OrbitalError> {
    check_s(s)?;
    if !(3..=1000).contains(&pmax) {
        return Err(OrbitalError::PmaxRange(pmax));
    }
    let primes = odd_primes_up_to(pmax);
    let mut euler_exact = BigRational::one();
    let mut theta_exact = BigRational::one();
    let (mut lo, mut hi) = (1.0f64, 1.0f64);
    for &p in &primes {
        let th = theta_hat_zero(p, working_precision(p), s)?;
        let pp = BigRational::from_integer(BigInt::from(p * p));
        euler_exact *= BigRational::one() - pp.recip();
        theta_exact *= &th.mass_at_one;
        lo *= th.lower;
        hi *= th.upper;
    }
    let euler = euler_exact.to_f64().unwrap_or(f64::NAN);
    let exact_gap = (s == 1.0).then(|| &theta_exact - &euler_exact);
    let (gap_lower, gap_upper) = match &exact_gap {
        Some(g) => {
            let g = g.to_f64().unwrap_or(f64::NAN);
            (g, g)
        }
        None => (lo - euler, hi - euler),
    };
    Ok(DominantProduct {
        pmax,
        s,
        primes: primes.len(),
        theta_product: 0.5 * (lo + hi),
        theta_lower: lo,
        theta_upper: hi,
        euler_product: euler,
        euler_product_with_two: 0.75 * euler,
        gap: 0.5 * (gap_lower + gap_upper),
        gap_lower,
        gap_upper,
        exact_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::brute_force_trace_counts;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn count_fiber_examples() {
        assert_eq!(count_fiber(3, 1, 0).unwrap().count, BigUint::from(6u32));
        let total: BigUint = (0..3).map(|b| count_fiber(3, 1, b).unwrap().count).sum();
        assert_eq!(total, BigUint::from(24u32));
        // b = 2 at p = 5 is the unipotent locus: p² elements (identity + p² − 1 unipotents)
        assert_eq!(count_fiber(5, 1, 2).unwrap().count, BigUint::from(25u32));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(count_fiber(4, 1, 0), Err(OrbitalError::NotOddPrime(4)));
        assert_eq!(count_fiber(2, 1, 0), Err(OrbitalError::NotOddPrime(2)));
        assert_eq!(count_fiber(3, 0, 0), Err(OrbitalError::ZeroPrecision));
        assert!(matches!(count_fiber_fast(97, 12, 0), Err(OrbitalError::TooLarge { .. })));
    }

    #[test]
    fn per_x_count_matches_brute_force() {
        for (p, n) in [(3u64, 1u32), (3, 2), (5, 1), (7, 1)] {
            let brute = brute_force_trace_counts(p, n);
            for (b, want) in brute.iter().enumerate() {
                assert_eq!(count_fiber(p, n, b as i64).unwrap().count, BigUint::from(*want), "p={p} N={n} b={b}");
            }
        }
    }

    #[test]
    fn fast_count_matches_per_x_count() {
        for (p, n) in [(3u64, 1u32), (3, 2), (3, 3), (3, 4), (3, 5), (5, 1), (5, 2), (5, 3), (7, 2), (7, 3), (11, 2), (13, 2)] {
            let q = checked_pow(p, n).unwrap() as i64;
            for b in 0..q {
                assert_eq!(count_fiber(p, n, b).unwrap(), count_fiber_fast(p, n, b).unwrap(), "p={p} N={n} b={b}");
            }
        }
    }

    #[test]
    fn census_partitions_the_residues() {
        for (p, n) in [(3u64, 1u32), (3, 3), (5, 2), (5, 3), (7, 2), (11, 2)] {
            let lv = Level::new(p, n).unwrap();
            let census = trace_census(p, n).unwrap();
            let mut direct: BTreeMap<DiscClass, u64> = BTreeMap::new();
            for b in 0..lv.q {
                *direct.entry(disc_class(&lv, b)).or_default() += 1;
            }
            assert_eq!(census.len(), direct.len(), "p={p} N={n}");
            for c in &census {
                assert_eq!(c.multiplicity, BigUint::from(direct[&c.disc]), "p={p} N={n} {:?}", c.disc);
            }
        }
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta_at(5, 4, 0, 1.0).unwrap().value, ThetaNumber::Exact(q(6, 5)));
        let t = theta_at(5, 4, 1, 1.0).unwrap();
        assert_eq!(t.value, ThetaNumber::Exact(q(4, 5)));
        assert_eq!(t.torus_class, TorusClass::UnramifiedQuad);
        assert_eq!(theta_at(3, 2, 0, 1.0).unwrap().value, ThetaNumber::Exact(q(2, 3)));
        assert_eq!(count_fiber(3, 1, 0).unwrap().count, BigUint::from(6u32));
    }

    #[test]
    fn theta_errors() {
        assert_eq!(theta_at(5, 4, 2, 1.0).unwrap_err(), OrbitalError::NotRegular { b: 2 });
        // b = 3: D = 5, val 1 needs N ≥ 4
        assert!(matches!(theta_at(5, 3, 3, 1.0), Err(OrbitalError::Precision { required: 4, .. })));
        assert!(theta_at(5, 4, 3, 1.0).is_ok());
        assert_eq!(theta_at(5, 4, 0, 0.5).unwrap_err(), OrbitalError::InvalidS(0.5));
    }

    #[test]
    fn theta_at_s_scales_by_l_ratio() {
        let t = theta_at(5, 4, 0, 2.0).unwrap().value.to_f64();
        let want = 1.2 * (1.0 - 0.2) / (1.0 - 0.04);
        assert!((t - want).abs() < 1e-14);
    }

    #[test]
    fn stabilization_from_two_val_plus_two() {
        for p in [3u64, 5, 7] {
            for n in 2..=4u32 {
                let lv = Level::new(p, n).unwrap();
                for b in 0..lv.q {
                    let dc = disc_class(&lv, b);
                    let Some(v) = dc.valuation else { continue };
                    if n < 2 * v + 2 {
                        continue;
                    }
                    let here = count_fiber_fast(p, n, b as i64).unwrap().count;
                    for lift in 0..p {
                        let bb = b + lift * lv.q;
                        let next = count_fiber_fast(p, n + 1, bb as i64).unwrap().count;
                        assert_eq!(next, &here * BigUint::from(p * p), "p={p} N={n} b={bb}");
                    }
                }
            }
        }
    }

    #[test]
    fn transversal_lemma_small_primes() {
        for p in odd_primes_up_to(50) {
            let r = verify_transversal_lemma(p, 2).unwrap();
            assert!(r.passed, "p={p}: {:?}", r.failures());
            assert_eq!(r.rows.len() as u64, p - 2);
        }
        let r3 = verify_transversal_lemma(3, 2).unwrap();
        assert_eq!(r3.rows.len(), 1);
        assert_eq!(r3.rows[0].theta, q(2, 3));
    }

    #[test]
    fn theta_hat_at_one_telescopes() {
        for p in odd_primes_up_to(97) {
            for n in [1u32, 2, working_precision(p)] {
                let th = theta_hat_zero(p, n, 1.0).unwrap();
                let want = BigRational::one() - q(1, (p * p) as i64);
                assert_eq!(th.exact.as_ref().unwrap(), &want, "p={p} N={n}");
                assert_eq!(th.deviation_lower, th.deviation_upper);
            }
        }
    }

    #[test]
    fn theta_hat_interval_brackets_and_shrinks() {
        let coarse = theta_hat_zero(5, 3, 2.0).unwrap();
        let fine = theta_hat_zero(5, 10, 2.0).unwrap();
        assert!(coarse.lower <= fine.lower && fine.upper <= coarse.upper);
        assert!(fine.upper - fine.lower < 1e-6);
        assert!(fine.upper - fine.lower < 1e-4 * (coarse.upper - coarse.lower));
        assert!((fine.value - 1.0).abs() <= 5f64.powf(-1.5));
    }

    #[test]
    fn breakdown_rows_sum_to_total_mass() {
        for p in odd_primes_up_to(60) {
            for n in [1u32, 2, 3] {
                let r = torus_breakdown(p, n).unwrap();
                assert_eq!(r.total_mass(), BigRational::one() - q(1, (p * p) as i64));
                assert!(r.k_ram.is_zero());
            }
        }
    }

    #[test]
    fn breakdown_at_n2_closed_form() {
        // C_split = (p−3)(p+1)/(2p²), C_unram = (p−1)²/(2p²), C_ram = 2/p
        for p in [5u64, 7, 11] {
            let r = torus_breakdown(p, 2).unwrap();
            let pi = p as i64;
            assert_eq!(r.c_split, q((pi - 3) * (pi + 1), 2 * pi * pi));
            assert_eq!(r.c_unram, q((pi - 1) * (pi - 1), 2 * pi * pi));
            assert_eq!(r.c_ram, q(2, pi));
        }
    }

    #[test]
    fn interpolation_recovers_cubic() {
        let xs: Vec<BigRational> = (1..=4).map(|k| q(1, k)).collect();
        let f = |x: &BigRational| q(1, 2) - x + x * x * x * q(7, 3);
        let ys: Vec<BigRational> = xs.iter().map(f).collect();
        let c = interpolate(&xs, &ys);
        assert_eq!(c, vec![q(1, 2), q(-1, 1), q(0, 1), q(7, 3)]);
    }

    #[test]
    fn fit_needs_enough_primes() {
        let rows: Vec<BreakdownRow> = [3u64, 5, 7].iter().map(|&p| torus_breakdown(p, 2).unwrap()).collect();
        assert!(matches!(fit_breakdown_coefficients(&rows), Err(OrbitalError::TooFewPrimes { .. })));
    }

    #[test]
    fn fit_reports_model_degree_error_when_masses_are_not_cubic() {
        let rows: Vec<BreakdownRow> = odd_primes_up_to(60).iter().map(|&p| torus_breakdown(p, 3).unwrap()).collect();
        assert!(matches!(fit_breakdown_coefficients(&rows), Err(OrbitalError::ModelDegree { .. })));
    }

    #[test]
    fn dominant_product_s_one_gap_is_zero() {
        let d = dominant_product(50, 1.0).unwrap();
        assert!(d.exact_gap.unwrap().is_zero());
        assert_eq!(dominant_product(1001, 1.0).unwrap_err(), OrbitalError::PmaxRange(1001));
    }
}
