//! Dirichlet characters on `𝔽_p[t]`, divisor sums, Euler products and
//! `L`-polynomials on `ℙ¹`.
//!
//! Characters of `(𝔽_p[t]/f)^×` take values in `μ_N`, `N = |(𝔽_p[t]/f)^×|`, and
//! are stored as exponents modulo `N`. Two domains are used:
//!
//! - [`Domain::Affine`]: closed points of `𝔸¹` not dividing `f`;
//! - [`Domain::Complete`]: the places where the primitive character attached
//!   to `χ` is unramified, i.e. the affine points prime to the conductor, plus
//!   `∞` when `χ` is even (with `χ(∞) = 1`).
//!
//! On the complete domain the `L`-series of a nontrivial character is a
//! polynomial of degree `deg cond − 1` (odd) or `deg cond − 2` (even), with all
//! inverse roots of absolute value `√p`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::primes::{checked_pow, is_prime};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FfError {
    #[error("p = {0} must be a prime ≤ 13")]
    Prime(u64),
    #[error("modulus must be a nonzero monic polynomial")]
    Modulus,
    #[error("degree {d} exceeds the enumeration limit for p = {p}")]
    DegreeTooLarge { p: u64, d: u32 },
    #[error("character index {index} out of range (modulus has {count} characters)")]
    CharacterIndex { index: usize, count: usize },
    #[error("the L-polynomial of the trivial character is not defined (cohomology outside degree 1)")]
    Trivial,
    #[error("divisor sum in degree {d} does not vanish beyond the L-degree {degree}: |c_d| = {magnitude:e}")]
    NonVanishing { d: u32, degree: u32, magnitude: f64 },
    #[error("could not parse polynomial {0:?}")]
    Parse(String),
}

/// Enumeration budget for monic polynomials of a single degree.
pub const MAX_ENUMERATION: u64 = 20_000_000;

/// Polynomial over `𝔽_p`, coefficients in ascending order with no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FqPolynomial {
    p: u64,
    coeffs: Vec<u64>,
}

impl FqPolynomial {
    pub fn new(p: u64, coeffs: Vec<u64>) -> Self {
        let mut c: Vec<u64> = coeffs.into_iter().map(|x| x % p).collect();
        while c.last() == Some(&0) {
            c.pop();
        }
        FqPolynomial { p, coeffs: c }
    }

    pub fn zero(p: u64) -> Self {
        FqPolynomial { p, coeffs: Vec::new() }
    }

    pub fn one(p: u64) -> Self {
        FqPolynomial::new(p, vec![1])
    }

    pub fn constant(p: u64, c: u64) -> Self {
        FqPolynomial::new(p, vec![c])
    }

    /// `t^d + (lower-order part encoded base p in `code`)`.
    pub fn monic_from_code(p: u64, d: u32, mut code: u64) -> Self {
        let mut c = Vec::with_capacity(d as usize + 1);
        for _ in 0..d {
            c.push(code % p);
            code /= p;
        }
        c.push(1);
        FqPolynomial { p, coeffs: c }
    }

    /// Polynomial of degree `< d` whose coefficients are the base-`p` digits of `code`.
    pub fn from_code(p: u64, mut code: u64) -> Self {
        let mut c = Vec::new();
        while code > 0 {
            c.push(code % p);
            code /= p;
        }
        FqPolynomial::new(p, c)
    }

    /// Base-`p` code of the coefficient vector.
    pub fn code(&self) -> u64 {
        self.coeffs.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.coeffs.len().checked_sub(1).map(|d| d as u32)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last() == Some(&1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n)
            .map(|i| self.coeffs.get(i).copied().unwrap_or(0) + other.coeffs.get(i).copied().unwrap_or(0))
            .collect();
        FqPolynomial::new(self.p, c)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let p = self.p;
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n)
            .map(|i| self.coeffs.get(i).copied().unwrap_or(0) + p - other.coeffs.get(i).copied().unwrap_or(0))
            .collect();
        FqPolynomial::new(p, c)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return FqPolynomial::zero(self.p);
        }
        let mut c = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] = (c[i + j] + a * b) % self.p;
            }
        }
        FqPolynomial::new(self.p, c)
    }

    /// Quotient and remainder; `divisor` must be nonzero.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let p = self.p;
        let dd = divisor.degree().expect("division by zero polynomial") as usize;
        let lead_inv = inverse_mod(*divisor.coeffs.last().unwrap(), p);
        let mut r = self.coeffs.clone();
        let mut q = vec![0u64; r.len().saturating_sub(dd).max(1)];
        while r.len() > dd {
            let k = r.len() - 1 - dd;
            let c = r.last().unwrap() * lead_inv % p;
            q[k] = c;
            for (i, d) in divisor.coeffs.iter().enumerate() {
                r[k + i] = (r[k + i] + p - c * d % p) % p;
            }
            while r.last() == Some(&0) {
                r.pop();
            }
        }
        (FqPolynomial::new(p, q), FqPolynomial::new(p, r))
    }

    pub fn rem(&self, divisor: &Self) -> Self {
        self.div_rem(divisor).1
    }

    pub fn divides(&self, other: &Self) -> bool {
        other.rem(self).is_zero()
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.make_monic()
    }

    pub fn make_monic(&self) -> Self {
        match self.coeffs.last() {
            None => self.clone(),
            Some(&lead) => {
                let inv = inverse_mod(lead, self.p);
                FqPolynomial::new(self.p, self.coeffs.iter().map(|c| c * inv).collect())
            }
        }
    }

    pub fn is_coprime(&self, other: &Self) -> bool {
        self.gcd(other).degree() == Some(0)
    }

    pub fn eval(&self, x: u64) -> u64 {
        self.coeffs.iter().rev().fold(0, |acc, &c| (acc * x + c) % self.p)
    }

    /// Parses `"t^2+2t+1"`, `"t"`, `"1"`, or a bracketed ascending coefficient
    /// list like `"[1,0,1]"`.
    pub fn parse(p: u64, s: &str) -> Result<Self, FfError> {
        let s = s.trim();
        let err = || FfError::Parse(s.to_string());
        if let Some(inner) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let coeffs = inner
                .split(',')
                .filter(|x| !x.trim().is_empty())
                .map(|x| x.trim().parse::<u64>().map_err(|_| err()))
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(FqPolynomial::new(p, coeffs));
        }
        let cleaned: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if cleaned.is_empty() {
            return Err(err());
        }
        let mut coeffs: BTreeMap<usize, u64> = BTreeMap::new();
        let normalized = cleaned.replace('-', "+-");
        for term in normalized.split('+').filter(|t| !t.is_empty()) {
            let (neg, term) = match term.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, term),
            };
            let (coef, deg) = match term.find('t') {
                None => (term.parse::<u64>().map_err(|_| err())?, 0usize),
                Some(pos) => {
                    let c = term[..pos].trim_end_matches('*');
                    let c = if c.is_empty() { 1 } else { c.parse::<u64>().map_err(|_| err())? };
                    let rest = &term[pos + 1..];
                    let d = match rest.strip_prefix('^') {
                        Some(e) => e.parse::<usize>().map_err(|_| err())?,
                        None if rest.is_empty() => 1,
                        None => return Err(err()),
                    };
                    (c, d)
                }
            };
            let c = coef % p;
            let c = if neg { (p - c) % p } else { c };
            let e = coeffs.entry(deg).or_insert(0);
            *e = (*e + c) % p;
        }
        let n = coeffs.keys().next_back().map(|d| d + 1).unwrap_or(0);
        Ok(FqPolynomial::new(p, (0..n).map(|i| coeffs.get(&i).copied().unwrap_or(0)).collect()))
    }
}

impl fmt::Display for FqPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match (i, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "t")?,
                (1, c) => write!(f, "{c}t")?,
                (i, 1) => write!(f, "t^{i}")?,
                (i, c) => write!(f, "{c}t^{i}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for FqPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} (mod {})", self.p)
    }
}

fn inverse_mod(a: u64, p: u64) -> u64 {
    crate::primes::pow_mod(a, p - 2, p)
}

fn check_prime(p: u64) -> Result<(), FfError> {
    if p <= 13 && is_prime(p) {
        Ok(())
    } else {
        Err(FfError::Prime(p))
    }
}

fn check_budget(p: u64, d: u32) -> Result<u64, FfError> {
    checked_pow(p, d).filter(|&n| n <= MAX_ENUMERATION).ok_or(FfError::DegreeTooLarge { p, d })
}

/// All monic polynomials of degree `d`.
pub fn monic_polynomials(p: u64, d: u32) -> impl Iterator<Item = FqPolynomial> {
    let n = checked_pow(p, d).expect("degree within budget");
    (0..n).map(move |code| FqPolynomial::monic_from_code(p, d, code))
}

/// Monic irreducibles grouped by degree `1..=dmax`, by trial division.
pub fn monic_irreducibles(p: u64, dmax: u32) -> Result<Vec<Vec<FqPolynomial>>, FfError> {
    check_prime(p)?;
    let mut out: Vec<Vec<FqPolynomial>> = vec![Vec::new()];
    for d in 1..=dmax {
        check_budget(p, d)?;
        let mut found = Vec::new();
        for g in monic_polynomials(p, d) {
            let reducible =
                (1..=d / 2).any(|k| out[k as usize].iter().any(|q| q.divides(&g)));
            if !reducible {
                found.push(g);
            }
        }
        out.push(found);
    }
    Ok(out)
}

/// The unit group `(𝔽_p[t]/f)^×` with a presentation by successive extensions.
#[derive(Debug, Clone)]
pub struct ResidueGroup {
    p: u64,
    modulus: FqPolynomial,
    order: u64,
    /// Generators `g_i` with relative orders `k_i`.
    gens: Vec<(u64, u64)>,
    /// Coordinates of `g_i^{k_i}` in terms of `g_0, …, g_{i−1}`.
    relations: Vec<Vec<u64>>,
    /// Residue code ↦ coordinates, for units.
    coords: BTreeMap<u64, Vec<u64>>,
}

impl ResidueGroup {
    pub fn new(modulus: &FqPolynomial) -> Result<Self, FfError> {
        let p = modulus.prime();
        check_prime(p)?;
        if !modulus.is_monic() {
            return Err(FfError::Modulus);
        }
        let m = modulus.degree().unwrap();
        let size = check_budget(p, m)?;
        let units: Vec<u64> = (0..size)
            .filter(|&c| m == 0 || FqPolynomial::from_code(p, c).is_coprime(modulus))
            .collect();
        let order = units.len() as u64;
        let mul = |a: u64, b: u64| FqPolynomial::from_code(p, a).mul(&FqPolynomial::from_code(p, b)).rem(modulus).code();

        let one = if m == 0 { 0 } else { 1 };
        let mut coords: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        coords.insert(one, Vec::new());
        let mut gens = Vec::new();
        let mut relations = Vec::new();
        for &g in &units {
            if coords.contains_key(&g) {
                continue;
            }
            let mut k = 1u64;
            let mut pow = g;
            while !coords.contains_key(&pow) {
                pow = mul(pow, g);
                k += 1;
            }
            let mut rel = coords[&pow].clone();
            rel.resize(gens.len(), 0);
            relations.push(rel);
            gens.push((g, k));
            // H' = ⋃_{j<k} g^j H
            let old: Vec<(u64, Vec<u64>)> = coords.iter().map(|(c, v)| (*c, v.clone())).collect();
            let mut gj = one;
            for j in 0..k {
                for (h, v) in &old {
                    let mut v = v.clone();
                    v.resize(gens.len() - 1, 0);
                    v.push(j);
                    coords.insert(mul(gj, *h), v);
                }
                gj = mul(gj, g);
            }
        }
        debug_assert_eq!(coords.len() as u64, order);
        Ok(ResidueGroup { p, modulus: modulus.clone(), order, gens, relations, coords })
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn modulus(&self) -> &FqPolynomial {
        &self.modulus
    }

    /// All characters, as exponent vectors on the generators, in a fixed order.
    fn character_roots(&self) -> Vec<Vec<u64>> {
        let n = self.order;
        let mut acc: Vec<Vec<u64>> = vec![Vec::new()];
        for (i, &(_, k)) in self.gens.iter().enumerate() {
            let mut next = Vec::new();
            for x in &acc {
                // k·x_i ≡ Σ_j rel_j x_j (mod n)
                let target = self.relations[i].iter().zip(x).map(|(r, xj)| r * xj).sum::<u64>() % n;
                debug_assert_eq!(target % k, 0);
                for j in 0..k {
                    let mut y = x.clone();
                    y.push((target / k + j * (n / k)) % n);
                    next.push(y);
                }
            }
            acc = next;
        }
        acc
    }

    pub fn characters(&self) -> Vec<DirichletCharacterFF> {
        self.character_roots()
            .into_iter()
            .enumerate()
            .map(|(index, roots)| {
                let table = self
                    .coords
                    .iter()
                    .map(|(&c, v)| (c, v.iter().zip(&roots).map(|(e, x)| e * x).sum::<u64>() % self.order))
                    .collect();
                DirichletCharacterFF::from_table(self.p, self.modulus.clone(), self.order, table, index)
            })
            .collect()
    }
}

/// Where divisor sums and Euler products are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Affine,
    Complete,
}

/// A character of `(𝔽_p[t]/f)^×` with values `exp(2πi·a/N)`.
#[derive(Debug, Clone)]
pub struct DirichletCharacterFF {
    p: u64,
    modulus: FqPolynomial,
    order: u64,
    table: BTreeMap<u64, u64>,
    index: usize,
    conductor: FqPolynomial,
    even: bool,
}

impl DirichletCharacterFF {
    fn from_table(p: u64, modulus: FqPolynomial, order: u64, table: BTreeMap<u64, u64>, index: usize) -> Self {
        let mut chi = DirichletCharacterFF {
            p,
            conductor: modulus.clone(),
            modulus,
            order,
            table,
            index,
            even: true,
        };
        chi.even = (1..p).all(|c| chi.exponent(&FqPolynomial::constant(p, c)) == Some(0));
        chi.conductor = chi.compute_conductor();
        chi
    }

    /// The trivial character modulo `f`.
    pub fn trivial(modulus: &FqPolynomial) -> Result<Self, FfError> {
        Ok(ResidueGroup::new(modulus)?.characters().swap_remove(0))
    }

    pub fn all(modulus: &FqPolynomial) -> Result<Vec<Self>, FfError> {
        Ok(ResidueGroup::new(modulus)?.characters())
    }

    pub fn by_index(modulus: &FqPolynomial, index: usize) -> Result<Self, FfError> {
        let all = Self::all(modulus)?;
        let count = all.len();
        all.into_iter().nth(index).ok_or(FfError::CharacterIndex { index, count })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn modulus(&self) -> &FqPolynomial {
        &self.modulus
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn group_order(&self) -> u64 {
        self.order
    }

    pub fn is_trivial(&self) -> bool {
        self.table.values().all(|&e| e == 0)
    }

    /// Trivial on the constants `𝔽_p^×`.
    pub fn is_even(&self) -> bool {
        self.even
    }

    /// Order of `χ` as an element of the character group.
    pub fn character_order(&self) -> u64 {
        self.table.values().map(|&e| self.order / gcd(self.order, e)).max().unwrap_or(1)
    }

    pub fn conductor(&self) -> &FqPolynomial {
        &self.conductor
    }

    /// Exponent `a` with `χ(g) = exp(2πi a/N)`, or `None` if `g` is not prime to `f`.
    pub fn exponent(&self, g: &FqPolynomial) -> Option<u64> {
        if self.modulus.degree() == Some(0) {
            return (!g.is_zero()).then_some(0);
        }
        self.table.get(&g.rem(&self.modulus).code()).copied()
    }

    /// `χ(g)`, zero when `g` shares a factor with `f`.
    pub fn value(&self, g: &FqPolynomial) -> Complex64 {
        match self.exponent(g) {
            Some(a) => self.root(a),
            None => Complex64::new(0.0, 0.0),
        }
    }

    fn root(&self, a: u64) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * a as f64 / self.order as f64)
    }

    /// `χ(∞)` on the complete domain: `1` for even characters, `0` (excluded)
    /// otherwise.
    pub fn value_at_infinity(&self) -> Complex64 {
        if self.even {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    fn trivial_on_kernel(&self, d: &FqPolynomial) -> bool {
        let one = FqPolynomial::one(self.p);
        self.table.iter().all(|(&c, &e)| {
            let r = FqPolynomial::from_code(self.p, c);
            e == 0 || !d.divides(&r.sub(&one))
        })
    }

    fn compute_conductor(&self) -> FqPolynomial {
        let m = self.modulus.degree().unwrap_or(0);
        for k in 0..=m {
            for d in monic_polynomials(self.p, k) {
                if d.divides(&self.modulus) && self.trivial_on_kernel(&d) {
                    return d;
                }
            }
        }
        self.modulus.clone()
    }

    /// Value of the attached primitive character at a monic irreducible `q`
    /// prime to the conductor.
    fn primitive_value(&self, q: &FqPolynomial) -> Complex64 {
        if q.is_coprime(&self.modulus) {
            return self.value(q);
        }
        let m = self.modulus.degree().unwrap_or(0);
        let size = checked_pow(self.p, m).unwrap_or(1);
        (0..size)
            .map(|c| q.add(&self.conductor.mul(&FqPolynomial::from_code(self.p, c))))
            .find(|h| h.is_coprime(&self.modulus))
            .map(|h| self.value(&h))
            .expect("a lift prime to the modulus exists")
    }

    /// Places added by the complete domain: `(degree, χ*(v))`.
    pub fn extra_places(&self) -> Vec<(u32, Complex64)> {
        let mut out = Vec::new();
        if self.even {
            out.push((1, Complex64::new(1.0, 0.0)));
        }
        let m = self.modulus.degree().unwrap_or(0);
        for k in 1..=m {
            for q in monic_polynomials(self.p, k) {
                if q.divides(&self.modulus) && is_irreducible(&q) && !q.divides(&self.conductor) {
                    out.push((k, self.primitive_value(&q)));
                }
            }
        }
        out
    }

    /// Expected degree of the complete `L`-polynomial of a nontrivial character.
    pub fn expected_l_degree(&self) -> u32 {
        let c = self.conductor.degree().unwrap_or(0);
        (c + 1).saturating_sub(if self.even { 3 } else { 2 })
    }
}

impl fmt::Display for DirichletCharacterFF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chi#{} mod {} over F_{}", self.index, self.modulus, self.p)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

fn is_irreducible(q: &FqPolynomial) -> bool {
    let d = q.degree().unwrap_or(0);
    d >= 1 && (1..=d / 2).all(|k| monic_polynomials(q.prime(), k).all(|g| !g.divides(q)))
}

fn series_with_places(mut series: Vec<Complex64>, places: &[(u32, Complex64)]) -> Vec<Complex64> {
    // multiply by (1 − a u^k)^{-1}
    for &(k, a) in places {
        let k = k as usize;
        for i in k..series.len() {
            let prev = series[i - k];
            series[i] += a * prev;
        }
    }
    series
}

/// Number of monic polynomials of each degree `0..=dmax` in each residue class
/// mod `f`, keyed by residue code.
pub fn residue_histogram(f: &FqPolynomial, dmax: u32) -> Result<Vec<BTreeMap<u64, u64>>, FfError> {
    let p = f.prime();
    check_budget(p, dmax)?;
    let constant = f.degree() == Some(0);
    Ok((0..=dmax)
        .map(|d| {
            let mut h = BTreeMap::new();
            for g in monic_polynomials(p, d) {
                let key = if constant { 0 } else { g.rem(f).code() };
                *h.entry(key).or_insert(0u64) += 1;
            }
            h
        })
        .collect())
}

fn sums_from_histogram(chi: &DirichletCharacterFF, hist: &[BTreeMap<u64, u64>], domain: Domain) -> Vec<Complex64> {
    let affine: Vec<Complex64> = hist
        .iter()
        .map(|h| {
            h.iter()
                .filter_map(|(code, &n)| chi.table.get(code).map(|&a| chi.root(a) * n as f64))
                .sum()
        })
        .collect();
    match domain {
        Domain::Affine => affine,
        Domain::Complete => series_with_places(affine, &chi.extra_places()),
    }
}

/// `Σ χ(D)` over effective divisors of degree `d` on the domain.
pub fn divisor_sum(chi: &DirichletCharacterFF, d: u32, domain: Domain) -> Result<Complex64, FfError> {
    Ok(divisor_sums(chi, d, domain)?[d as usize])
}

/// Divisor sums for degrees `0..=dmax`.
pub fn divisor_sums(chi: &DirichletCharacterFF, dmax: u32, domain: Domain) -> Result<Vec<Complex64>, FfError> {
    let hist = residue_histogram(&chi.modulus, dmax)?;
    Ok(sums_from_histogram(chi, &hist, domain))
}

/// Coefficients of `Π_v (1 − χ(v) u^{deg v})^{-1}` up to `u^dmax`, from the
/// closed points of the domain.
pub fn euler_coeffs(chi: &DirichletCharacterFF, dmax: u32, domain: Domain) -> Result<Vec<Complex64>, FfError> {
    if dmax > 12 {
        return Err(FfError::DegreeTooLarge { p: chi.p, d: dmax });
    }
    let irreducibles = monic_irreducibles(chi.p, dmax)?;
    euler_coeffs_from(chi, dmax, domain, &irreducibles)
}

fn euler_coeffs_from(
    chi: &DirichletCharacterFF,
    dmax: u32,
    domain: Domain,
    irreducibles: &[Vec<FqPolynomial>],
) -> Result<Vec<Complex64>, FfError> {
    let mut places: Vec<(u32, Complex64)> = Vec::new();
    for (k, list) in irreducibles.iter().enumerate().skip(1).take(dmax as usize) {
        for q in list {
            let v = match domain {
                Domain::Affine => chi.value(q),
                Domain::Complete if q.divides(&chi.conductor) => Complex64::new(0.0, 0.0),
                Domain::Complete => chi.primitive_value(q),
            };
            if v != Complex64::new(0.0, 0.0) {
                places.push((k as u32, v));
            }
        }
    }
    if domain == Domain::Complete && chi.even {
        places.push((1, Complex64::new(1.0, 0.0)));
    }
    let mut series = vec![Complex64::new(0.0, 0.0); dmax as usize + 1];
    series[0] = Complex64::new(1.0, 0.0);
    Ok(series_with_places(series, &places))
}

pub fn euler_coeff(chi: &DirichletCharacterFF, d: u32, domain: Domain) -> Result<Complex64, FfError> {
    Ok(euler_coeffs(chi, d, domain)?[d as usize])
}

/// One row of the identity check `euler_coeff = divisor_sum`.
#[derive(Debug, Clone, Serialize)]
pub struct SerieRow {
    pub q: u64,
    pub modulus: String,
    pub character: usize,
    pub d: u32,
    pub divisor_sum_re: f64,
    pub divisor_sum_im: f64,
    pub euler_coeff_re: f64,
    pub euler_coeff_im: f64,
    pub residual: f64,
}

impl SerieRow {
    pub const CSV_HEADER: [&'static str; 9] = [
        "q",
        "modulus",
        "character",
        "d",
        "divisor_sum_re",
        "divisor_sum_im",
        "euler_coeff_re",
        "euler_coeff_im",
        "residual",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.q.to_string(),
            self.modulus.clone(),
            self.character.to_string(),
            self.d.to_string(),
            format!("{:.12e}", self.divisor_sum_re),
            format!("{:.12e}", self.divisor_sum_im),
            format!("{:.12e}", self.euler_coeff_re),
            format!("{:.12e}", self.euler_coeff_im),
            format!("{:.3e}", self.residual),
        ]
    }
}

/// All monic moduli of degree `≤ max_degree` over `𝔽_p`.
pub fn moduli_up_to(p: u64, max_degree: u32) -> Vec<FqPolynomial> {
    (0..=max_degree).flat_map(|k| monic_polynomials(p, k)).collect()
}

/// `euler_coeff` vs `divisor_sum` on the affine domain, for every character of
/// every listed modulus and every `d ≤ dmax`.
pub fn serie_table(p: u64, moduli: &[FqPolynomial], dmax: u32) -> Result<Vec<SerieRow>, FfError> {
    check_prime(p)?;
    check_budget(p, dmax)?;
    let irreducibles = monic_irreducibles(p, dmax)?;
    let mut rows = Vec::new();
    for f in moduli {
        let hist = residue_histogram(f, dmax)?;
        for chi in DirichletCharacterFF::all(f)? {
            let sums = sums_from_histogram(&chi, &hist, Domain::Affine);
            let euler = euler_coeffs_from(&chi, dmax, Domain::Affine, &irreducibles)?;
            for d in 0..=dmax {
                let (s, e) = (sums[d as usize], euler[d as usize]);
                rows.push(SerieRow {
                    q: p,
                    modulus: f.to_string(),
                    character: chi.index(),
                    d,
                    divisor_sum_re: s.re,
                    divisor_sum_im: s.im,
                    euler_coeff_re: e.re,
                    euler_coeff_im: e.im,
                    residual: (s - e).norm(),
                });
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct LPolynomial {
    /// `c_0 = 1, c_1, …, c_m`.
    pub coeffs: Vec<(f64, f64)>,
    /// Inverse roots `α_i`: `L(u) = Π (1 − α_i u)`.
    pub roots: Vec<(f64, f64)>,
    pub degree: u32,
    pub expected_degree: u32,
    /// Divisor sums were checked to vanish for `degree < d ≤ vanishing_checked_to`.
    pub vanishing_checked_to: u32,
    pub max_weil_defect: f64,
}

impl LPolynomial {
    pub fn root_values(&self) -> Vec<Complex64> {
        self.roots.iter().map(|&(re, im)| Complex64::new(re, im)).collect()
    }
}

/// Absolute tolerance for the floating-point character sums.
pub const FF_TOL: f64 = 1e-9;

fn scaled_tol(p: u64, d: u32) -> f64 {
    FF_TOL * (p as f64).powf(d as f64 / 2.0).max(1.0)
}

/// `L`-polynomial on the complete domain.
pub fn l_polynomial(chi: &DirichletCharacterFF) -> Result<LPolynomial, FfError> {
    if chi.is_trivial() {
        return Err(FfError::Trivial);
    }
    let p = chi.p;
    let cap = chi.modulus.degree().unwrap_or(0) + 2;
    let sums = divisor_sums(chi, cap, Domain::Complete)?;
    let degree = (0..=cap).rev().find(|&d| sums[d as usize].norm() > scaled_tol(p, d)).unwrap_or(0);
    let need = (2 * degree).max(degree + 1);
    let sums = if need > cap { divisor_sums(chi, need, Domain::Complete)? } else { sums };
    for d in degree + 1..=need {
        let mag = sums[d as usize].norm();
        if mag > scaled_tol(p, d) {
            return Err(FfError::NonVanishing { d, degree, magnitude: mag });
        }
    }
    let coeffs: Vec<Complex64> = sums[..=degree as usize].to_vec();
    let roots = inverse_roots(&coeffs);
    let sqrt_q = (p as f64).sqrt();
    let max_weil_defect = roots.iter().map(|a| (a.norm() - sqrt_q).abs() / sqrt_q).fold(0.0, f64::max);
    Ok(LPolynomial {
        coeffs: coeffs.iter().map(|c| (c.re, c.im)).collect(),
        roots: roots.iter().map(|a| (a.re, a.im)).collect(),
        degree,
        expected_degree: chi.expected_l_degree(),
        vanishing_checked_to: need,
        max_weil_defect,
    })
}

/// Inverse roots of `Σ c_d u^d` with `c_0 = 1`: roots of the reversed monic
/// polynomial `Σ c_d z^{m−d}`, by Durand–Kerner iteration.
pub fn inverse_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let m = coeffs.len().saturating_sub(1);
    if m == 0 {
        return Vec::new();
    }
    let eval = |z: Complex64| coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c);
    let radius = 1.0 + coeffs.iter().skip(1).map(|c| c.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..m).map(|k| seed.powu(k as u32) * radius).collect();
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for i in 0..m {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..m {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * radius {
            break;
        }
    }
    z
}

/// Elementary symmetric functions `e_0, …, e_m`.
pub fn elementary_symmetric(roots: &[Complex64]) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(0.0, 0.0); roots.len() + 1];
    e[0] = Complex64::new(1.0, 0.0);
    for (n, a) in roots.iter().enumerate() {
        for k in (1..=n + 1).rev() {
            let prev = e[k - 1];
            e[k] += prev * a;
        }
    }
    e
}

#[derive(Debug, Clone, Serialize)]
pub struct SymPowRow {
    pub d: u32,
    pub divisor_sum_re: f64,
    pub divisor_sum_im: f64,
    pub predicted_re: f64,
    pub predicted_im: f64,
    pub residual: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymPowReport {
    pub q: u64,
    pub modulus: String,
    pub character: usize,
    pub even: bool,
    pub conductor: String,
    pub l_degree: u32,
    pub rows: Vec<SymPowRow>,
    pub passed: bool,
}

/// `divisor_sum(χ, d) = (−1)^d e_d(α)` for `d ≤ dmax`, which for `d > m`
/// means vanishing.
pub fn symmetric_power_check(chi: &DirichletCharacterFF, dmax: u32) -> Result<SymPowReport, FfError> {
    let l = l_polynomial(chi)?;
    let e = elementary_symmetric(&l.root_values());
    let sums = divisor_sums(chi, dmax, Domain::Complete)?;
    let rows: Vec<SymPowRow> = (0..=dmax)
        .map(|d| {
            let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
            let pred = e.get(d as usize).copied().unwrap_or_default() * sign;
            let s = sums[d as usize];
            let residual = (s - pred).norm();
            SymPowRow {
                d,
                divisor_sum_re: s.re,
                divisor_sum_im: s.im,
                predicted_re: pred.re,
                predicted_im: pred.im,
                residual,
                ok: residual <= scaled_tol(chi.p, d),
            }
        })
        .collect();
    let passed = rows.iter().all(|r| r.ok);
    Ok(SymPowReport {
        q: chi.p,
        modulus: chi.modulus.to_string(),
        character: chi.index,
        even: chi.even,
        conductor: chi.conductor.to_string(),
        l_degree: l.degree,
        rows,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(p: u64) -> FqPolynomial {
        FqPolynomial::new(p, vec![0, 1])
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-9
    }

    fn quadratic_mod_t(p: u64) -> DirichletCharacterFF {
        DirichletCharacterFF::all(&t(p)).unwrap().into_iter().find(|c| c.character_order() == 2).unwrap()
    }

    #[test]
    fn polynomial_basics() {
        let p = 3;
        let f = FqPolynomial::parse(p, "t^2+1").unwrap();
        assert_eq!(f.coeffs(), &[1, 0, 1]);
        assert_eq!(f.to_string(), "t^2+1");
        assert_eq!(FqPolynomial::parse(p, "[2,1]").unwrap().to_string(), "t+2");
        assert_eq!(FqPolynomial::parse(p, "t-1").unwrap(), FqPolynomial::new(p, vec![2, 1]));
        let g = FqPolynomial::parse(p, "t+1").unwrap();
        let (q, r) = f.mul(&g).add(&FqPolynomial::one(p)).div_rem(&g);
        assert_eq!(q, f);
        assert_eq!(r, FqPolynomial::one(p));
        assert!(FqPolynomial::parse(p, "t^").is_err());
    }

    #[test]
    fn irreducible_counts() {
        // number of monic irreducibles of degree d is (1/d) Σ_{k|d} μ(k) p^{d/k}
        let irr = monic_irreducibles(3, 4).unwrap();
        assert_eq!(irr.iter().map(Vec::len).collect::<Vec<_>>(), vec![0, 3, 3, 8, 18]);
        let irr5 = monic_irreducibles(5, 3).unwrap();
        assert_eq!(irr5[2].len(), 10);
        assert_eq!(irr5[3].len(), 40);
    }

    #[test]
    fn character_group_sizes() {
        let p = 3;
        for f in moduli_up_to(p, 2) {
            let g = ResidueGroup::new(&f).unwrap();
            let chars = g.characters();
            assert_eq!(chars.len() as u64, g.order(), "{f}");
            assert!(chars[0].is_trivial());
            // orthogonality: Σ_χ χ(r) = 0 for r ≠ 1
            for r in 2..checked_pow(p, f.degree().unwrap()).unwrap() {
                let r = FqPolynomial::from_code(p, r);
                if !r.is_coprime(&f) || f.degree() == Some(0) {
                    continue;
                }
                let s: Complex64 = chars.iter().map(|c| c.value(&r)).sum();
                assert!(s.norm() < 1e-9, "{f} {r}");
            }
        }
    }

    #[test]
    fn divisor_sum_examples() {
        let one = FqPolynomial::one(3);
        let triv = DirichletCharacterFF::trivial(&one).unwrap();
        assert!(close(divisor_sum(&triv, 2, Domain::Affine).unwrap(), Complex64::new(9.0, 0.0)));
        assert!(close(divisor_sum(&triv, 0, Domain::Affine).unwrap(), Complex64::new(1.0, 0.0)));
        let chi = quadratic_mod_t(3);
        assert!(close(chi.value(&FqPolynomial::parse(3, "t+1").unwrap()), Complex64::new(1.0, 0.0)));
        assert!(close(chi.value(&FqPolynomial::parse(3, "t+2").unwrap()), Complex64::new(-1.0, 0.0)));
        assert!(close(divisor_sum(&chi, 1, Domain::Affine).unwrap(), Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn quadratic_character_mod_t_is_odd_and_primitive() {
        let chi = quadratic_mod_t(3);
        assert!(!chi.is_even());
        assert_eq!(chi.conductor(), &t(3));
        assert_eq!(chi.expected_l_degree(), 0);
    }

    #[test]
    fn euler_examples() {
        let one = FqPolynomial::one(3);
        let triv = DirichletCharacterFF::trivial(&one).unwrap();
        let e = euler_coeffs(&triv, 5, Domain::Affine).unwrap();
        for (d, c) in e.iter().enumerate() {
            assert!(close(*c, Complex64::new(3f64.powi(d as i32), 0.0)));
        }
        let chi = quadratic_mod_t(3);
        let e = euler_coeffs(&chi, 6, Domain::Affine).unwrap();
        let s = divisor_sums(&chi, 6, Domain::Affine).unwrap();
        for d in 0..=6 {
            assert!(close(e[d], s[d]), "d={d}");
        }
    }

    #[test]
    fn l_polynomial_refuses_trivial() {
        let triv = DirichletCharacterFF::trivial(&t(3)).unwrap();
        assert_eq!(l_polynomial(&triv).unwrap_err(), FfError::Trivial);
    }

    #[test]
    fn l_roots_on_weil_circle() {
        for p in [3u64, 5] {
            for f in moduli_up_to(p, 2) {
                for chi in DirichletCharacterFF::all(&f).unwrap() {
                    if chi.is_trivial() {
                        continue;
                    }
                    let l = l_polynomial(&chi).unwrap();
                    assert_eq!(l.degree, l.expected_degree, "{chi}");
                    assert!(l.max_weil_defect < 1e-9, "{chi}");
                }
            }
        }
    }

    #[test]
    fn conductor_of_imprimitive_character() {
        // characters mod t² that factor through mod t have conductor t
        let p = 3;
        let f = t(p).mul(&t(p));
        let chars = DirichletCharacterFF::all(&f).unwrap();
        let conductors: Vec<String> = chars.iter().map(|c| c.conductor().to_string()).collect();
        assert_eq!(conductors.iter().filter(|c| *c == "1").count(), 1);
        assert_eq!(conductors.iter().filter(|c| *c == "t").count(), 1);
        assert_eq!(conductors.iter().filter(|c| *c == "t^2").count(), 4);
    }

    #[test]
    fn symmetric_power_small() {
        let p = 5;
        let f = FqPolynomial::parse(p, "t^2+2").unwrap();
        for chi in DirichletCharacterFF::all(&f).unwrap().into_iter().skip(1) {
            let r = symmetric_power_check(&chi, 5).unwrap();
            assert!(r.passed, "{chi}");
        }
    }

    #[test]
    fn elementary_symmetric_of_known_roots() {
        let e = elementary_symmetric(&[Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0)]);
        let re: Vec<f64> = e.iter().map(|c| c.re).collect();
        assert_eq!(re, vec![1.0, 6.0, 11.0, 6.0]);
    }

    #[test]
    fn inverse_roots_of_quadratic() {
        // (1 − 2u)(1 + 3u) = 1 + u − 6u²
        let c = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(-6.0, 0.0)];
        let mut r: Vec<f64> = inverse_roots(&c).iter().map(|z| z.re).collect();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((r[0] + 3.0).abs() < 1e-12 && (r[1] - 2.0).abs() < 1e-12);
    }
}
