//! The verification suite: ten pass/fail criteria with pinned tolerances.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::adelic::{self, FactoredTestFunction, RationalAdele, TruncationSet};
use crate::ffl::{self, DirichletCharacterFF};
use crate::localfield::PAdicApprox;
use crate::oracle;
use crate::orbital;
use crate::primes::{checked_pow, odd_primes_up_to, primes_up_to};
use crate::rootdata::{CartanType, RootSystem};
use crate::steinberg;

/// `s`-grid for the `O(p^{−3/2})` estimate.
pub const ESTIMATE_S_GRID: [f64; 4] = [1.1, 1.5, 2.0, 3.0];
/// Prime from which the scaled deviation must stop growing.
pub const ESTIMATE_FROM_PRIME: u64 = 13;
pub const ESTIMATE_TO_PRIME: u64 = 97;
/// Constant bounding `|K_split + K_unram| · p`.
pub const BALANCE_CONSTANT: i64 = 2;
pub const EULER_TOLERANCE: f64 = 1e-3;
pub const GAUSSIAN_TOLERANCE: f64 = 1e-10;
pub const POISSON_TOLERANCE: f64 = 1e-8;
pub const FF_TOLERANCE: f64 = 1e-9;
pub const RANDOM_ADELES: usize = 1000;
pub const SUITE_SEED: u64 = 0x7261_6365_6c61_62;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!("[{}] {:>2} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.id, self.name, self.detail)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub criteria: Vec<CriterionOutcome>,
    pub passed: bool,
}

fn outcome(id: u8, name: &'static str, r: Result<(bool, String), String>) -> CriterionOutcome {
    match r {
        Ok((passed, detail)) => CriterionOutcome { id, name, passed, detail },
        Err(e) => CriterionOutcome { id, name, passed: false, detail: format!("error: {e}") },
    }
}

pub fn hc1_exact() -> CriterionOutcome {
    let r = {
        let mut parts = Vec::new();
        let mut ok = true;
        for label in [CartanType::A1, CartanType::A2] {
            let rep = steinberg::verify_hc1(&RootSystem::build(label));
            ok &= rep.holds && rep.residual.is_zero();
            parts.push(format!("{label}: sign={} residual={}", rep.sign, rep.residual));
        }
        Ok((ok, parts.join("; ")))
    };
    outcome(1, "HC1 Jacobian identity", r)
}

pub const TRANSVERSAL_N: u32 = 4;

pub fn counting_vs_closed_form() -> CriterionOutcome {
    let r = (|| {
        let mut checked = 0;
        let mut bad = Vec::new();
        for p in odd_primes_up_to(13) {
            let rep = orbital::verify_transversal_lemma(p, TRANSVERSAL_N).map_err(|e| e.to_string())?;
            checked += rep.rows.len();
            bad.extend(rep.failures().into_iter().map(|b| (p, b)));
        }
        Ok((bad.is_empty(), format!("{checked} classes checked at N={TRANSVERSAL_N}, failures {bad:?}")))
    })();
    outcome(2, "fiber counts vs transversal closed form", r)
}

pub fn mass_telescope() -> CriterionOutcome {
    let r = (|| {
        let mut bad = Vec::new();
        for p in odd_primes_up_to(97) {
            let want = BigRational::one() - BigRational::new(BigInt::one(), BigInt::from(p * p));
            for n in [2u32, 4] {
                let th = orbital::theta_hat_zero(p, n, 1.0).map_err(|e| e.to_string())?;
                if th.exact.as_ref() != Some(&want) {
                    bad.push(format!("theta_hat p={p} N={n}"));
                }
            }
            // Σ_b count over every b mod p², by the discriminant kernel
            let q = p * p;
            let total: BigUint = (0..q as i64)
                .map(|b| orbital::count_fiber_fast(p, 2, b).map(|c| c.count))
                .sum::<Result<BigUint, _>>()
                .map_err(|e| e.to_string())?;
            if total != BigUint::from(q).pow(3) - BigUint::from(q).pow(2) {
                bad.push(format!("fast sum p={p}"));
            }
        }
        // and by the direct per-entry count for small moduli
        for (p, n) in [(3u64, 2u32), (3, 4), (5, 2), (7, 2), (11, 2), (13, 2)] {
            let q = checked_pow(p, n).unwrap();
            let total: BigUint = (0..q as i64)
                .map(|b| orbital::count_fiber(p, n, b).map(|c| c.count))
                .sum::<Result<BigUint, _>>()
                .map_err(|e| e.to_string())?;
            if total != BigUint::from(q).pow(3) - BigUint::from(q * q * q / (p * p)) {
                bad.push(format!("direct sum p={p} N={n}"));
            }
        }
        Ok((bad.is_empty(), format!("odd p ≤ 97 at N ∈ {{2, 4}}; failures {bad:?}")))
    })();
    outcome(3, "mass telescope θ̂(0;1) = 1 − p⁻²", r)
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateRow {
    pub p: u64,
    pub scaled_max_deviation: f64,
}

/// `max_s |θ̂_p(0; s) − 1| · p^{3/2}` over the grid, using the upper end of the
/// enclosure.
pub fn estimate_rows() -> Result<Vec<EstimateRow>, orbital::OrbitalError> {
    odd_primes_up_to(ESTIMATE_TO_PRIME)
        .into_iter()
        .map(|p| {
            let n = orbital::working_precision(p);
            let mut m = 0.0f64;
            for s in ESTIMATE_S_GRID {
                m = m.max(orbital::theta_hat_zero(p, n, s)?.max_abs_deviation());
            }
            Ok(EstimateRow { p, scaled_max_deviation: m * (p as f64).powf(1.5) })
        })
        .collect()
}

pub fn estimate() -> CriterionOutcome {
    let r = (|| {
        let rows = estimate_rows().map_err(|e| e.to_string())?;
        let at_start = rows
            .iter()
            .find(|r| r.p == ESTIMATE_FROM_PRIME)
            .map(|r| r.scaled_max_deviation)
            .ok_or("missing start prime")?;
        let later_max =
            rows.iter().filter(|r| r.p > ESTIMATE_FROM_PRIME).map(|r| r.scaled_max_deviation).fold(0.0, f64::max);
        let first = rows.first().map(|r| r.scaled_max_deviation).unwrap_or(f64::NAN);
        let last = rows.last().map(|r| r.scaled_max_deviation).unwrap_or(f64::NAN);
        Ok((
            later_max <= at_start,
            format!(
                "scaled deviation {first:.4} (p=3), {at_start:.4} (p={ESTIMATE_FROM_PRIME}), {last:.4} (p={ESTIMATE_TO_PRIME}); max over {ESTIMATE_FROM_PRIME} < p ≤ {ESTIMATE_TO_PRIME} = {later_max:.4}"
            ),
        ))
    })();
    outcome(4, "estimate θ̂(0;s) = 1 + O(p^{-3/2})", r)
}

/// Precision at which the per-class masses are cubic in `1/p`.
pub const BREAKDOWN_N: u32 = 2;

pub fn hand_identities() -> CriterionOutcome {
    let r = (|| {
        let rows: Vec<orbital::BreakdownRow> = odd_primes_up_to(97)
            .into_iter()
            .map(|p| orbital::torus_breakdown(p, BREAKDOWN_N))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let fit = orbital::fit_breakdown_coefficients(&rows).map_err(|e| e.to_string())?;
        let bound = orbital::derivative_balance_bound(&rows);
        let bound_ok = bound <= BigRational::from_integer(BALANCE_CONSTANT.into());
        let r = crate::records::rational;
        Ok((
            fit.identities_hold && fit.classes_agree && bound_ok,
            format!(
                "a1+b1={} a2+b2+c2={} classes agree={} max|K_s+K_u|·p={} (≤ {BALANCE_CONSTANT})",
                r(&(&fit.a1 + &fit.b1)),
                r(&(&fit.a2 + &fit.b2 + &fit.c2)),
                fit.classes_agree,
                r(&bound)
            ),
        ))
    })();
    outcome(5, "SL(2) hand identities", r)
}

pub const DOMINANT_PMAX_EXACT: [u64; 5] = [3, 10, 50, 100, 500];

pub fn dominant_product() -> CriterionOutcome {
    let r = (|| {
        let mut exact_ok = true;
        for pmax in DOMINANT_PMAX_EXACT {
            let d = orbital::dominant_product(pmax, 1.0).map_err(|e| e.to_string())?;
            exact_ok &= d.exact_gap.as_ref().is_some_and(Zero::is_zero);
        }
        let d500 = orbital::dominant_product(500, 1.0).map_err(|e| e.to_string())?;
        let euler_err = (d500.euler_product_with_two - 6.0 / (PI * PI)).abs();
        let mut trend = Vec::new();
        let mut trend_ok = true;
        for s in [1.5, 2.0] {
            let g100 = orbital::dominant_product(100, s).map_err(|e| e.to_string())?;
            let g500 = orbital::dominant_product(500, s).map_err(|e| e.to_string())?;
            trend_ok &= g500.max_abs_gap() < g100.min_abs_gap();
            trend.push(format!("s={s}: {:.6e} → {:.6e}", g100.gap, g500.gap));
        }
        Ok((
            exact_ok && euler_err < EULER_TOLERANCE && trend_ok,
            format!("exact gaps zero={exact_ok}; |Π(1−p⁻²) − 6/π²| = {euler_err:.3e}; {}", trend.join(", ")),
        ))
    })();
    outcome(6, "dominant product", r)
}

/// A random adele with poles at a few small primes and a random `S′`.
pub fn random_adele(rng: &mut ChaCha8Rng) -> (RationalAdele, TruncationSet) {
    let pool = primes_up_to(40);
    let mut finite = BTreeMap::new();
    for &p in &pool {
        if rng.gen_bool(0.3) {
            let v: i64 = rng.gen_range(-3..=2);
            let rel: i64 = rng.gen_range(2..=5);
            let unit = loop {
                let u = rng.gen_range(1..p.pow(rel as u32));
                if u % p != 0 {
                    break u;
                }
            };
            let x = PAdicApprox::new(p, v, unit, (v + rel).max(1)).expect("small modulus");
            finite.insert(p, x);
        }
    }
    let real = rng.gen_range(-10.0..10.0);
    let a = RationalAdele::new(real, finite).expect("valid by construction");
    let sp = TruncationSet::up_to(rng.gen_range(1..=20));
    (a, sp)
}

pub fn getz_lemmas() -> CriterionOutcome {
    let r = (|| {
        let b = adelic::getz_bound(&TruncationSet::infinity(), 2.0, 3).map_err(|e| e.to_string())?;
        let bound_ok = b.to_string() == "{inf,2,3,5,7}";
        let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED);
        let mut verified = 0;
        for _ in 0..RANDOM_ADELES {
            let (a, sp) = random_adele(&mut rng);
            let d = adelic::getz_decompose(&a, &sp).map_err(|e| e.to_string())?;
            if d.verify(&a, &sp).map_err(|e| e.to_string())? {
                verified += 1;
            }
        }
        Ok((
            bound_ok && verified == RANDOM_ADELES,
            format!("getz_bound(inf, 2, 3) = {b}; {verified}/{RANDOM_ADELES} decompositions verified"),
        ))
    })();
    outcome(7, "Getz truncation lemmas", r)
}

pub fn poisson() -> CriterionOutcome {
    let r = (|| {
        let mut gauss_err = 0.0f64;
        for t in [0.5, 1.0, 2.0] {
            let g = FactoredTestFunction::gaussian(t).transform();
            for xi in [0.0, 0.25, 0.5, 1.0, 1.75] {
                let quad = oracle::fourier_quadrature(|x| (-PI * t * x * x).exp(), xi, 12.0, 6000);
                let closed = g.eval_diagonal(&BigRational::from_float(xi).expect("finite"));
                gauss_err = gauss_err.max((quad.re - closed).abs()).max(quad.im.abs());
            }
        }
        let self_dual = adelic::poisson_truncated(&FactoredTestFunction::gaussian(1.0), &TruncationSet::infinity())
            .map_err(|e| e.to_string())?;
        let gauss_ok = gauss_err < GAUSSIAN_TOLERANCE && self_dual.gap < GAUSSIAN_TOLERANCE;

        let s2 = TruncationSet::parse("inf,2").map_err(|e| e.to_string())?;
        let mut worst = 0.0f64;
        let mut within = true;
        for t in [0.5, 1.0, 2.0] {
            for k in -2..=3 {
                let rec = adelic::poisson_truncated(&FactoredTestFunction::gaussian(t).with_level(2, k), &s2)
                    .map_err(|e| e.to_string())?;
                worst = worst.max(rec.gap);
                within &= rec.within_bound();
            }
        }
        Ok((
            gauss_ok && worst < POISSON_TOLERANCE && within,
            format!(
                "Gaussian transform error {gauss_err:.2e}, self-dual gap {:.2e}; worst gap over {{inf,2}} {worst:.2e}, all within tail bounds={within}",
                self_dual.gap
            ),
        ))
    })();
    outcome(8, "adelic Poisson summation", r)
}

pub const FF_PRIMES: [u64; 2] = [3, 5];
pub const FF_DMAX: u32 = 6;
pub const FF_MODULUS_DEGREE: u32 = 2;

pub fn function_field() -> CriterionOutcome {
    let r = (|| {
        let mut worst_serie = 0.0f64;
        let mut worst_weil = 0.0f64;
        let mut rows = 0usize;
        let mut chars = 0usize;
        let mut sympow_ok = true;
        for p in FF_PRIMES {
            let moduli = ffl::moduli_up_to(p, FF_MODULUS_DEGREE);
            let table = ffl::serie_table(p, &moduli, FF_DMAX).map_err(|e| e.to_string())?;
            rows += table.len();
            worst_serie = table.iter().map(|r| r.residual).fold(worst_serie, f64::max);
            for f in &moduli {
                for chi in DirichletCharacterFF::all(f).map_err(|e| e.to_string())? {
                    if chi.is_trivial() {
                        continue;
                    }
                    chars += 1;
                    let l = ffl::l_polynomial(&chi).map_err(|e| format!("{chi}: {e}"))?;
                    worst_weil = worst_weil.max(l.max_weil_defect);
                    let rep = ffl::symmetric_power_check(&chi, FF_DMAX).map_err(|e| format!("{chi}: {e}"))?;
                    sympow_ok &= rep.passed;
                }
            }
        }
        Ok((
            worst_serie <= FF_TOLERANCE && worst_weil <= FF_TOLERANCE && sympow_ok,
            format!(
                "{rows} (q, f, χ, d) rows, max residual {worst_serie:.2e}; {chars} nontrivial characters, max Weil defect {worst_weil:.2e}, vanishing beyond L-degree={sympow_ok}"
            ),
        ))
    })();
    outcome(9, "function-field Euler product identity", r)
}

/// `(p, N)` with `p^{4N} ≤ 3⁸`.
pub fn oracle_levels() -> Vec<(u64, u32)> {
    let limit = 3u64.pow(8);
    let mut out = Vec::new();
    for p in odd_primes_up_to(limit) {
        for n in 1.. {
            match checked_pow(p, 4 * n) {
                Some(v) if v <= limit => out.push((p, n)),
                _ => break,
            }
        }
    }
    out
}

pub fn oracle_equivalence() -> CriterionOutcome {
    let r = (|| {
        let levels = oracle_levels();
        let mut bad = Vec::new();
        for &(p, n) in &levels {
            let brute = oracle::brute_force_trace_counts(p, n);
            for (b, &want) in brute.iter().enumerate() {
                let fast = orbital::count_fiber_fast(p, n, b as i64).map_err(|e| e.to_string())?.count;
                let direct = orbital::count_fiber(p, n, b as i64).map_err(|e| e.to_string())?.count;
                if fast != BigUint::from(want) || direct != BigUint::from(want) {
                    bad.push((p, n, b));
                }
            }
        }
        Ok((bad.is_empty(), format!("levels {levels:?}; mismatches {bad:?}")))
    })();
    outcome(10, "fast counting vs brute-force enumeration", r)
}

pub fn criterion(id: u8) -> Option<CriterionOutcome> {
    Some(match id {
        1 => hc1_exact(),
        2 => counting_vs_closed_form(),
        3 => mass_telescope(),
        4 => estimate(),
        5 => hand_identities(),
        6 => dominant_product(),
        7 => getz_lemmas(),
        8 => poisson(),
        9 => function_field(),
        10 => oracle_equivalence(),
        _ => return None,
    })
}

pub fn run_all() -> SuiteReport {
    let criteria: Vec<CriterionOutcome> = (1..=10).filter_map(criterion).collect();
    let passed = criteria.iter().all(|c| c.passed);
    SuiteReport { criteria, passed }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_levels_are_the_small_ones() {
        assert_eq!(oracle_levels(), vec![(3, 1), (3, 2), (5, 1), (7, 1)]);
    }

    #[test]
    fn random_adeles_are_deterministic() {
        let mut r1 = ChaCha8Rng::seed_from_u64(1);
        let mut r2 = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let (a, s) = random_adele(&mut r1);
            let (b, t) = random_adele(&mut r2);
            assert_eq!(a, b);
            assert_eq!(s, t);
        }
    }

    #[test]
    fn outcome_line_format() {
        let c = CriterionOutcome { id: 3, name: "x", passed: true, detail: "ok".into() };
        assert_eq!(c.line(), "[PASS]  3 x: ok");
    }
}
