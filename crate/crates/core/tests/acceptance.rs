//! One test per acceptance criterion; each prints a single PASS/FAIL line.

use std::time::{Duration, Instant};

use tracelab::suite::{self, CriterionOutcome};

fn check(run: fn() -> CriterionOutcome, budget: Option<Duration>) {
    let start = Instant::now();
    let outcome = run();
    let elapsed = start.elapsed();
    let within = budget.is_none_or(|b| elapsed <= b);
    println!("{} ({:.2?})", outcome.line(), elapsed);
    assert!(outcome.passed, "{}", outcome.line());
    assert!(within, "criterion {} took {elapsed:?}, budget {budget:?}", outcome.id);
}

#[test]
fn criterion_01_hc1_exact() {
    check(suite::hc1_exact, Some(Duration::from_secs(1)));
}

#[test]
fn criterion_02_counting_vs_closed_form() {
    check(suite::counting_vs_closed_form, Some(Duration::from_secs(30)));
}

#[test]
fn criterion_03_mass_telescope() {
    check(suite::mass_telescope, None);
}

#[test]
fn criterion_04_estimate() {
    check(suite::estimate, Some(Duration::from_secs(300)));
}

#[test]
fn criterion_05_hand_identities() {
    check(suite::hand_identities, None);
}

#[test]
fn criterion_06_dominant_product() {
    check(suite::dominant_product, None);
}

#[test]
fn criterion_07_getz_lemmas() {
    check(suite::getz_lemmas, None);
}

#[test]
fn criterion_08_poisson() {
    check(suite::poisson, None);
}

#[test]
fn criterion_09_function_field() {
    check(suite::function_field, Some(Duration::from_secs(120)));
}

#[test]
fn criterion_10_oracle_equivalence() {
    check(suite::oracle_equivalence, None);
}
