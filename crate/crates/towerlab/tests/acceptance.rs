//! Acceptance gate: one pass/fail line per criterion, built on the same
//! named check groups that `towerlab verify` runs.

use std::time::Duration;
use towerlab::cli::{
    check_arithmetic_oracles, check_closed_form_generators, check_degree_monotonicity,
    check_dimension_laws, check_first_integrals, check_foliation_extension,
    check_frobenius_partials, check_parser_round_trip, check_round_trips, CheckResult, Status,
};

const SEED: u64 = 1;

/// Print the criterion verdict and panic with the failing details if any
/// check in the group failed.
fn verdict(number: usize, label: &str, checks: &[CheckResult]) {
    let failures: Vec<&CheckResult> = checks
        .iter()
        .filter(|c| c.status == Status::Fail)
        .collect();
    let skips = checks.iter().filter(|c| c.status == Status::Skip).count();
    let ok = failures.is_empty();
    println!(
        "criterion {number} ({label}): {}{}",
        if ok { "PASS" } else { "FAIL" },
        if skips > 0 {
            format!(" ({skips} skipped)")
        } else {
            String::new()
        }
    );
    if !ok {
        let lines: Vec<String> = failures
            .iter()
            .map(|c| format!("  {}: {}", c.name, c.detail))
            .collect();
        panic!(
            "criterion {number} ({label}) failed:\n{}",
            lines.join("\n")
        );
    }
}

fn total(checks: &[CheckResult]) -> Duration {
    Duration::from_millis(checks.iter().map(|c| c.millis as u64).sum())
}

#[test]
fn criterion_1_closed_form_generators() {
    let checks = check_closed_form_generators();
    for c in &checks {
        assert!(
            c.millis < 30_000,
            "{} took {} ms, limit is 30 s per case",
            c.name,
            c.millis
        );
    }
    verdict(1, "closed-form generator operators", &checks);
}

#[test]
fn criterion_2_first_integrals() {
    verdict(
        2,
        "first integrals of the all-ones graph tower",
        &check_first_integrals(),
    );
}

#[test]
fn criterion_3_round_trips() {
    let checks = check_round_trips(SEED);
    assert!(checks.len() >= 30, "corpus too small: {}", checks.len());
    let elapsed = total(&checks);
    assert!(
        elapsed < Duration::from_secs(300),
        "round trips took {elapsed:?}, limit is 5 min"
    );
    verdict(3, "tower/sequence/algebra round trips", &checks);
}

#[test]
fn criterion_4_dimension_laws() {
    verdict(4, "dimension laws", &check_dimension_laws(SEED));
}

#[test]
fn criterion_5_degree_monotonicity() {
    verdict(
        5,
        "nonincreasing p-power degrees and exponent-one steps",
        &check_degree_monotonicity(SEED),
    );
}

#[test]
fn criterion_6_frobenius_partials() {
    verdict(
        6,
        "symbol restrictions equal Frobenius partials",
        &check_frobenius_partials(),
    );
}

#[test]
fn criterion_7_arithmetic_oracles() {
    let checks = check_arithmetic_oracles(SEED);
    let elapsed = total(&checks);
    assert!(
        elapsed < Duration::from_secs(120),
        "oracle checks took {elapsed:?}, limit is 2 min"
    );
    verdict(7, "randomized arithmetic oracles", &checks);
}

#[test]
fn criterion_8_foliation_extension() {
    verdict(
        8,
        "foliation extension and splitting",
        &check_foliation_extension(SEED),
    );
}

#[test]
fn criterion_9_parser_round_trip() {
    verdict(
        9,
        "printer/parser round trips and bundled scripts",
        &check_parser_round_trip(SEED),
    );
}
