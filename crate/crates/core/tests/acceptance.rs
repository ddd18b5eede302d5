//! Acceptance criteria 1 to 12, one test each. Every test prints a single
//! `criterion N [PASS|FAIL] ...` line; run with `--nocapture` to see them.

use std::time::{Duration, Instant};

use min_energy::selftest::{self, CriterionReport, SelftestOptions};

fn check(report: CriterionReport) {
    println!("{report}");
    assert!(report.passed, "{report}");
}

fn opts() -> SelftestOptions {
    SelftestOptions::default()
}

#[test]
fn criterion_01_scalar_gramian_limit() {
    let started = Instant::now();
    check(selftest::criterion_1(&opts()));
    assert!(started.elapsed() < Duration::from_secs(1));
}

#[test]
fn criterion_02_structural_k_matches_gramian_inverse() {
    let started = Instant::now();
    check(selftest::criterion_2(&opts()));
    assert!(started.elapsed() < Duration::from_secs(60));
}

#[test]
fn criterion_03_riccati_and_theta_spectrum() {
    check(selftest::criterion_3(&opts()));
}

#[test]
fn criterion_04_decreasing_finite_horizon_cost() {
    check(selftest::criterion_4(&opts()));
}

#[test]
fn criterion_05_a_eps_limit_curves() {
    check(selftest::criterion_5(&opts()));
}

#[test]
fn criterion_06_exact_scaling_constant() {
    check(selftest::criterion_6(&opts()));
}

#[test]
fn criterion_07_phi_oracle() {
    check(selftest::criterion_7(&opts()));
}

#[test]
fn criterion_08_buffer_probes_vanish() {
    check(selftest::criterion_8(&opts()));
}

#[test]
fn criterion_09_existence_classification() {
    check(selftest::criterion_9(&opts()));
}

#[test]
fn criterion_10_completion_of_square() {
    check(selftest::criterion_10(&opts()));
}

#[test]
fn criterion_11_gramian_methods_agree() {
    check(selftest::criterion_11(&opts()));
}

#[test]
fn criterion_12_selftest_is_fast_and_deterministic() {
    let started = Instant::now();
    let first = selftest::run_all(&opts());
    let second = selftest::run_all(&opts());
    let elapsed = started.elapsed();
    let key = |r: &CriterionReport| (r.id, r.passed, r.detail.clone());
    let same = first.iter().map(key).eq(second.iter().map(key));
    let all = first.iter().all(|r| r.passed);
    // both runs together must fit in the budget
    let ok = same && all && elapsed < Duration::from_secs(600);
    println!(
        "criterion 12 [{}] selftest end-to-end: two runs in {:.1} s, identical reports {same}, all passed {all}",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    assert!(ok);
}
