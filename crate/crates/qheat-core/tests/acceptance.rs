//! End-to-end acceptance gate. One test per verification check; each prints
//! its pass/fail line with the measured statistic (visible with
//! `cargo test --test acceptance -- --nocapture`).

use qheat_core::validation::{self, Check};

const SEED: u64 = 42;

fn assert_check(c: Check) {
    let tag = if c.passed { "PASS" } else { "FAIL" };
    println!("[{tag}] {:>2} {:<26} {}", c.id, c.name, c.detail);
    assert!(c.passed, "check {} ({}) failed: {}", c.id, c.name, c.detail);
}

#[test]
fn check_01_normalization() {
    assert_check(validation::check_normalization(SEED));
}

#[test]
fn check_02_generator_structure() {
    assert_check(validation::check_generator_structure(SEED.wrapping_add(1)));
}

#[test]
fn check_03_spectral_stability() {
    assert_check(validation::check_spectral_stability(SEED.wrapping_add(2)));
}

#[test]
fn check_04_longitudinal_closed_forms() {
    assert_check(validation::check_longitudinal_closed_forms(
        SEED.wrapping_add(3),
    ));
}

#[test]
fn check_05_stationary_power() {
    assert_check(validation::check_stationary_power(SEED.wrapping_add(4)));
}

#[test]
fn check_06_cumulant_consistency() {
    assert_check(validation::check_cumulant_consistency(SEED.wrapping_add(5)));
}

#[test]
fn check_07_finite_time_distribution() {
    assert_check(validation::check_finite_time_distribution(
        SEED.wrapping_add(6),
    ));
}

#[test]
fn check_08_comb_convergence() {
    assert_check(validation::check_comb_convergence(SEED.wrapping_add(7)));
}

#[test]
fn check_09_monte_carlo_moments() {
    assert_check(validation::check_monte_carlo_moments(SEED.wrapping_add(8)));
}

#[test]
fn check_10_phase_sweep() {
    assert_check(validation::check_phase_sweep(SEED.wrapping_add(9)));
}

#[test]
fn check_11_thermal_symmetry() {
    assert_check(validation::check_thermal_symmetry(SEED.wrapping_add(10)));
}

#[test]
fn check_12_undriven_limit() {
    assert_check(validation::check_undriven_limit(SEED.wrapping_add(11)));
}

#[test]
fn check_13_resonance_peak() {
    assert_check(validation::check_resonance_peak(SEED.wrapping_add(12)));
}

#[test]
fn run_all_reports_every_check_once() {
    let checks = validation::run_all(SEED);
    assert_eq!(checks.len(), 13);
    for (i, c) in checks.iter().enumerate() {
        assert_eq!(c.id, i + 1);
    }
}
