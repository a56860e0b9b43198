//! The twelve acceptance criteria at full size, one test each. Every test
//! prints a single `PASS`/`FAIL` line with the criterion's measured details.

use paretonet::harness::{run_criterion, VerifyLevel, VerifyOptions};

fn criterion(id: u32) {
    let opts = VerifyOptions {
        level: VerifyLevel::Full,
        ..Default::default()
    };
    let result = run_criterion(id, &opts).expect("criterion id is valid");
    println!(
        "{} criterion {:>2} [{:.1} s] {}: {}",
        if result.passed { "PASS" } else { "FAIL" },
        result.id,
        result.runtime_s,
        result.name,
        result.details
    );
    assert!(result.passed, "criterion {id} failed: {}", result.details);
}

#[test]
fn criterion_01_mean_degree_exact() {
    criterion(1);
}

#[test]
fn criterion_02_mean_degree_asymptotic() {
    criterion(2);
}

#[test]
fn criterion_03_degree_law() {
    criterion(3);
}

#[test]
fn criterion_04_degree_tail() {
    criterion(4);
}

#[test]
fn criterion_05_joint_nonfactorization() {
    criterion(5);
}

#[test]
fn criterion_06_vanishing_gap() {
    criterion(6);
}

#[test]
fn criterion_07_triangle_scaling() {
    criterion(7);
}

#[test]
fn criterion_08_motif_triangulation() {
    criterion(8);
}

#[test]
fn criterion_09_dust_transition() {
    criterion(9);
}

#[test]
fn criterion_10_product_tail() {
    criterion(10);
}

#[test]
fn criterion_11_sampler_equivalence() {
    criterion(11);
}

#[test]
fn criterion_12_determinism() {
    criterion(12);
}
