//! Acceptance suite: every exit criterion at its stated tolerance, one
//! pass/fail line each, at reference resolution (R = 20, Lambda = 40,
//! 4000 quadrature nodes per axis, dimensions 2 and 3).
//!
//! The criteria run through the same check functions as the `suite` CLI,
//! so thresholds live in one place (`sphq::suite`).

use std::sync::OnceLock;

use sphq::suite::{self, CheckResult, SuiteConfig, SuiteContext};

fn context() -> &'static SuiteContext {
    static CTX: OnceLock<SuiteContext> = OnceLock::new();
    CTX.get_or_init(|| {
        SuiteContext::build(&SuiteConfig::default()).expect("reference transforms calibrate")
    })
}

fn assert_criterion(number: u32, what: &str, result: CheckResult) {
    let verdict = if result.pass { "PASS" } else { "FAIL" };
    println!(
        "ACCEPTANCE {number:02} [{verdict}] {what}: {} ({:.1} ms)",
        result.detail, result.wall_ms
    );
    assert!(
        result.pass,
        "criterion {number} ({what}) failed: {}\nvalues: {}",
        result.detail, result.values
    );
}

fn run(number: u32, what: &str, f: fn(&SuiteContext) -> CheckResult) {
    let t0 = std::time::Instant::now();
    let mut result = f(context());
    result.wall_ms = t0.elapsed().as_secs_f64() * 1e3;
    assert_criterion(number, what, result);
}

#[test]
fn criterion_01_inversion_roundtrip() {
    run(
        1,
        "inversion round-trip <= 1e-6, <= 60 s per space",
        suite::check_roundtrip,
    );
}

#[test]
fn criterion_02_plancherel_identity() {
    run(2, "Plancherel identity <= 1e-6", suite::check_plancherel);
}

#[test]
fn criterion_03_functional_equation() {
    run(
        3,
        "spherical functional equation <= 1e-8 (H^2)",
        suite::check_functional_equation,
    );
}

#[test]
fn criterion_04_eigenrelation() {
    run(
        4,
        "finite-difference eigenrelation <= 1e-5",
        suite::check_eigenrelation,
    );
}

#[test]
fn criterion_05_semigroup_oracle() {
    run(
        5,
        "spectral evolution vs Hunt convolution <= 1e-4",
        suite::check_evolve_vs_hunt,
    );
}

#[test]
fn criterion_06_subfeller_audit() {
    run(
        6,
        "sub-Feller positivity/contraction for the exponent library",
        suite::check_subfeller_library,
    );
}

#[test]
fn criterion_07_schoenberg() {
    run(
        7,
        "Schoenberg PSD sampling; counterexample rejected",
        suite::check_schoenberg_library,
    );
}

#[test]
fn criterion_08_negdef_inequalities() {
    run(
        8,
        "sqrt subadditivity and Peetre on 1e4 random pairs",
        suite::check_negdef_suite,
    );
}

#[test]
fn criterion_09_fractional_laplacian_routes() {
    run(
        9,
        "subordination vs multiplier at beta = 1 <= 1e-3",
        suite::check_frac_laplacian_routes,
    );
}

#[test]
fn criterion_10_mollifier_contract() {
    run(
        10,
        "mollifier scaling, contraction and 10x decay",
        suite::check_mollifier_contract,
    );
}

#[test]
fn criterion_11_commutator_uniformity() {
    run(
        11,
        "commutator ratio varies <= 2x across the eps grid",
        suite::check_commutator_uniformity,
    );
}

#[test]
fn criterion_12_fhat_decay_bound() {
    run(
        12,
        "transformed-symbol decay bound on the sampled panel",
        suite::check_fhat_decay,
    );
}

#[test]
fn criterion_13_coercivity() {
    run(
        13,
        "Rayleigh coercivity margin >= c0/2 - 1e-6",
        suite::check_coercivity,
    );
}

#[test]
fn criterion_14_resolvent_solve() {
    run(
        14,
        "resolvent residual <= 1e-4 at n = 256, monotone, closed form",
        suite::check_resolvent,
    );
}

#[test]
fn criterion_15_gangolli_equivalence() {
    run(
        15,
        "direct Gangolli vs negated PsDO <= 1e-3 on 3 families x 20",
        suite::check_gangolli_equivalence,
    );
}

#[test]
fn criterion_16_pmp_probe() {
    run(
        16,
        "positive maximum principle; sign-flipped operator fails",
        suite::check_pmp,
    );
}

#[test]
fn criterion_17_audit_pipeline() {
    run(
        17,
        "end-to-end audit: 2 kappa_min passes, kappa_min/10 fails at smallness",
        suite::check_audit_pipeline,
    );
}
