use bayesimax::specfun::{digamma, ln_beta, ln_gamma, trigamma};
use proptest::prelude::*;
use std::f64::consts::{LN_2, PI};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn log_grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points).map(move |i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
}

/// A few ulps of `v`, for comparisons whose operands are too large for a pure
/// absolute tolerance.
fn ulps(v: f64, n: f64) -> f64 {
    n * f64::EPSILON * v.abs()
}

#[test]
fn digamma_recurrence_on_log_grid() {
    for x in log_grid(1e-3, 1e6, 400) {
        let gap = digamma(x + 1.0).unwrap() - digamma(x).unwrap() - 1.0 / x;
        let tol = 1e-10 + ulps(1.0 / x, 4.0);
        assert!(gap.abs() <= tol, "x = {x}: {gap:e}");
    }
}

#[test]
fn trigamma_recurrence_on_log_grid() {
    for x in log_grid(1e-3, 1e6, 400) {
        let gap = trigamma(x + 1.0).unwrap() - trigamma(x).unwrap() + 1.0 / (x * x);
        assert!(gap.abs() <= 1e-8, "x = {x}: {gap:e}");
    }
}

#[test]
fn ln_gamma_recurrence_on_log_grid() {
    for x in log_grid(1e-3, 1e6, 400) {
        let next = ln_gamma(x + 1.0).unwrap();
        let gap = next - ln_gamma(x).unwrap() - x.ln();
        let tol = 1e-10 + ulps(next, 8.0);
        assert!(gap.abs() <= tol, "x = {x}: {gap:e}");
    }
}

#[test]
fn digamma_is_derivative_of_ln_gamma() {
    for x in log_grid(0.1, 100.0, 200) {
        let h = 1e-5 * x.max(1.0);
        let fd = (ln_gamma(x + h).unwrap() - ln_gamma(x - h).unwrap()) / (2.0 * h);
        assert!((fd - digamma(x).unwrap()).abs() <= 1e-6, "x = {x}");
    }
}

#[test]
fn ln_gamma_reference_values() {
    assert_eq!(ln_gamma(1.0).unwrap(), 0.0);
    assert!((ln_gamma(0.5).unwrap() - 0.5 * PI.ln()).abs() <= 1e-12);
    let ln_fact9 = (1..=9u64).product::<u64>() as f64;
    assert!((ln_gamma(10.0).unwrap() - ln_fact9.ln()).abs() <= 1e-12);
    assert!((ln_gamma(10.0).unwrap() - 12.801_827_480_1).abs() <= 1e-10);
}

#[test]
fn digamma_reference_values() {
    assert!((digamma(1.0).unwrap() + EULER_GAMMA).abs() <= 1e-10);
    assert!((digamma(2.0).unwrap() - (1.0 - EULER_GAMMA)).abs() <= 1e-10);
    assert!((digamma(0.5).unwrap() - (-EULER_GAMMA - 2.0 * LN_2)).abs() <= 1e-10);
    assert!((digamma(0.5).unwrap() + 1.963_510_026_0).abs() <= 1e-10);
}

#[test]
fn trigamma_reference_values() {
    // Basel partial sum with an Euler–Maclaurin tail.
    let n = 100_000u64;
    let partial: f64 = (1..=n).rev().map(|k| 1.0 / (k as f64).powi(2)).sum();
    let nf = n as f64;
    let basel = partial + 1.0 / nf - 0.5 / (nf * nf) + 1.0 / (6.0 * nf.powi(3));
    assert!((basel - PI * PI / 6.0).abs() <= 1e-14);
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    assert!(rel(trigamma(1.0).unwrap(), basel) <= 1e-8);
    assert!(rel(trigamma(2.0).unwrap(), basel - 1.0) <= 1e-8);
    assert!(rel(trigamma(0.5).unwrap(), PI * PI / 2.0) <= 1e-8);
}

#[test]
fn ln_beta_reference_values() {
    assert!(ln_beta(1.0, 1.0).unwrap().abs() <= 1e-12);
    assert!((ln_beta(2.0, 3.0).unwrap() - (1.0f64 / 12.0).ln()).abs() <= 1e-12);
    assert!((ln_beta(0.5, 0.5).unwrap() - PI.ln()).abs() <= 1e-12);
}

#[test]
fn domain_errors() {
    for bad in [0.0, -1.0, f64::NAN, f64::INFINITY] {
        assert!(ln_gamma(bad).is_err(), "ln_gamma({bad})");
        assert!(digamma(bad).is_err(), "digamma({bad})");
        assert!(trigamma(bad).is_err(), "trigamma({bad})");
    }
    assert!(ln_beta(0.0, 1.0).is_err());
    assert!(ln_beta(1.0, -2.0).is_err());
}

proptest! {
    #[test]
    fn agrees_with_statrs(x in 1e-3f64..1e3) {
        let ours = ln_gamma(x).unwrap();
        let theirs = statrs::function::gamma::ln_gamma(x);
        prop_assert!((ours - theirs).abs() <= 1e-10 + ulps(theirs, 16.0), "ln_gamma({x})");
        let ours = digamma(x).unwrap();
        let theirs = statrs::function::gamma::digamma(x);
        prop_assert!((ours - theirs).abs() <= 1e-9 + ulps(theirs, 16.0), "digamma({x})");
    }

    #[test]
    fn ln_beta_matches_ln_gamma(a in 1e-2f64..1e3, b in 1e-2f64..1e3) {
        let direct = ln_gamma(a).unwrap() + ln_gamma(b).unwrap() - ln_gamma(a + b).unwrap();
        prop_assert!((ln_beta(a, b).unwrap() - direct).abs() <= 1e-9 + ulps(direct, 16.0));
    }

    #[test]
    fn ln_beta_is_symmetric(a in 1e-2f64..1e3, b in 1e-2f64..1e3) {
        prop_assert_eq!(ln_beta(a, b).unwrap(), ln_beta(b, a).unwrap());
    }
}
