//! Log-gamma, digamma, trigamma and log-beta for positive real arguments.
//!
//! All three gamma-family functions use the same scheme: shift the argument
//! upward with the functional recurrence until it reaches the asymptotic
//! regime, then sum a truncated Stirling/Bernoulli series.

use crate::error::{domain, Result};

/// Below this the recurrence is applied before the asymptotic series.
const ASYMPTOTIC_THRESHOLD: f64 = 10.0;

/// 0.5 * ln(2π)
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// B_{2k} / (2k (2k-1)) for k = 1..8, the Stirling series coefficients.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// B_{2k} / (2k) for k = 1..8.
const DIGAMMA_ASYMP: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32_760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
];

/// B_{2k} for k = 1..8.
const BERNOULLI: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

fn check_positive(function: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(domain(function, x, "finite and > 0"))
    }
}

/// Natural log of the gamma function for `x > 0`.
///
/// Exact zeros are returned at `x = 1` and `x = 2`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    check_positive("ln_gamma", x)?;
    if x == 1.0 || x == 2.0 {
        return Ok(0.0);
    }

    // lnΓ(x) = lnΓ(x + m) - ln(x (x+1) ... (x+m-1))
    let mut shifted = x;
    let mut product = 1.0;
    while shifted < ASYMPTOTIC_THRESHOLD {
        product *= shifted;
        shifted += 1.0;
    }
    Ok(stirling_ln_gamma(shifted) - product.ln())
}

fn stirling_ln_gamma(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut power = inv;
    for c in STIRLING {
        series += c * power;
        power *= inv2;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + series
}

/// Digamma ψ(x) = d/dx lnΓ(x) for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    check_positive("digamma", x)?;
    let mut acc = 0.0;
    let mut xx = x;
    while xx < ASYMPTOTIC_THRESHOLD {
        acc -= 1.0 / xx;
        xx += 1.0;
    }
    let inv2 = 1.0 / (xx * xx);
    let mut power = inv2;
    let mut series = 0.0;
    for c in DIGAMMA_ASYMP {
        series += c * power;
        power *= inv2;
    }
    Ok(acc + xx.ln() - 0.5 / xx - series)
}

/// Trigamma ψ'(x) for `x > 0`.
pub fn trigamma(x: f64) -> Result<f64> {
    check_positive("trigamma", x)?;
    let mut acc = 0.0;
    let mut xx = x;
    while xx < ASYMPTOTIC_THRESHOLD {
        acc += 1.0 / (xx * xx);
        xx += 1.0;
    }
    // ψ'(x) ~ 1/x + 1/(2x²) + Σ B_{2k} / x^{2k+1}
    let inv = 1.0 / xx;
    let inv2 = inv * inv;
    let mut power = inv2 * inv;
    let mut series = 0.0;
    for b in BERNOULLI {
        series += b * power;
        power *= inv2;
    }
    Ok(acc + inv + 0.5 * inv2 + series)
}

/// ln B(a, b) = lnΓ(a) + lnΓ(b) - lnΓ(a + b).
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    check_positive("ln_beta", a)?;
    check_positive("ln_beta", b)?;
    Ok(ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

    #[test]
    fn ln_gamma_known_values() {
        assert_eq!(ln_gamma(1.0).unwrap(), 0.0);
        assert_eq!(ln_gamma(2.0).unwrap(), 0.0);
        let sqrt_pi_ln = 0.5 * std::f64::consts::PI.ln();
        assert!((ln_gamma(0.5).unwrap() - sqrt_pi_ln).abs() < 1e-14);
        let ln_fact9 = (362_880.0_f64).ln();
        assert!((ln_gamma(10.0).unwrap() - ln_fact9).abs() < 1e-13);
    }

    #[test]
    fn ln_gamma_small_argument() {
        // lnΓ(x) = -ln x - γx + O(x²)
        let x: f64 = 1e-6;
        let approx = -x.ln() - EULER_GAMMA * x;
        assert!((ln_gamma(x).unwrap() - approx).abs() < 1e-11);
    }

    #[test]
    fn digamma_known_values() {
        assert!((digamma(1.0).unwrap() + EULER_GAMMA).abs() < 1e-14);
        assert!((digamma(2.0).unwrap() - (1.0 - EULER_GAMMA)).abs() < 1e-14);
        let expected = -EULER_GAMMA - 2.0 * std::f64::consts::LN_2;
        assert!((digamma(0.5).unwrap() - expected).abs() < 1e-13);
    }

    #[test]
    fn trigamma_known_values() {
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((trigamma(1.0).unwrap() / (pi2 / 6.0) - 1.0).abs() < 1e-13);
        assert!((trigamma(2.0).unwrap() / (pi2 / 6.0 - 1.0) - 1.0).abs() < 1e-13);
        assert!((trigamma(0.5).unwrap() / (pi2 / 2.0) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn ln_beta_known_values() {
        assert_eq!(ln_beta(1.0, 1.0).unwrap(), 0.0);
        assert!((ln_beta(2.0, 3.0).unwrap() - (1.0f64 / 12.0).ln()).abs() < 1e-14);
        assert!((ln_beta(0.5, 0.5).unwrap() - std::f64::consts::PI.ln()).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_positive_and_non_finite() {
        for bad in [0.0, -1.0, -0.5, f64::NAN, f64::INFINITY] {
            assert!(ln_gamma(bad).is_err());
            assert!(digamma(bad).is_err());
            assert!(trigamma(bad).is_err());
            assert!(ln_beta(bad, 1.0).is_err());
            assert!(ln_beta(1.0, bad).is_err());
        }
    }
}
