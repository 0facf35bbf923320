//! Large-sample approximation of the conditional Shannon entropy through the
//! Fisher information:
//!
//! ```text
//! r(π) ≈ (d/2) ln(2πe / n) − E_π[ ln √det I(Θ) ]
//! ```
//!
//! The expectation is evaluated in closed form for the conjugate prior /
//! model pairs and by Gauss–Legendre quadrature otherwise.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::specfun::{digamma, ln_beta, ln_gamma};

/// Default number of Gauss–Legendre nodes.
pub const DEFAULT_QUAD_POINTS: usize = 256;

/// One-dimensional regular sampling model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FisherModel {
    NormalKnownVar { sigma2: f64 },
    Bernoulli,
    Poisson,
}

impl FisherModel {
    pub fn dim(&self) -> usize {
        1
    }

    fn validate(&self) -> Result<()> {
        if let FisherModel::NormalKnownVar { sigma2 } = self {
            if !(sigma2.is_finite() && *sigma2 > 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "sigma2 must be > 0, got {sigma2}"
                )));
            }
        }
        Ok(())
    }

    fn in_parameter_space(&self, theta: f64) -> bool {
        match self {
            FisherModel::NormalKnownVar { .. } => theta.is_finite(),
            FisherModel::Bernoulli => theta > 0.0 && theta < 1.0,
            FisherModel::Poisson => theta > 0.0 && theta.is_finite(),
        }
    }
}

/// Per-observation Fisher information.
pub fn fisher_info(model: &FisherModel, theta: f64) -> Result<f64> {
    model.validate()?;
    if !model.in_parameter_space(theta) {
        return Err(domain(
            "fisher_info",
            theta,
            "interior of the parameter space",
        ));
    }
    Ok(match model {
        FisherModel::NormalKnownVar { sigma2 } => 1.0 / sigma2,
        FisherModel::Bernoulli => 1.0 / (theta * (1.0 - theta)),
        FisherModel::Poisson => 1.0 / theta,
    })
}

/// A prior on a scalar parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PriorSpec {
    Normal {
        mu: f64,
        tau2: f64,
    },
    Beta {
        alpha: f64,
        beta: f64,
    },
    /// Shape and rate.
    Gamma {
        alpha: f64,
        beta: f64,
    },
    Discrete {
        support: Vec<f64>,
        weights: Vec<f64>,
    },
}

impl PriorSpec {
    fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!("{name} must be > 0, got {v}")))
            }
        };
        match self {
            PriorSpec::Normal { mu, tau2 } => {
                if !mu.is_finite() {
                    return Err(Error::InvalidSpec(format!("mu must be finite, got {mu}")));
                }
                pos("tau2", *tau2)
            }
            PriorSpec::Beta { alpha, beta } | PriorSpec::Gamma { alpha, beta } => {
                pos("alpha", *alpha)?;
                pos("beta", *beta)
            }
            PriorSpec::Discrete { support, weights } => {
                if support.len() != weights.len() || support.is_empty() {
                    return Err(Error::InvalidSpec(
                        "discrete prior needs matching non-empty support and weights".into(),
                    ));
                }
                crate::scores::DiscreteDist::new(weights.clone())?;
                Ok(())
            }
        }
    }

    fn ln_density(&self, theta: f64) -> f64 {
        match self {
            PriorSpec::Normal { mu, tau2 } => {
                -0.5 * (2.0 * PI * tau2).ln() - (theta - mu).powi(2) / (2.0 * tau2)
            }
            PriorSpec::Beta { alpha, beta } => {
                (alpha - 1.0) * theta.ln() + (beta - 1.0) * (-theta).ln_1p()
                    - ln_beta(*alpha, *beta).unwrap_or(f64::NAN)
            }
            PriorSpec::Gamma { alpha, beta } => {
                alpha * beta.ln() + (alpha - 1.0) * theta.ln()
                    - beta * theta
                    - ln_gamma(*alpha).unwrap_or(f64::NAN)
            }
            PriorSpec::Discrete { .. } => f64::NAN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticEntropy {
    pub value: f64,
    /// E_π[ln √det I(Θ)].
    pub expected_log_root_fisher: f64,
    /// True when the prior piles mass near a boundary where the normal
    /// approximation is least trustworthy. Informational only.
    pub boundary_strained: bool,
}

/// E_π[ln √I(Θ)], analytically where possible, else by quadrature.
pub fn expected_log_root_fisher(
    prior: &PriorSpec,
    model: &FisherModel,
    quad_points: usize,
) -> Result<f64> {
    prior.validate()?;
    model.validate()?;
    match (prior, model) {
        (_, FisherModel::NormalKnownVar { sigma2 }) => {
            if let PriorSpec::Discrete { support, .. } = prior {
                check_support(support, model)?;
            }
            Ok(-0.5 * sigma2.ln())
        }
        (PriorSpec::Beta { alpha, beta }, FisherModel::Bernoulli) => {
            Ok(-0.5 * (digamma(*alpha)? + digamma(*beta)? - 2.0 * digamma(alpha + beta)?))
        }
        (PriorSpec::Beta { alpha, beta }, FisherModel::Poisson) => {
            Ok(-0.5 * (digamma(*alpha)? - digamma(alpha + beta)?))
        }
        (PriorSpec::Gamma { alpha, beta }, FisherModel::Poisson) => {
            Ok(-0.5 * (digamma(*alpha)? - beta.ln()))
        }
        (PriorSpec::Discrete { support, weights }, _) => {
            check_support(support, model)?;
            support
                .iter()
                .zip(weights)
                .filter(|(_, w)| **w > 0.0)
                .map(|(t, w)| Ok(w * 0.5 * fisher_info(model, *t)?.ln()))
                .sum()
        }
        _ => expected_log_root_fisher_quadrature(prior, model, quad_points),
    }
}

fn check_support(support: &[f64], model: &FisherModel) -> Result<()> {
    match support.iter().find(|t| !model.in_parameter_space(**t)) {
        Some(t) => Err(Error::InvalidSpec(format!(
            "prior support point {t} lies outside the model's parameter space"
        ))),
        None => Ok(()),
    }
}

/// Quadrature evaluation of E_π[ln √I(Θ)] for continuous priors.
///
/// Nodes are placed by θ = L (1 − cos πu) / 2 over u ∈ [0, 1], which clusters
/// them at both ends of `[0, L]` where Beta and Gamma densities are singular
/// or where ln I diverges. `L` is 1 for Beta priors and a far upper quantile
/// bound for Gamma priors.
pub fn expected_log_root_fisher_quadrature(
    prior: &PriorSpec,
    model: &FisherModel,
    quad_points: usize,
) -> Result<f64> {
    prior.validate()?;
    model.validate()?;
    if quad_points < 2 {
        return Err(Error::InvalidSpec(
            "need at least 2 quadrature points".into(),
        ));
    }
    let upper = match prior {
        PriorSpec::Beta { .. } => 1.0,
        PriorSpec::Gamma { alpha, beta } => {
            if matches!(model, FisherModel::Bernoulli) {
                return Err(Error::InvalidSpec(
                    "a Gamma prior is not supported inside (0, 1)".into(),
                ));
            }
            (alpha + 40.0 * alpha.sqrt() + 40.0) / beta
        }
        PriorSpec::Normal { mu, tau2 } => {
            if !matches!(model, FisherModel::NormalKnownVar { .. }) {
                return Err(Error::InvalidSpec(
                    "a Normal prior is not supported inside the model's parameter space".into(),
                ));
            }
            // I is constant; integrate over mu ± 40 sd for completeness
            let sd = tau2.sqrt();
            return normal_window_quadrature(
                *mu,
                sd,
                quad_points,
                |t| Ok(0.5 * fisher_info(model, t)?.ln()),
                prior,
            );
        }
        PriorSpec::Discrete { .. } => return expected_log_root_fisher(prior, model, quad_points),
    };

    let (nodes, weights) = gauss_legendre(quad_points);
    let mut total = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        let u = 0.5 * (x + 1.0);
        let theta = 0.5 * upper * (1.0 - (PI * u).cos());
        let jac = 0.25 * PI * upper * (PI * u).sin(); // dθ/dx
        if !model.in_parameter_space(theta) || jac == 0.0 {
            continue;
        }
        let f = (prior.ln_density(theta)).exp();
        if f == 0.0 {
            continue;
        }
        total += w * jac * f * 0.5 * fisher_info(model, theta)?.ln();
    }
    if !total.is_finite() {
        return Err(Error::Divergent(
            "expected log Fisher information is not finite".into(),
        ));
    }
    Ok(total)
}

fn normal_window_quadrature(
    mu: f64,
    sd: f64,
    points: usize,
    g: impl Fn(f64) -> Result<f64>,
    prior: &PriorSpec,
) -> Result<f64> {
    let (nodes, weights) = gauss_legendre(points);
    let half = 40.0 * sd;
    let mut total = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        let theta = mu + half * x;
        total += w * half * prior.ln_density(theta).exp() * g(theta)?;
    }
    Ok(total)
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let (p, pm1) = if n == 1 { (x, 1.0) } else { (p1, p0) };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn boundary_strained(prior: &PriorSpec, model: &FisherModel) -> bool {
    match (prior, model) {
        (PriorSpec::Beta { alpha, beta }, FisherModel::Bernoulli) => *alpha <= 0.5 || *beta <= 0.5,
        (PriorSpec::Beta { alpha, .. }, FisherModel::Poisson)
        | (PriorSpec::Gamma { alpha, .. }, FisherModel::Poisson) => *alpha <= 0.5,
        _ => false,
    }
}

/// (d/2) ln(2πe/n) − E_π[ln √det I(Θ)].
pub fn asymptotic_conditional_entropy(
    prior: &PriorSpec,
    model: &FisherModel,
    n: u64,
    quad_points: usize,
) -> Result<AsymptoticEntropy> {
    if n == 0 {
        return Err(Error::InvalidSpec("sample size must be at least 1".into()));
    }
    let expected = expected_log_root_fisher(prior, model, quad_points)?;
    let d = model.dim() as f64;
    Ok(AsymptoticEntropy {
        value: 0.5 * d * (2.0 * PI * E / n as f64).ln() - expected,
        expected_log_root_fisher: expected,
        boundary_strained: boundary_strained(prior, model),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// -E_X[d²/dθ² ln p(X | θ)] by central differences.
    fn fd_fisher(
        ln_p: impl Fn(u64, f64) -> f64,
        pmf: impl Fn(u64, f64) -> f64,
        support: u64,
        theta: f64,
    ) -> f64 {
        let h = 1e-4;
        (0..=support)
            .map(|x| {
                let c = (ln_p(x, theta + h) - 2.0 * ln_p(x, theta) + ln_p(x, theta - h)) / (h * h);
                -pmf(x, theta) * c
            })
            .sum()
    }

    #[test]
    fn fisher_examples() {
        assert_eq!(fisher_info(&FisherModel::Bernoulli, 0.5).unwrap(), 4.0);
        let ln_p = |x: u64, t: f64| if x == 1 { t.ln() } else { (1.0 - t).ln() };
        let pmf = |x: u64, t: f64| if x == 1 { t } else { 1.0 - t };
        assert!((fd_fisher(ln_p, pmf, 1, 0.5) - 4.0).abs() < 1e-5);

        assert_eq!(fisher_info(&FisherModel::Poisson, 2.0).unwrap(), 0.5);
        let ln_p = |x: u64, t: f64| x as f64 * t.ln() - t - ln_gamma(x as f64 + 1.0).unwrap();
        let pmf = |x: u64, t: f64| ln_p(x, t).exp();
        assert!((fd_fisher(ln_p, pmf, 60, 2.0) - 0.5).abs() < 1e-5);

        let m = FisherModel::NormalKnownVar { sigma2: 4.0 };
        assert_eq!(fisher_info(&m, -3.0).unwrap(), 0.25);
        assert_eq!(fisher_info(&m, 100.0).unwrap(), 0.25);
    }

    #[test]
    fn fisher_domain_errors() {
        assert!(fisher_info(&FisherModel::Bernoulli, 0.0).is_err());
        assert!(fisher_info(&FisherModel::Bernoulli, 1.0).is_err());
        assert!(fisher_info(&FisherModel::Poisson, 0.0).is_err());
        assert!(fisher_info(&FisherModel::NormalKnownVar { sigma2: 0.0 }, 1.0).is_err());
    }

    #[test]
    fn normal_model_value() {
        let prior = PriorSpec::Normal { mu: 3.0, tau2: 7.0 };
        let a = asymptotic_conditional_entropy(
            &prior,
            &FisherModel::NormalKnownVar { sigma2: 1.0 },
            100,
            64,
        )
        .unwrap();
        assert!((a.value - 0.5 * (2.0 * PI * E / 100.0).ln()).abs() < 1e-15);
        assert!((a.value + 0.8837).abs() < 1e-4);
        let q = expected_log_root_fisher_quadrature(
            &prior,
            &FisherModel::NormalKnownVar { sigma2: 1.0 },
            256,
        )
        .unwrap();
        assert!(q.abs() < 1e-10);
    }

    #[test]
    fn bernoulli_beta_closed_form_and_quadrature() {
        let m = FisherModel::Bernoulli;
        let uniform = PriorSpec::Beta {
            alpha: 1.0,
            beta: 1.0,
        };
        let a = asymptotic_conditional_entropy(&uniform, &m, 50, DEFAULT_QUAD_POINTS).unwrap();
        let psi1 = digamma(1.0).unwrap();
        let psi2 = digamma(2.0).unwrap();
        let expected = 0.5 * (2.0 * PI * E / 50.0).ln() + 0.5 * (2.0 * psi1 - 2.0 * psi2);
        assert!((a.value - expected).abs() < 1e-14);
        for (al, be) in [(1.0, 1.0), (2.0, 2.0), (0.8, 3.0), (5.0, 1.5)] {
            let p = PriorSpec::Beta {
                alpha: al,
                beta: be,
            };
            let exact = expected_log_root_fisher(&p, &m, DEFAULT_QUAD_POINTS).unwrap();
            let quad = expected_log_root_fisher_quadrature(&p, &m, DEFAULT_QUAD_POINTS).unwrap();
            assert!(
                (exact - quad).abs() < 1e-6,
                "Beta({al},{be}): {exact} vs {quad}"
            );
        }
    }

    #[test]
    fn poisson_gamma_closed_form_and_quadrature() {
        let m = FisherModel::Poisson;
        let p = PriorSpec::Gamma {
            alpha: 3.0,
            beta: 2.0,
        };
        let a = asymptotic_conditional_entropy(&p, &m, 10, DEFAULT_QUAD_POINTS).unwrap();
        let expected = 0.5 * (2.0 * PI * E / 10.0).ln() + 0.5 * (digamma(3.0).unwrap() - 2f64.ln());
        assert!((a.value - expected).abs() < 1e-14);
        for (al, be) in [(1.0, 1.0), (2.0, 0.5), (3.0, 2.0), (10.0, 4.0)] {
            let p = PriorSpec::Gamma {
                alpha: al,
                beta: be,
            };
            let exact = expected_log_root_fisher(&p, &m, DEFAULT_QUAD_POINTS).unwrap();
            let quad = expected_log_root_fisher_quadrature(&p, &m, DEFAULT_QUAD_POINTS).unwrap();
            assert!(
                (exact - quad).abs() < 1e-6,
                "Gamma({al},{be}): {exact} vs {quad}"
            );
        }
    }

    #[test]
    fn poisson_gamma_matches_monte_carlo() {
        use crate::conjugate::{sample_prior, GammaPoissonSpec};
        let spec = GammaPoissonSpec::new(2.5, 1.5, 0).unwrap();
        let draws = sample_prior(&spec, 400_000, 3);
        let vals: Vec<f64> = draws.iter().map(|t| -0.5 * t.ln()).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64;
        let se = (var / vals.len() as f64).sqrt();
        let exact = expected_log_root_fisher(
            &PriorSpec::Gamma {
                alpha: 2.5,
                beta: 1.5,
            },
            &FisherModel::Poisson,
            0,
        )
        .unwrap();
        assert!((mean - exact).abs() < 3.0 * se);
    }

    #[test]
    fn discrete_prior_sums_exactly() {
        let p = PriorSpec::Discrete {
            support: vec![0.25, 0.5],
            weights: vec![0.5, 0.5],
        };
        let e = expected_log_root_fisher(&p, &FisherModel::Bernoulli, 0).unwrap();
        let expected = 0.5 * (0.5 * (1.0f64 / 0.1875).ln() + 0.5 * 4f64.ln());
        assert!((e - expected).abs() < 1e-15);
        let bad = PriorSpec::Discrete {
            support: vec![0.0, 0.5],
            weights: vec![0.5, 0.5],
        };
        assert!(expected_log_root_fisher(&bad, &FisherModel::Bernoulli, 0).is_err());
    }

    #[test]
    fn prior_model_mismatch_is_rejected() {
        let normal = PriorSpec::Normal { mu: 0.5, tau2: 1.0 };
        assert!(asymptotic_conditional_entropy(&normal, &FisherModel::Bernoulli, 10, 64).is_err());
        let gamma = PriorSpec::Gamma {
            alpha: 1.0,
            beta: 1.0,
        };
        assert!(asymptotic_conditional_entropy(&gamma, &FisherModel::Bernoulli, 10, 64).is_err());
        assert!(asymptotic_conditional_entropy(
            &PriorSpec::Beta {
                alpha: 1.0,
                beta: 1.0
            },
            &FisherModel::Bernoulli,
            0,
            64
        )
        .is_err());
    }

    #[test]
    fn boundary_flag() {
        let m = FisherModel::Bernoulli;
        let strained = asymptotic_conditional_entropy(
            &PriorSpec::Beta {
                alpha: 0.5,
                beta: 2.0,
            },
            &m,
            10,
            64,
        )
        .unwrap();
        assert!(strained.boundary_strained);
        assert!(strained.value.is_finite());
        let fine = asymptotic_conditional_entropy(
            &PriorSpec::Beta {
                alpha: 2.0,
                beta: 2.0,
            },
            &m,
            10,
            64,
        )
        .unwrap();
        assert!(!fine.boundary_strained);
    }

    #[test]
    fn ranking_follows_fisher_term() {
        let m = FisherModel::Bernoulli;
        let priors = [(0.7, 0.7), (1.0, 1.0), (2.0, 2.0), (5.0, 1.0), (10.0, 10.0)];
        let mut by_value: Vec<(usize, f64)> = Vec::new();
        let mut by_fisher: Vec<(usize, f64)> = Vec::new();
        for (i, (a, b)) in priors.iter().enumerate() {
            let p = PriorSpec::Beta {
                alpha: *a,
                beta: *b,
            };
            let r = asymptotic_conditional_entropy(&p, &m, 10_000, 64).unwrap();
            by_value.push((i, r.value));
            by_fisher.push((i, -expected_log_root_fisher(&p, &m, 64).unwrap()));
        }
        by_value.sort_by(|a, b| a.1.total_cmp(&b.1));
        by_fisher.sort_by(|a, b| a.1.total_cmp(&b.1));
        let order = |v: &[(usize, f64)]| v.iter().map(|p| p.0).collect::<Vec<_>>();
        assert_eq!(order(&by_value), order(&by_fisher));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let int: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((int - 2.0 / 15.0).abs() < 1e-14);
        let (x, w) = gauss_legendre(256);
        let int: f64 = x.iter().zip(&w).map(|(x, w)| w * x.cos()).sum();
        assert!((int - 2.0 * 1f64.sin()).abs() < 1e-13);
    }
}
