//! Closed-form conditional entropies under the log score for the
//! Normal–Normal, Beta–Bernoulli and Gamma–Poisson conjugate pairs, and exact
//! samplers for their priors, data and posteriors.
//!
//! Gamma distributions use the (shape, rate) parameterization, so the
//! Poisson update is `alpha + sum(x)`, `beta + n`.

use std::f64::consts::{E, PI};

use rand::Rng;
use rand_distr::{Bernoulli, Beta, Binomial, Distribution, Gamma, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::specfun::{digamma, ln_beta, ln_gamma};

/// Default truncation tolerance for the Gamma–Poisson predictive sum.
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;

/// Hard stop on the number of Gamma–Poisson predictive terms.
const MAX_PREDICTIVE_TERMS: u64 = 50_000_000;

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!(
            "{name} must be finite and > 0, got {v}"
        )))
    }
}

/// Sufficient statistic of an observed sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSummary {
    /// Sample mean of Normal observations (ignored when n = 0).
    Mean(f64),
    /// Sum of Bernoulli or Poisson observations.
    Count(u64),
}

/// A conjugate prior together with its likelihood and sample size.
pub trait ConjugateModel: Clone + Send + Sync {
    fn sample_size(&self) -> u64;

    /// Exact r_S(π) under the log score.
    fn conditional_entropy(&self) -> Result<f64>;

    /// Differential entropy of the prior.
    fn prior_entropy(&self) -> Result<f64>;

    fn ln_prior_density(&self, theta: f64) -> f64;

    fn draw_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> f64;

    /// Draws the sufficient statistic of `n` observations at `theta`.
    fn draw_summary<R: Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> DataSummary;

    /// Raw observations at `theta`.
    fn draw_data<R: Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> Vec<f64>;

    fn summarize(&self, data: &[f64]) -> DataSummary;

    /// The posterior after `summary`, expressed as a prior with no data.
    fn posterior(&self, summary: DataSummary) -> Result<Self>;
}

// ---------------------------------------------------------------------------
// Normal–Normal

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalNormalSpec {
    pub mu: f64,
    pub tau2: f64,
    pub sigma2: f64,
    pub n: u64,
}

impl NormalNormalSpec {
    pub fn new(mu: f64, tau2: f64, sigma2: f64, n: u64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::InvalidSpec(format!("mu must be finite, got {mu}")));
        }
        positive("tau2", tau2)?;
        positive("sigma2", sigma2)?;
        Ok(Self {
            mu,
            tau2,
            sigma2,
            n,
        })
    }

    /// Posterior variance (1/τ² + n/σ²)⁻¹.
    pub fn posterior_variance(&self) -> f64 {
        1.0 / (1.0 / self.tau2 + self.n as f64 / self.sigma2)
    }
}

/// ½ ln(2πe τ̃²); the posterior variance does not depend on the data.
pub fn nn_conditional_entropy(spec: &NormalNormalSpec) -> f64 {
    0.5 * (2.0 * PI * E * spec.posterior_variance()).ln()
}

impl ConjugateModel for NormalNormalSpec {
    fn sample_size(&self) -> u64 {
        self.n
    }

    fn conditional_entropy(&self) -> Result<f64> {
        Ok(nn_conditional_entropy(self))
    }

    fn prior_entropy(&self) -> Result<f64> {
        Ok(0.5 * (2.0 * PI * E * self.tau2).ln())
    }

    fn ln_prior_density(&self, theta: f64) -> f64 {
        let z = theta - self.mu;
        -0.5 * (2.0 * PI * self.tau2).ln() - z * z / (2.0 * self.tau2)
    }

    fn draw_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        Normal::new(self.mu, self.tau2.sqrt())
            .expect("validated variance")
            .sample(rng)
    }

    fn draw_summary<R: Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> DataSummary {
        if self.n == 0 {
            return DataSummary::Mean(0.0);
        }
        let sd = (self.sigma2 / self.n as f64).sqrt();
        DataSummary::Mean(
            Normal::new(theta, sd)
                .expect("validated variance")
                .sample(rng),
        )
    }

    fn draw_data<R: Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> Vec<f64> {
        let dist = Normal::new(theta, self.sigma2.sqrt()).expect("validated variance");
        (0..self.n).map(|_| dist.sample(rng)).collect()
    }

    fn summarize(&self, data: &[f64]) -> DataSummary {
        if data.is_empty() {
            DataSummary::Mean(0.0)
        } else {
            DataSummary::Mean(data.iter().sum::<f64>() / data.len() as f64)
        }
    }

    fn posterior(&self, summary: DataSummary) -> Result<Self> {
        let DataSummary::Mean(mean) = summary else {
            return Err(Error::InvalidSpec(
                "Normal data is summarized by its mean".into(),
            ));
        };
        let var = self.posterior_variance();
        let mu = if self.n == 0 {
            self.mu
        } else {
            var * (self.mu / self.tau2 + self.n as f64 * mean / self.sigma2)
        };
        NormalNormalSpec::new(mu, var, self.sigma2, 0)
    }
}

// ---------------------------------------------------------------------------
// Beta–Bernoulli

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaBernoulliSpec {
    pub alpha: f64,
    pub beta: f64,
    pub n: u64,
}

impl BetaBernoulliSpec {
    pub fn new(alpha: f64, beta: f64, n: u64) -> Result<Self> {
        positive("alpha", alpha)?;
        positive("beta", beta)?;
        Ok(Self { alpha, beta, n })
    }
}

/// Differential entropy of Beta(a, b).
pub fn beta_posterior_entropy(a: f64, b: f64) -> Result<f64> {
    Ok(
        ln_beta(a, b)? - (a - 1.0) * digamma(a)? - (b - 1.0) * digamma(b)?
            + (a + b - 2.0) * digamma(a + b)?,
    )
}

fn ln_choose(n: u64, k: u64) -> Result<f64> {
    let n = n as f64;
    let k = k as f64;
    Ok(ln_gamma(n + 1.0)? - ln_gamma(k + 1.0)? - ln_gamma(n - k + 1.0)?)
}

/// Beta-Binomial probability of `s` successes in `n` trials.
pub fn beta_binomial_pmf(s: u64, n: u64, alpha: f64, beta: f64) -> Result<f64> {
    if s > n {
        return Ok(0.0);
    }
    let ln_p = ln_choose(n, s)? + ln_beta(alpha + s as f64, beta + (n - s) as f64)?
        - ln_beta(alpha, beta)?;
    Ok(ln_p.exp())
}

/// Exact expectation over the Beta-Binomial distribution of the success count.
pub fn bb_conditional_entropy(spec: &BetaBernoulliSpec) -> Result<f64> {
    let mut total = 0.0;
    for s in 0..=spec.n {
        let w = beta_binomial_pmf(s, spec.n, spec.alpha, spec.beta)?;
        let h = beta_posterior_entropy(spec.alpha + s as f64, spec.beta + (spec.n - s) as f64)?;
        total += w * h;
    }
    Ok(total)
}

impl ConjugateModel for BetaBernoulliSpec {
    fn sample_size(&self) -> u64 {
        self.n
    }

    fn conditional_entropy(&self) -> Result<f64> {
        bb_conditional_entropy(self)
    }

    fn prior_entropy(&self) -> Result<f64> {
        beta_posterior_entropy(self.alpha, self.beta)
    }

    fn ln_prior_density(&self, theta: f64) -> f64 {
        // keep draws that round onto the boundary finite
        let t = theta.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
        (self.alpha - 1.0) * t.ln() + (self.beta - 1.0) * (-t).ln_1p()
            - ln_beta(self.alpha, self.beta).expect("validated parameters")
    }

    fn draw_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        Beta::new(self.alpha, self.beta)
            .expect("validated parameters")
            .sample(rng)
    }

    fn draw_summary<R: Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> DataSummary {
        let p = theta.clamp(0.0, 1.0);
        DataSummary::Count(Binomial::new(self.n, p).expect("p in [0,1]").sample(rng))
    }

    fn draw_data<R: Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> Vec<f64> {
        let dist = Bernoulli::new(theta.clamp(0.0, 1.0)).expect("p in [0,1]");
        (0..self.n)
            .map(|_| if dist.sample(rng) { 1.0 } else { 0.0 })
            .collect()
    }

    fn summarize(&self, data: &[f64]) -> DataSummary {
        DataSummary::Count(data.iter().filter(|v| **v > 0.5).count() as u64)
    }

    fn posterior(&self, summary: DataSummary) -> Result<Self> {
        let DataSummary::Count(s) = summary else {
            return Err(Error::InvalidSpec(
                "Bernoulli data is summarized by a count".into(),
            ));
        };
        if s > self.n {
            return Err(Error::InvalidSpec(format!(
                "{s} successes exceed {} trials",
                self.n
            )));
        }
        BetaBernoulliSpec::new(self.alpha + s as f64, self.beta + (self.n - s) as f64, 0)
    }
}

// ---------------------------------------------------------------------------
// Gamma–Poisson

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaPoissonSpec {
    pub alpha: f64,
    /// Rate.
    pub beta: f64,
    pub n: u64,
}

impl GammaPoissonSpec {
    pub fn new(alpha: f64, beta: f64, n: u64) -> Result<Self> {
        positive("alpha", alpha)?;
        positive("beta", beta)?;
        Ok(Self { alpha, beta, n })
    }
}

/// Differential entropy of Gamma(shape `a`, rate `b`).
pub fn gamma_posterior_entropy(a: f64, b: f64) -> Result<f64> {
    positive("rate", b)?;
    Ok(a - b.ln() + ln_gamma(a)? + (1.0 - a) * digamma(a)?)
}

/// Expectation over the negative-binomial predictive law of the count sum.
///
/// Terms are added until the mode has been passed and a geometric bound on
/// the remaining predictive mass, weighted by twice the current entropy
/// magnitude plus one, falls below `tail_tol`.
pub fn gp_conditional_entropy(spec: &GammaPoissonSpec, tail_tol: f64) -> Result<f64> {
    if !(tail_tol.is_finite() && tail_tol > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "tail_tol must be > 0, got {tail_tol}"
        )));
    }
    let rate = spec.beta + spec.n as f64;
    if spec.n == 0 {
        return gamma_posterior_entropy(spec.alpha, spec.beta);
    }
    // S ~ NegBin(alpha, p = beta / (beta + n)), failure probability q = n / (beta + n)
    let q = spec.n as f64 / rate;
    let ln_q = q.ln();
    let ln_p = (spec.beta / rate).ln();
    let ln_gamma_alpha = ln_gamma(spec.alpha)?;

    let mut total = 0.0;
    let mut s: u64 = 0;
    loop {
        let sf = s as f64;
        let ln_pmf = ln_gamma(spec.alpha + sf)? - ln_gamma_alpha - ln_gamma(sf + 1.0)?
            + spec.alpha * ln_p
            + sf * ln_q;
        let pmf = ln_pmf.exp();
        let h = gamma_posterior_entropy(spec.alpha + sf, rate)?;
        total += pmf * h;

        // successive pmf ratio (alpha + s) q / (s + 1) tends monotonically to q
        let ratio = (spec.alpha + sf) * q / (sf + 1.0);
        let bound_ratio = ratio.max(q);
        if ratio < 1.0 && bound_ratio < 1.0 {
            let tail = pmf * bound_ratio / (1.0 - bound_ratio);
            if tail * (2.0 * h.abs() + 1.0) < tail_tol {
                break;
            }
        }
        s += 1;
        if s > MAX_PREDICTIVE_TERMS {
            return Err(Error::Divergent(format!(
                "predictive sum did not reach tolerance {tail_tol} within {MAX_PREDICTIVE_TERMS} terms"
            )));
        }
    }
    Ok(total)
}

impl ConjugateModel for GammaPoissonSpec {
    fn sample_size(&self) -> u64 {
        self.n
    }

    fn conditional_entropy(&self) -> Result<f64> {
        gp_conditional_entropy(self, DEFAULT_TAIL_TOL)
    }

    fn prior_entropy(&self) -> Result<f64> {
        gamma_posterior_entropy(self.alpha, self.beta)
    }

    fn ln_prior_density(&self, theta: f64) -> f64 {
        let t = theta.max(f64::MIN_POSITIVE);
        self.alpha * self.beta.ln() + (self.alpha - 1.0) * t.ln()
            - self.beta * t
            - ln_gamma(self.alpha).expect("validated shape")
    }

    fn draw_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        Gamma::new(self.alpha, 1.0 / self.beta)
            .expect("validated parameters")
            .sample(rng)
    }

    fn draw_summary<R: Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> DataSummary {
        DataSummary::Count(poisson_draw(self.n as f64 * theta, rng))
    }

    fn draw_data<R: Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> Vec<f64> {
        (0..self.n)
            .map(|_| poisson_draw(theta, rng) as f64)
            .collect()
    }

    fn summarize(&self, data: &[f64]) -> DataSummary {
        DataSummary::Count(data.iter().map(|v| v.round().max(0.0) as u64).sum())
    }

    fn posterior(&self, summary: DataSummary) -> Result<Self> {
        let DataSummary::Count(s) = summary else {
            return Err(Error::InvalidSpec(
                "Poisson data is summarized by a count".into(),
            ));
        };
        GammaPoissonSpec::new(self.alpha + s as f64, self.beta + self.n as f64, 0)
    }
}

fn poisson_draw<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean.is_nan() || mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean)
        .expect("positive finite mean")
        .sample(rng) as u64
}

// ---------------------------------------------------------------------------
// Family dispatch

/// One of the three built-in conjugate pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    NormalNormal(NormalNormalSpec),
    BetaBernoulli(BetaBernoulliSpec),
    GammaPoisson(GammaPoissonSpec),
}

impl FamilySpec {
    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::NormalNormal(_) => "normal_normal",
            FamilySpec::BetaBernoulli(_) => "beta_bernoulli",
            FamilySpec::GammaPoisson(_) => "gamma_poisson",
        }
    }

    pub fn sample_size(&self) -> u64 {
        match self {
            FamilySpec::NormalNormal(s) => s.n,
            FamilySpec::BetaBernoulli(s) => s.n,
            FamilySpec::GammaPoisson(s) => s.n,
        }
    }

    pub fn conditional_entropy(&self) -> Result<f64> {
        match self {
            FamilySpec::NormalNormal(s) => s.conditional_entropy(),
            FamilySpec::BetaBernoulli(s) => s.conditional_entropy(),
            FamilySpec::GammaPoisson(s) => s.conditional_entropy(),
        }
    }

    pub fn prior_entropy(&self) -> Result<f64> {
        match self {
            FamilySpec::NormalNormal(s) => s.prior_entropy(),
            FamilySpec::BetaBernoulli(s) => s.prior_entropy(),
            FamilySpec::GammaPoisson(s) => s.prior_entropy(),
        }
    }
}

/// Likelihood family for [`sample_data`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DataFamily {
    Normal { sigma2: f64 },
    Bernoulli,
    Poisson,
}

/// `count` independent prior draws.
pub fn sample_prior<M: ConjugateModel>(spec: &M, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng::seeded(seed);
    (0..count).map(|_| spec.draw_prior(&mut rng)).collect()
}

/// `n` observations from the likelihood at `theta`.
pub fn sample_data(theta: f64, family: DataFamily, n: u64, seed: u64) -> Result<Vec<f64>> {
    let mut rng = rng::seeded(seed);
    Ok(match family {
        DataFamily::Normal { sigma2 } => {
            NormalNormalSpec::new(0.0, 1.0, sigma2, n)?.draw_data(theta, &mut rng)
        }
        DataFamily::Bernoulli => {
            if !(0.0..=1.0).contains(&theta) {
                return Err(Error::InvalidSpec(format!(
                    "Bernoulli theta {theta} not in [0,1]"
                )));
            }
            BetaBernoulliSpec::new(1.0, 1.0, n)?.draw_data(theta, &mut rng)
        }
        DataFamily::Poisson => {
            if !(theta.is_finite() && theta >= 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "Poisson mean {theta} must be >= 0"
                )));
            }
            GammaPoissonSpec::new(1.0, 1.0, n)?.draw_data(theta, &mut rng)
        }
    })
}

/// `count` posterior draws given the sufficient statistic.
pub fn sample_posterior<M: ConjugateModel>(
    spec: &M,
    summary: DataSummary,
    count: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    Ok(sample_prior(&spec.posterior(summary)?, count, seed))
}
