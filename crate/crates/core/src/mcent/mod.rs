//! Nested Monte Carlo estimation of r_S(π) under the log score.
//!
//! The outer loop draws a parameter from the prior and data from the
//! likelihood; the inner loop draws from the conjugate posterior and applies
//! the Kozachenko–Leonenko k-nearest-neighbor entropy estimator. The
//! alternative estimator subtracts a Monte Carlo estimate of the expected
//! posterior-to-prior KL divergence from the analytic prior entropy.
//!
//! Replicate `i` always uses generator stream `i` of the configured seed, so
//! estimates are a pure function of `(spec, config)`.

mod kdtree;

pub use kdtree::KdTree;

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conjugate::{ConjugateModel, FamilySpec};
use crate::error::{Error, Result};
use crate::rng;
use crate::specfun::{digamma, ln_gamma};

/// Point sets at or below this size use the exhaustive pairwise scan.
pub const BRUTE_FORCE_LIMIT: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    /// Outer replications.
    #[serde(rename = "I", default = "default_reps")]
    pub outer_reps: usize,
    /// Posterior draws per replication.
    #[serde(rename = "J", default = "default_reps")]
    pub inner_draws: usize,
    #[serde(rename = "k", default = "default_k")]
    pub knn_k: usize,
    #[serde(default)]
    pub seed: u64,
    /// Half-width of uniform jitter added to every draw.
    #[serde(default)]
    pub jitter_scale: f64,
}

fn default_reps() -> usize {
    2000
}

fn default_k() -> usize {
    3
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            outer_reps: default_reps(),
            inner_draws: default_reps(),
            knn_k: default_k(),
            seed: 0,
            jitter_scale: 0.0,
        }
    }
}

impl McConfig {
    pub fn new(outer_reps: usize, inner_draws: usize, knn_k: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            outer_reps,
            inner_draws,
            knn_k,
            seed,
            jitter_scale: 0.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.knn_k == 0 || self.knn_k >= self.inner_draws {
            return Err(Error::InvalidSpec(format!(
                "need 1 <= k < J, got k = {}, J = {}",
                self.knn_k, self.inner_draws
            )));
        }
        if self.outer_reps < 2 {
            return Err(Error::InvalidSpec(format!(
                "need I >= 2 for a standard error, got {}",
                self.outer_reps
            )));
        }
        if !(self.jitter_scale.is_finite() && self.jitter_scale >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "jitter_scale must be finite and >= 0, got {}",
                self.jitter_scale
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub value: f64,
    pub stderr: f64,
    pub per_rep: Vec<f64>,
    pub config: McConfig,
}

impl EntropyEstimate {
    /// Mean of the replicates and their sample SD over √I.
    pub fn from_replicates(per_rep: Vec<f64>, config: McConfig) -> Self {
        let n = per_rep.len() as f64;
        let value = per_rep.iter().sum::<f64>() / n;
        let var = per_rep.iter().map(|v| (v - value).powi(2)).sum::<f64>() / (n - 1.0);
        Self {
            value,
            stderr: (var / n).sqrt(),
            per_rep,
            config,
        }
    }
}

/// ln of the volume of the unit d-ball.
fn ln_unit_ball_volume(dim: usize) -> Result<f64> {
    let d = dim as f64;
    Ok(0.5 * d * PI.ln() - ln_gamma(0.5 * d + 1.0)?)
}

/// Euclidean distance from each point to its `k`-th nearest other point.
pub fn knn_distances(samples: &[f64], dim: usize, k: usize) -> Result<Vec<f64>> {
    if dim == 0 || !samples.len().is_multiple_of(dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: samples.len(),
        });
    }
    let n = samples.len() / dim;
    if k == 0 || k >= n {
        return Err(Error::InvalidSpec(format!(
            "need 1 <= k < J, got k = {k}, J = {n}"
        )));
    }
    let tree = KdTree::new(samples, dim);
    let dist2: Vec<f64> = if n <= BRUTE_FORCE_LIMIT {
        let mut scratch = Vec::with_capacity(n - 1);
        (0..n)
            .map(|i| {
                scratch.clear();
                scratch.extend((0..n).filter(|j| *j != i).map(|j| tree.dist2(i, j)));
                let (_, kth, _) = scratch.select_nth_unstable_by(k - 1, f64::total_cmp);
                *kth
            })
            .collect()
    } else {
        (0..n).map(|i| tree.kth_neighbor_dist2(i, k)).collect()
    };
    Ok(dist2.into_iter().map(f64::sqrt).collect())
}

/// Kozachenko–Leonenko differential entropy estimate (nats) from `J` points
/// stored row-major with `dim` coordinates each.
pub fn knn_entropy(samples: &[f64], dim: usize, k: usize) -> Result<f64> {
    let rho = knn_distances(samples, dim, k)?;
    let n = rho.len();
    if let Some(i) = rho.iter().position(|r| *r == 0.0) {
        return Err(Error::DegenerateSample(format!(
            "point {i} has zero distance to its neighbor of order k = {k}"
        )));
    }
    let mean_ln_rho = rho.iter().map(|r| r.ln()).sum::<f64>() / n as f64;
    Ok(digamma(n as f64)? - digamma(k as f64)?
        + ln_unit_ball_volume(dim)?
        + dim as f64 * mean_ln_rho)
}

fn posterior_draws<M: ConjugateModel, R: Rng>(
    spec: &M,
    cfg: &McConfig,
    rng: &mut R,
) -> Result<(M, Vec<f64>)> {
    let theta = spec.draw_prior(rng);
    let summary = spec.draw_summary(theta, rng);
    let post = spec.posterior(summary)?;
    let draws = (0..cfg.inner_draws).map(|_| post.draw_prior(rng)).collect();
    Ok((post, draws))
}

fn run_replicates<F>(cfg: &McConfig, replicate: F) -> Result<EntropyEstimate>
where
    F: Fn(&mut rng::StreamRng) -> Result<f64> + Sync,
{
    cfg.validate()?;
    let per_rep = (0..cfg.outer_reps)
        .into_par_iter()
        .map(|i| replicate(&mut rng::stream(cfg.seed, i as u64)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(EntropyEstimate::from_replicates(per_rep, *cfg))
}

/// Nested Monte Carlo estimate of the conditional entropy.
pub fn nested_mc_entropy<M: ConjugateModel>(spec: &M, cfg: &McConfig) -> Result<EntropyEstimate> {
    run_replicates(cfg, |rng| {
        let (_, mut draws) = posterior_draws(spec, cfg, rng)?;
        if cfg.jitter_scale > 0.0 {
            for d in &mut draws {
                *d += cfg.jitter_scale * (2.0 * rng.random::<f64>() - 1.0);
            }
        }
        knn_entropy(&draws, 1, cfg.knn_k)
    })
}

/// Monte Carlo estimate of E_X[KL(posterior ‖ prior)], averaging the log
/// density ratio over posterior draws in each replicate.
pub fn mc_mutual_information<M: ConjugateModel>(
    spec: &M,
    cfg: &McConfig,
) -> Result<EntropyEstimate> {
    run_replicates(cfg, |rng| {
        let (post, draws) = posterior_draws(spec, cfg, rng)?;
        let total: f64 = draws
            .iter()
            .map(|t| post.ln_prior_density(*t) - spec.ln_prior_density(*t))
            .sum();
        Ok(total / draws.len() as f64)
    })
}

/// Prior entropy minus the estimated expected KL divergence.
pub fn decomposed_mc_entropy<M: ConjugateModel>(
    spec: &M,
    cfg: &McConfig,
) -> Result<EntropyEstimate> {
    let h = spec.prior_entropy()?;
    let info = mc_mutual_information(spec, cfg)?;
    let per_rep = info.per_rep.iter().map(|v| h - v).collect();
    Ok(EntropyEstimate::from_replicates(per_rep, *cfg))
}

/// Which Monte Carlo route to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Nested,
    Decomposed,
}

pub fn estimate_family(
    spec: &FamilySpec,
    estimator: Estimator,
    cfg: &McConfig,
) -> Result<EntropyEstimate> {
    match (spec, estimator) {
        (FamilySpec::NormalNormal(s), Estimator::Nested) => nested_mc_entropy(s, cfg),
        (FamilySpec::BetaBernoulli(s), Estimator::Nested) => nested_mc_entropy(s, cfg),
        (FamilySpec::GammaPoisson(s), Estimator::Nested) => nested_mc_entropy(s, cfg),
        (FamilySpec::NormalNormal(s), Estimator::Decomposed) => decomposed_mc_entropy(s, cfg),
        (FamilySpec::BetaBernoulli(s), Estimator::Decomposed) => decomposed_mc_entropy(s, cfg),
        (FamilySpec::GammaPoisson(s), Estimator::Decomposed) => decomposed_mc_entropy(s, cfg),
    }
}
