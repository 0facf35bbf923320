//! Exact prior disclosure games on a finite parameter set and finite sample
//! space.
//!
//! The player reports a prior for each observation; the loss is the negative
//! score that the posterior built from the report assigns to the true
//! parameter. Everything here is computed by exact summation.

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::{nelder_mead, OptResult, OptStatus, SearchBox, TracePoint};
use crate::rng;
use crate::scores::{divergence, entropy, score, DiscreteDist, ScoreKind, MASS_TOLERANCE};

/// Margin below which a truth-telling comparison counts as a violation.
pub const TRUTH_TELLING_SLACK: f64 = 1e-12;

/// Finite experiment: a row-stochastic likelihood with one row per parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGame")]
pub struct DiscreteGame {
    omega: Vec<String>,
    likelihood: Vec<Vec<f64>>,
    score: ScoreKind,
}

#[derive(Deserialize)]
struct RawGame {
    omega: Vec<String>,
    likelihood: Vec<Vec<f64>>,
    score: ScoreKind,
}

impl TryFrom<RawGame> for DiscreteGame {
    type Error = Error;
    fn try_from(raw: RawGame) -> Result<Self> {
        DiscreteGame::new(raw.omega, raw.likelihood, raw.score)
    }
}

impl DiscreteGame {
    pub fn new(omega: Vec<String>, likelihood: Vec<Vec<f64>>, score: ScoreKind) -> Result<Self> {
        let k = likelihood.len();
        if k < 2 {
            return Err(Error::InvalidGame(format!(
                "need at least 2 parameter values, got {k}"
            )));
        }
        if omega.len() != k {
            return Err(Error::InvalidGame(format!(
                "{} labels for {k} likelihood rows",
                omega.len()
            )));
        }
        let m = likelihood[0].len();
        if m == 0 {
            return Err(Error::InvalidGame("likelihood rows are empty".into()));
        }
        for (theta, row) in likelihood.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidGame(format!(
                    "row {theta} has {} entries, expected {m}",
                    row.len()
                )));
            }
            if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                return Err(Error::InvalidGame(format!(
                    "row {theta} has a negative or non-finite entry"
                )));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > MASS_TOLERANCE {
                return Err(Error::InvalidGame(format!("row {theta} sums to {total}")));
            }
        }
        Ok(Self {
            omega,
            likelihood,
            score,
        })
    }

    /// Labels the parameters `t0, t1, ...`.
    pub fn from_matrix(likelihood: Vec<Vec<f64>>, score: ScoreKind) -> Result<Self> {
        let omega = (0..likelihood.len()).map(|i| format!("t{i}")).collect();
        Self::new(omega, likelihood, score)
    }

    /// Binary symmetric channel with crossover probability `flip`.
    pub fn symmetric_channel(flip: f64, score: ScoreKind) -> Result<Self> {
        Self::from_matrix(vec![vec![1.0 - flip, flip], vec![flip, 1.0 - flip]], score)
    }

    pub fn with_score(&self, score: ScoreKind) -> Self {
        Self {
            score,
            ..self.clone()
        }
    }

    pub fn num_params(&self) -> usize {
        self.likelihood.len()
    }

    pub fn num_outcomes(&self) -> usize {
        self.likelihood[0].len()
    }

    pub fn omega(&self) -> &[String] {
        &self.omega
    }

    pub fn likelihood(&self) -> &[Vec<f64>] {
        &self.likelihood
    }

    pub fn score(&self) -> ScoreKind {
        self.score
    }

    fn check_prior(&self, prior: &DiscreteDist) -> Result<()> {
        if prior.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                expected: self.num_params(),
                actual: prior.len(),
            });
        }
        Ok(())
    }

    fn check_outcome(&self, x: usize) -> Result<()> {
        if x >= self.num_outcomes() {
            return Err(Error::IndexOutOfRange {
                index: x,
                size: self.num_outcomes(),
            });
        }
        Ok(())
    }

    fn check_param(&self, theta: usize) -> Result<()> {
        if theta >= self.num_params() {
            return Err(Error::IndexOutOfRange {
                index: theta,
                size: self.num_params(),
            });
        }
        Ok(())
    }

    /// Posterior over parameters after observing `x`.
    pub fn posterior(&self, prior: &DiscreteDist, x: usize) -> Result<DiscreteDist> {
        self.check_prior(prior)?;
        self.check_outcome(x)?;
        let joint: Vec<f64> = self
            .likelihood
            .iter()
            .zip(prior.weights())
            .map(|(row, w)| w * row[x])
            .collect();
        let mass: f64 = joint.iter().sum();
        if mass <= 0.0 {
            return Err(Error::ZeroMarginal { x });
        }
        DiscreteDist::new(joint.into_iter().map(|j| j / mass).collect())
    }

    /// Prior predictive distribution of the observation.
    pub fn marginal(&self, prior: &DiscreteDist) -> Result<DiscreteDist> {
        self.check_prior(prior)?;
        let mut m = vec![0.0; self.num_outcomes()];
        for (row, w) in self.likelihood.iter().zip(prior.weights()) {
            for (mx, p) in m.iter_mut().zip(row) {
                *mx += w * p;
            }
        }
        DiscreteDist::normalized(m)
    }

    /// Loss of reporting `report` at `x` when the parameter is `theta`;
    /// `+inf` when the report makes `x` impossible.
    pub fn loss(&self, theta: usize, x: usize, report: &DiscreteDist) -> Result<f64> {
        self.check_param(theta)?;
        match self.posterior(report, x) {
            Ok(post) => Ok(-score(self.score, &post, theta)?),
            Err(Error::ZeroMarginal { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    }

    fn check_rule(&self, rule: &Rule) -> Result<()> {
        if rule.reports.len() != self.num_outcomes() {
            return Err(Error::DimensionMismatch {
                expected: self.num_outcomes(),
                actual: rule.reports.len(),
            });
        }
        rule.reports.iter().try_for_each(|r| self.check_prior(r))
    }

    /// Expected loss of `rule` under the sampling distribution at `theta`.
    pub fn frequentist_risk(&self, rule: &Rule, theta: usize) -> Result<f64> {
        self.check_rule(rule)?;
        self.check_param(theta)?;
        let mut risk = 0.0;
        for (x, p) in self.likelihood[theta].iter().enumerate() {
            if *p > 0.0 {
                risk += p * self.loss(theta, x, &rule.reports[x])?;
            }
        }
        Ok(risk)
    }

    pub fn bayes_risk(&self, rule: &Rule, prior: &DiscreteDist) -> Result<f64> {
        self.check_prior(prior)?;
        let mut total = 0.0;
        for (theta, w) in prior.weights().iter().enumerate() {
            if *w > 0.0 {
                total += w * self.frequentist_risk(rule, theta)?;
            }
        }
        Ok(total)
    }

    /// Posteriors for every observation with positive marginal mass.
    fn observed_posteriors(&self, prior: &DiscreteDist) -> Result<Vec<(usize, f64, DiscreteDist)>> {
        let m = self.marginal(prior)?;
        let mut out = Vec::with_capacity(m.len());
        for (x, mx) in m.weights().iter().enumerate() {
            if *mx > 0.0 {
                out.push((x, *mx, self.posterior(prior, x)?));
            }
        }
        Ok(out)
    }

    /// r_S(prior): marginal-weighted generalized entropy of the posterior.
    /// Observations with zero marginal mass are skipped.
    pub fn min_bayes_risk(&self, prior: &DiscreteDist) -> Result<f64> {
        Ok(self
            .observed_posteriors(prior)?
            .iter()
            .map(|(_, mx, post)| mx * entropy(self.score, post))
            .sum())
    }

    /// Prior entropy, expected divergence of posterior from prior, and the
    /// minimum Bayes risk (computed directly, not as the difference).
    pub fn decomposition(&self, prior: &DiscreteDist) -> Result<Decomposition> {
        let h = entropy(self.score, prior);
        let mut information = 0.0;
        let mut risk = 0.0;
        for (_, mx, post) in self.observed_posteriors(prior)? {
            information += mx * divergence(self.score, &post, prior)?;
            risk += mx * entropy(self.score, &post);
        }
        Ok(Decomposition {
            prior_entropy: h,
            information,
            min_bayes_risk: risk,
        })
    }

    pub fn risk_profile(&self, rule: &Rule, prior: &DiscreteDist) -> Result<RiskProfile> {
        let per_theta = (0..self.num_params())
            .map(|theta| self.frequentist_risk(rule, theta))
            .collect::<Result<Vec<_>>>()?;
        let sup = per_theta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let bayes = self.bayes_risk(rule, prior)?;
        Ok(RiskProfile {
            per_theta,
            sup,
            bayes,
        })
    }

    /// Whether the joint posterior map over observed outcomes determines a
    /// full-support report: parameters linked by sharing a positive-probability
    /// outcome must form a single connected component.
    pub fn posterior_map_injective(&self) -> bool {
        let k = self.num_params();
        let mut component: Vec<usize> = (0..k).collect();
        fn find(c: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while c[r] != r {
                r = c[r];
            }
            c[i] = r;
            r
        }
        for x in 0..self.num_outcomes() {
            let support: Vec<usize> = (0..k).filter(|t| self.likelihood[*t][x] > 0.0).collect();
            for pair in support.windows(2) {
                let (a, b) = (find(&mut component, pair[0]), find(&mut component, pair[1]));
                component[a] = b;
            }
        }
        let root = find(&mut component, 0);
        (1..k).all(|t| find(&mut component, t) == root)
    }

    /// Compares the truthful rule against `trials` random rules whose reports
    /// are drawn uniformly from the simplex, independently per outcome.
    pub fn verify_truth_telling(
        &self,
        prior: &DiscreteDist,
        trials: usize,
        seed: u64,
    ) -> Result<TruthTellingReport> {
        self.check_prior(prior)?;
        let truth = Rule::constant(prior, self.num_outcomes());
        let truth_risk = self.bayes_risk(&truth, prior)?;
        let observed = self.observed_posteriors(prior)?;

        let outcomes: Vec<Result<(f64, bool)>> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = rng::stream(seed, trial as u64);
                let reports = (0..self.num_outcomes())
                    .map(|_| uniform_simplex(&mut rng, self.num_params()))
                    .collect::<Result<Vec<_>>>()?;
                let alternative = Rule { reports };
                let margin = self.bayes_risk(&alternative, prior)? - truth_risk;
                let tie = observed.iter().all(|(x, _, post)| {
                    self.posterior(&alternative.reports[*x], *x)
                        .map(|alt| alt.sup_distance(post) <= TRUTH_TELLING_SLACK)
                        .unwrap_or(false)
                });
                Ok((margin, tie))
            })
            .collect();

        let mut report = TruthTellingReport {
            trials,
            truth_risk,
            violations: Vec::new(),
            ties: 0,
            min_margin: None,
            injective: self.posterior_map_injective(),
        };
        for (trial, outcome) in outcomes.into_iter().enumerate() {
            let (margin, tie) = outcome?;
            if tie {
                report.ties += 1;
                continue;
            }
            report.min_margin = Some(report.min_margin.map_or(margin, |m: f64| m.min(margin)));
            if margin < -TRUTH_TELLING_SLACK {
                report.violations.push(Violation { trial, margin });
            }
        }
        Ok(report)
    }

    /// Least-favorability check for `prior`: the truthful rule's worst-case
    /// frequentist risk must not exceed r_S(prior) by more than `tol`.
    pub fn check_least_favorable(
        &self,
        prior: &DiscreteDist,
        tol: f64,
    ) -> Result<LeastFavorableReport> {
        let rule = Rule::constant(prior, self.num_outcomes());
        let profile = self.risk_profile(&rule, prior)?;
        let min_bayes_risk = self.min_bayes_risk(prior)?;
        let pass = profile.sup <= min_bayes_risk + tol;
        Ok(LeastFavorableReport {
            profile,
            min_bayes_risk,
            tol,
            pass,
        })
    }

    /// Maximizes r_S over the simplex with default settings and the given
    /// grid resolution and per-start refinement budget.
    pub fn find_bayesimax(&self, resolution: usize, refine_iters: usize) -> Result<OptResult> {
        self.find_bayesimax_with(&BayesimaxConfig {
            resolution,
            refine_iters,
            ..BayesimaxConfig::default()
        })
    }

    pub fn find_bayesimax_with(&self, cfg: &BayesimaxConfig) -> Result<OptResult> {
        let k = self.num_params();
        let objective = |w: &[f64]| -> Result<f64> {
            self.min_bayes_risk(&DiscreteDist::normalized(w.to_vec())?)
        };

        let mut evaluations = 0;
        let mut trace: Vec<TracePoint> = Vec::new();
        let push_trace =
            |evaluation: usize, params: Vec<f64>, value: f64, trace: &mut Vec<TracePoint>| {
                if trace.last().is_none_or(|t| value > t.value) {
                    trace.push(TracePoint {
                        evaluation,
                        params,
                        value,
                    });
                }
            };

        // Phase 1: simplex lattice, or the uniform prior when K is too large.
        let mut candidates: Vec<(Vec<f64>, f64)> = Vec::new();
        if k <= cfg.max_grid_params {
            let lattice = simplex_lattice(k, cfg.resolution.max(1));
            let values = lattice
                .par_iter()
                .map(|w| objective(w))
                .collect::<Result<Vec<_>>>()?;
            for (w, v) in lattice.into_iter().zip(values) {
                evaluations += 1;
                push_trace(evaluations, w.clone(), v, &mut trace);
                candidates.push((w, v));
            }
            // best first, lattice order on ties
            candidates.sort_by(|a, b| b.1.total_cmp(&a.1));
        } else {
            let u = vec![1.0 / k as f64; k];
            let v = objective(&u)?;
            evaluations += 1;
            push_trace(evaluations, u.clone(), v, &mut trace);
            candidates.push((u, v));
        }
        candidates.truncate(cfg.starts.max(1));

        // Phase 2: Nelder–Mead on softmax logits anchored at the last weight.
        let free = k - 1;
        let bx = SearchBox::cube(free, -LOGIT_BOUND, LOGIT_BOUND)?;
        let logit_objective = |z: &[f64]| objective(&softmax_anchored(z));
        let refined = candidates
            .par_iter()
            .map(|(w, _)| {
                let start = logits_anchored(w);
                nelder_mead(logit_objective, &bx, &start, cfg.refine_iters, cfg.tol)
            })
            .collect::<Result<Vec<_>>>()?;

        let mut best: Option<(usize, &OptResult)> = None;
        for (i, r) in refined.iter().enumerate() {
            if best.is_none_or(|(_, b)| r.value > b.value) {
                best = Some((i, r));
            }
        }
        let mut status = OptStatus::Converged;
        for r in &refined {
            for t in &r.trace {
                push_trace(
                    evaluations + t.evaluation,
                    softmax_anchored(&t.params),
                    t.value,
                    &mut trace,
                );
            }
            evaluations += r.evaluations;
        }
        let (_, best) = best.expect("at least one start");
        if best.status == OptStatus::MaxEvals {
            status = OptStatus::MaxEvals;
        }
        let argmax = softmax_anchored(&best.argmax);
        let value = objective(&argmax)?;
        if argmax.iter().any(|w| *w < 1e-12) {
            status = OptStatus::BoundaryHit;
        }
        // keep the trace consistent with the reported optimum
        if trace.last().is_none_or(|t| value >= t.value) {
            trace.push(TracePoint {
                evaluation: evaluations,
                params: argmax.clone(),
                value,
            });
        }
        Ok(OptResult {
            argmax,
            value,
            evaluations,
            trace,
            status,
        })
    }
}

const LOGIT_BOUND: f64 = 40.0;

/// Weights from K-1 logits; the last weight has logit 0.
pub fn softmax_anchored(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(0.0, f64::max);
    let mut w: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    w.push((-max).exp());
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

/// Inverse of [`softmax_anchored`], flooring weights so the logits stay finite.
pub fn logits_anchored(w: &[f64]) -> Vec<f64> {
    const FLOOR: f64 = 1e-6;
    let last = w[w.len() - 1].max(FLOOR);
    w[..w.len() - 1]
        .iter()
        .map(|v| {
            (v.max(FLOOR) / last)
                .ln()
                .clamp(-LOGIT_BOUND * 0.9, LOGIT_BOUND * 0.9)
        })
        .collect()
}

/// All points of the simplex with coordinates in multiples of `1/resolution`,
/// in lexicographic order of the integer compositions.
pub fn simplex_lattice(k: usize, resolution: usize) -> Vec<Vec<f64>> {
    fn fill(k: usize, remaining: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == k - 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for c in 0..=remaining {
            prefix.push(c);
            fill(k, remaining - c, prefix, out);
            prefix.pop();
        }
    }
    let mut comps = Vec::new();
    fill(k, resolution, &mut Vec::with_capacity(k), &mut comps);
    comps
        .into_iter()
        .map(|c| {
            c.into_iter()
                .map(|v| v as f64 / resolution as f64)
                .collect()
        })
        .collect()
}

fn uniform_simplex<R: Rng>(rng: &mut R, k: usize) -> Result<DiscreteDist> {
    let raw: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    DiscreteDist::normalized(raw)
}

/// Settings for [`DiscreteGame::find_bayesimax_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct BayesimaxConfig {
    /// Lattice spacing is `1/resolution` on each simplex coordinate.
    pub resolution: usize,
    /// Nelder–Mead evaluation budget per start.
    pub refine_iters: usize,
    /// Number of best lattice points refined.
    pub starts: usize,
    /// Above this many parameters the lattice phase is skipped.
    pub max_grid_params: usize,
    /// Simplex diameter tolerance in logit coordinates.
    pub tol: f64,
}

impl Default for BayesimaxConfig {
    fn default() -> Self {
        Self {
            resolution: 20,
            refine_iters: 4000,
            starts: 8,
            max_grid_params: 6,
            tol: 1e-10,
        }
    }
}

/// A decision rule: one reported prior per observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub reports: Vec<DiscreteDist>,
}

impl Rule {
    /// Reports `prior` whatever is observed.
    pub fn constant(prior: &DiscreteDist, outcomes: usize) -> Self {
        Self {
            reports: vec![prior.clone(); outcomes],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub prior_entropy: f64,
    pub information: f64,
    pub min_bayes_risk: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskProfile {
    pub per_theta: Vec<f64>,
    pub sup: f64,
    pub bayes: f64,
}

impl RiskProfile {
    /// `theta_index,risk` rows with LF endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta_index,risk\n");
        for (i, r) in self.per_theta.iter().enumerate() {
            out.push_str(&format!("{i},{r}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub trial: usize,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthTellingReport {
    pub trials: usize,
    pub truth_risk: f64,
    pub violations: Vec<Violation>,
    /// Alternatives whose posteriors coincide with the truthful ones on every
    /// observed outcome.
    pub ties: usize,
    /// Smallest excess risk among non-tied alternatives.
    pub min_margin: Option<f64>,
    pub injective: bool,
}

impl TruthTellingReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeastFavorableReport {
    pub profile: RiskProfile,
    pub min_bayes_risk: f64,
    pub tol: f64,
    pub pass: bool,
}
