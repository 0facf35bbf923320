//! Maximizing r_S over conjugate hyperparameters or discrete priors, and
//! tracing nearly-Bayesimax sequences along an unbounded direction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{nelder_mead, OptResult, OptStatus, SearchBox, TracePoint, DEFAULT_GRID_CAP};
use crate::conjugate::FamilySpec;
use crate::error::{Error, Result};
use crate::game::{BayesimaxConfig, DiscreteGame};
use crate::mcent::{estimate_family, Estimator, McConfig};

/// A hyperparameter that a search varies on top of a base spec.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinate {
    Mu,
    Tau2,
    Alpha,
    Beta,
    /// Sets the rate (or second Beta shape) and rescales `alpha` so that the
    /// base ratio `alpha / beta` is kept.
    BetaFixedRatio,
}

impl Coordinate {
    /// Writes `value` into `spec`.
    pub fn apply(self, spec: &mut FamilySpec, value: f64, ratio: f64) -> Result<()> {
        let family = spec.name();
        match (self, &mut *spec) {
            (Coordinate::Mu, FamilySpec::NormalNormal(s)) => s.mu = value,
            (Coordinate::Tau2, FamilySpec::NormalNormal(s)) => s.tau2 = value,
            (Coordinate::Alpha, FamilySpec::BetaBernoulli(s)) => s.alpha = value,
            (Coordinate::Alpha, FamilySpec::GammaPoisson(s)) => s.alpha = value,
            (Coordinate::Beta, FamilySpec::BetaBernoulli(s)) => s.beta = value,
            (Coordinate::Beta, FamilySpec::GammaPoisson(s)) => s.beta = value,
            (Coordinate::BetaFixedRatio, FamilySpec::BetaBernoulli(s)) => {
                s.beta = value;
                s.alpha = ratio * value;
            }
            (Coordinate::BetaFixedRatio, FamilySpec::GammaPoisson(s)) => {
                s.beta = value;
                s.alpha = ratio * value;
            }
            _ => {
                return Err(Error::InvalidSpec(format!(
                    "coordinate {self:?} does not apply to family {family}"
                )))
            }
        }
        Ok(())
    }
}

fn base_ratio(spec: &FamilySpec) -> f64 {
    match spec {
        FamilySpec::BetaBernoulli(s) => s.alpha / s.beta,
        FamilySpec::GammaPoisson(s) => s.alpha / s.beta,
        FamilySpec::NormalNormal(_) => f64::NAN,
    }
}

/// Re-validates a spec after its fields were overwritten.
fn revalidate(spec: FamilySpec) -> Result<FamilySpec> {
    use crate::conjugate::{BetaBernoulliSpec, GammaPoissonSpec, NormalNormalSpec};
    Ok(match spec {
        FamilySpec::NormalNormal(s) => {
            FamilySpec::NormalNormal(NormalNormalSpec::new(s.mu, s.tau2, s.sigma2, s.n)?)
        }
        FamilySpec::BetaBernoulli(s) => {
            FamilySpec::BetaBernoulli(BetaBernoulliSpec::new(s.alpha, s.beta, s.n)?)
        }
        FamilySpec::GammaPoisson(s) => {
            FamilySpec::GammaPoisson(GammaPoissonSpec::new(s.alpha, s.beta, s.n)?)
        }
    })
}

/// A conjugate family with some hyperparameters free inside a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugateTarget {
    pub base: FamilySpec,
    pub coords: Vec<Coordinate>,
    pub bx: SearchBox,
}

impl ConjugateTarget {
    pub fn new(base: FamilySpec, coords: Vec<Coordinate>, bx: SearchBox) -> Result<Self> {
        if coords.len() != bx.dim() {
            return Err(Error::DimensionMismatch {
                expected: bx.dim(),
                actual: coords.len(),
            });
        }
        let target = Self { base, coords, bx };
        target.spec_at(target.bx.lower())?;
        Ok(target)
    }

    /// The family parameters with the free coordinates set to `x`.
    pub fn spec_at(&self, x: &[f64]) -> Result<FamilySpec> {
        if x.len() != self.coords.len() {
            return Err(Error::DimensionMismatch {
                expected: self.coords.len(),
                actual: x.len(),
            });
        }
        let ratio = base_ratio(&self.base);
        let mut spec = self.base;
        for (c, v) in self.coords.iter().zip(x) {
            c.apply(&mut spec, *v, ratio)?;
        }
        revalidate(spec)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BayesimaxTarget {
    Conjugate(ConjugateTarget),
    Discrete(DiscreteGame),
}

/// How r_S is evaluated for conjugate targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyObjective {
    Exact,
    /// The Monte Carlo estimate with the seed held fixed across evaluations,
    /// which turns it into a deterministic function of the hyperparameters.
    MonteCarlo {
        mc: McConfig,
        estimator: Estimator,
    },
}

impl EntropyObjective {
    pub fn evaluate(&self, spec: &FamilySpec) -> Result<f64> {
        match self {
            EntropyObjective::Exact => spec.conditional_entropy(),
            EntropyObjective::MonteCarlo { mc, estimator } => {
                Ok(estimate_family(spec, *estimator, mc)?.value)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodConfig {
    /// Lattice points per axis (conjugate) or inverse spacing (simplex).
    pub grid_resolution: usize,
    /// Best lattice points refined by Nelder–Mead.
    pub starts: usize,
    /// Nelder–Mead budget per start.
    pub max_evals: usize,
    pub tol: f64,
    pub objective: EntropyObjective,
}

impl Default for MethodConfig {
    fn default() -> Self {
        Self {
            grid_resolution: 21,
            starts: 4,
            max_evals: 2000,
            tol: 1e-8,
            objective: EntropyObjective::Exact,
        }
    }
}

/// Searches for a Bayesimax prior: a lattice pass, then Nelder–Mead from the
/// best lattice points. Starts run in parallel and the winner is chosen by
/// value, then by start index, so the result does not depend on threading.
pub fn maximize_conditional_entropy(
    target: &BayesimaxTarget,
    method: &MethodConfig,
) -> Result<OptResult> {
    if method.starts == 0 || method.max_evals == 0 || method.tol.is_nan() || method.tol <= 0.0 {
        return Err(Error::InvalidSpec(
            "starts and max_evals must be positive and tol > 0".into(),
        ));
    }
    match target {
        BayesimaxTarget::Discrete(game) => game.find_bayesimax_with(&BayesimaxConfig {
            resolution: method.grid_resolution,
            refine_iters: method.max_evals,
            starts: method.starts,
            tol: method.tol,
            ..BayesimaxConfig::default()
        }),
        BayesimaxTarget::Conjugate(t) => maximize_conjugate(t, method),
    }
}

fn maximize_conjugate(target: &ConjugateTarget, method: &MethodConfig) -> Result<OptResult> {
    let bx = &target.bx;
    let res = method.grid_resolution;
    let objective = |x: &[f64]| method.objective.evaluate(&target.spec_at(x)?);
    if res < 2 {
        return Err(Error::InvalidSpec(
            "grid resolution must be at least 2".into(),
        ));
    }
    let total = (res as u128)
        .checked_pow(bx.dim() as u32)
        .unwrap_or(u128::MAX);
    if total > DEFAULT_GRID_CAP as u128 {
        return Err(Error::GridTooLarge {
            points: total,
            cap: DEFAULT_GRID_CAP,
        });
    }
    let total = total as usize;
    let points: Vec<Vec<f64>> = (0..total).map(|i| lattice_point(bx, res, i)).collect();
    let values = points
        .par_iter()
        .map(|x| objective(x).map(|v| if v.is_nan() { f64::NEG_INFINITY } else { v }))
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..total).collect();
    // best first; the stable sort keeps lattice order on ties
    order.sort_by(|a, b| values[*b].total_cmp(&values[*a]));
    let mut trace: Vec<TracePoint> = Vec::new();
    for (i, (x, v)) in points.iter().zip(&values).enumerate() {
        if trace.last().is_none_or(|t| *v > t.value) {
            trace.push(TracePoint {
                evaluation: i + 1,
                params: x.clone(),
                value: *v,
            });
        }
    }
    let grid = OptResult {
        argmax: points[order[0]].clone(),
        value: values[order[0]],
        evaluations: total,
        trace,
        status: OptStatus::Converged,
    };
    let starts: Vec<Vec<f64>> = order
        .into_iter()
        .take(method.starts)
        .map(|i| interior(bx, &points[i]))
        .collect();

    let refined = starts
        .par_iter()
        .map(|s| nelder_mead(objective, bx, s, method.max_evals, method.tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(merge(grid, refined, bx, method.tol))
}

fn lattice_point(bx: &SearchBox, resolution: usize, mut index: usize) -> Vec<f64> {
    let dim = bx.dim();
    let mut x = vec![0.0; dim];
    for d in (0..dim).rev() {
        let step = index % resolution;
        index /= resolution;
        let (lo, hi) = (bx.lower()[d], bx.upper()[d]);
        x[d] = if step == resolution - 1 {
            hi
        } else {
            lo + step as f64 / (resolution - 1) as f64 * (hi - lo)
        };
    }
    x
}

/// Pulls lattice points off the faces so Nelder–Mead can start there.
fn interior(bx: &SearchBox, x: &[f64]) -> Vec<f64> {
    x.iter()
        .enumerate()
        .map(|(d, v)| {
            let (lo, hi) = (bx.lower()[d], bx.upper()[d]);
            let eps = 1e-6 * (hi - lo);
            v.clamp(lo + eps, hi - eps)
        })
        .collect()
}

fn merge(grid: OptResult, refined: Vec<OptResult>, bx: &SearchBox, tol: f64) -> OptResult {
    let mut evaluations = grid.evaluations;
    let mut trace = grid.trace;
    let mut best_value = grid.value;
    let mut best_argmax = grid.argmax;
    let mut best_status = grid.status;
    for r in refined {
        for t in r.trace {
            if trace.last().is_none_or(|last| t.value > last.value) {
                trace.push(TracePoint {
                    evaluation: evaluations + t.evaluation,
                    ..t
                });
            }
        }
        evaluations += r.evaluations;
        if r.value > best_value {
            best_value = r.value;
            best_argmax = r.argmax;
            best_status = r.status;
        }
    }
    let status = if bx.near_boundary(&best_argmax, tol) {
        OptStatus::BoundaryHit
    } else if best_status == OptStatus::BoundaryHit {
        OptStatus::Converged
    } else {
        best_status
    };
    if trace.last().is_none_or(|last| best_value > last.value) {
        trace.push(TracePoint {
            evaluation: evaluations,
            params: best_argmax.clone(),
            value: best_value,
        });
    }
    OptResult {
        argmax: best_argmax,
        value: best_value,
        evaluations,
        trace,
        status,
    }
}

/// Coordinate values `start · ratio^i` for `i = 0 .. steps - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricPath {
    pub start: f64,
    pub ratio: f64,
    pub steps: usize,
}

impl GeometricPath {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.start.is_finite()
            && self.start > 0.0
            && self.ratio.is_finite()
            && self.ratio > 1.0)
        {
            return Err(Error::InvalidSpec(
                "a geometric path needs start > 0 and ratio > 1".into(),
            ));
        }
        if self.steps < 2 {
            return Err(Error::InvalidSpec(
                "a sequence needs at least 2 steps".into(),
            ));
        }
        Ok((0..self.steps)
            .map(|i| self.start * self.ratio.powi(i as i32))
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceShape {
    StrictlyIncreasing,
    NonDecreasing,
    /// Every value equals the first within rounding; no progress is made.
    Constant,
    NotMonotone,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequencePoint {
    pub param: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearlyBayesimaxSequence {
    pub points: Vec<SequencePoint>,
    pub shape: SequenceShape,
}

impl NearlyBayesimaxSequence {
    pub fn is_non_decreasing(&self) -> bool {
        !matches!(self.shape, SequenceShape::NotMonotone)
    }
}

fn classify(values: &[f64]) -> SequenceShape {
    let slack = |a: f64, b: f64| 1e-12 * (1.0 + a.abs().max(b.abs()));
    let steps: Vec<(f64, f64)> = values
        .windows(2)
        .map(|w| (w[1] - w[0], slack(w[0], w[1])))
        .collect();
    if steps.iter().all(|(d, s)| d.abs() <= *s) {
        SequenceShape::Constant
    } else if steps.iter().all(|(d, s)| *d > *s) {
        SequenceShape::StrictlyIncreasing
    } else if steps.iter().all(|(d, s)| *d >= -*s) {
        SequenceShape::NonDecreasing
    } else {
        SequenceShape::NotMonotone
    }
}

/// Evaluates `objective` along `path` and classifies the resulting values.
pub fn nearly_bayesimax_sequence<F>(
    objective: F,
    path: &GeometricPath,
) -> Result<NearlyBayesimaxSequence>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let params = path.values()?;
    let values = params
        .par_iter()
        .map(|p| objective(*p))
        .collect::<Result<Vec<_>>>()?;
    if let Some(i) = values.iter().position(|v| v.is_nan()) {
        return Err(Error::Divergent(format!(
            "objective is NaN at {}",
            params[i]
        )));
    }
    let shape = classify(&values);
    Ok(NearlyBayesimaxSequence {
        points: params
            .into_iter()
            .zip(values)
            .map(|(param, value)| SequencePoint { param, value })
            .collect(),
        shape,
    })
}

/// A nearly-Bayesimax sequence for a conjugate family along one coordinate.
pub fn conjugate_sequence(
    base: &FamilySpec,
    coordinate: Coordinate,
    objective: &EntropyObjective,
    path: &GeometricPath,
) -> Result<NearlyBayesimaxSequence> {
    let ratio = base_ratio(base);
    nearly_bayesimax_sequence(
        |v| {
            let mut spec = *base;
            coordinate.apply(&mut spec, v, ratio)?;
            objective.evaluate(&revalidate(spec)?)
        },
        path,
    )
}
