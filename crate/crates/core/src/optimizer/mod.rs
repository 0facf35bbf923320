//! Derivative-free maximization over boxes: lattice search and a bounded
//! Nelder–Mead simplex, plus the entropy-maximization drivers built on them.

mod bayesimax;

pub use bayesimax::{
    conjugate_sequence, maximize_conditional_entropy, nearly_bayesimax_sequence, BayesimaxTarget,
    ConjugateTarget, Coordinate, EntropyObjective, GeometricPath, MethodConfig,
    NearlyBayesimaxSequence, SequencePoint, SequenceShape,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest lattice [`grid_search`] will evaluate.
pub const DEFAULT_GRID_CAP: usize = 1_000_000;

/// Axis-aligned search region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBox")]
pub struct SearchBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl TryFrom<RawBox> for SearchBox {
    type Error = Error;
    fn try_from(raw: RawBox) -> Result<Self> {
        SearchBox::new(raw.lower, raw.upper)
    }
}

impl SearchBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                actual: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::InvalidSpec("box has no dimensions".into()));
        }
        for (lo, hi) in lower.iter().zip(&upper) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidSpec(format!(
                    "box bounds [{lo}, {hi}] must be finite with lower < upper"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for ((v, lo), hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*lo, *hi);
        }
    }

    pub fn contains_strictly(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| lo < v && v < hi)
    }

    /// True when some coordinate lies within `tol` of a face.
    pub fn near_boundary(&self, x: &[f64], tol: f64) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .any(|(v, (lo, hi))| v - lo <= tol || hi - v <= tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptStatus {
    Converged,
    MaxEvals,
    BoundaryHit,
}

/// A best-so-far improvement, recorded at the evaluation where it happened.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub evaluation: usize,
    pub params: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub argmax: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub trace: Vec<TracePoint>,
    pub status: OptStatus,
}

/// NaN compares as the worst possible value.
fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Keeps the best point seen and the improvement trace.
struct Tracker {
    evaluations: usize,
    best: Option<(Vec<f64>, f64)>,
    trace: Vec<TracePoint>,
}

impl Tracker {
    fn new() -> Self {
        Self {
            evaluations: 0,
            best: None,
            trace: Vec::new(),
        }
    }

    fn record(&mut self, x: &[f64], value: f64) {
        self.evaluations += 1;
        let improves = match &self.best {
            None => true,
            Some((_, b)) => value > *b,
        };
        if improves {
            self.best = Some((x.to_vec(), value));
            self.trace.push(TracePoint {
                evaluation: self.evaluations,
                params: x.to_vec(),
                value,
            });
        }
    }
}

/// Evaluates the objective on a `resolution`-per-axis lattice (endpoints
/// included) and returns the best point; ties go to the lowest lattice index.
pub fn grid_search<F>(objective: F, bx: &SearchBox, resolution: usize) -> Result<OptResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    grid_search_capped(objective, bx, resolution, DEFAULT_GRID_CAP)
}

pub fn grid_search_capped<F>(
    objective: F,
    bx: &SearchBox,
    resolution: usize,
    cap: usize,
) -> Result<OptResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    if resolution < 2 {
        return Err(Error::InvalidSpec(
            "grid resolution must be at least 2".into(),
        ));
    }
    let dim = bx.dim();
    let points = (resolution as u128)
        .checked_pow(dim as u32)
        .unwrap_or(u128::MAX);
    if points > cap as u128 {
        return Err(Error::GridTooLarge { points, cap });
    }
    let total = points as usize;
    let lattice_point = |mut index: usize| -> Vec<f64> {
        let mut x = vec![0.0; dim];
        // last axis varies fastest
        for d in (0..dim).rev() {
            let step = index % resolution;
            index /= resolution;
            let t = step as f64 / (resolution - 1) as f64;
            x[d] = if step == resolution - 1 {
                bx.upper[d]
            } else {
                bx.lower[d] + t * (bx.upper[d] - bx.lower[d])
            };
        }
        x
    };

    let values: Vec<Result<f64>> = (0..total)
        .into_par_iter()
        .map(|i| objective(&lattice_point(i)).map(sanitize))
        .collect();

    let mut tracker = Tracker::new();
    for (i, v) in values.into_iter().enumerate() {
        tracker.record(&lattice_point(i), v?);
    }
    let (argmax, value) = tracker.best.take().expect("lattice is non-empty");
    let status = if bx.near_boundary(&argmax, 0.0) {
        OptStatus::BoundaryHit
    } else {
        OptStatus::Converged
    };
    Ok(OptResult {
        argmax,
        value,
        evaluations: tracker.evaluations,
        trace: tracker.trace,
        status,
    })
}

/// Nelder–Mead maximization inside `bx`.
///
/// Trial points are projected onto the box. Iteration stops when every vertex
/// is within `tol` (sup norm) of the best vertex or after `max_evals`
/// objective calls; a converged simplex is restarted around its best vertex
/// while that keeps improving and budget remains.
pub fn nelder_mead<F>(
    objective: F,
    bx: &SearchBox,
    init: &[f64],
    max_evals: usize,
    tol: f64,
) -> Result<OptResult>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if init.len() != bx.dim() {
        return Err(Error::DimensionMismatch {
            expected: bx.dim(),
            actual: init.len(),
        });
    }
    if !bx.contains_strictly(init) {
        return Err(Error::InvalidSpec(
            "Nelder-Mead start must lie strictly inside the box".into(),
        ));
    }

    let mut tracker = Tracker::new();
    let mut eval = |x: &[f64], tracker: &mut Tracker| -> Result<f64> {
        let v = sanitize(objective(x)?);
        tracker.record(x, v);
        Ok(v)
    };

    let mut start = init.to_vec();
    let mut converged;
    let mut restarts = 0;
    loop {
        let before = tracker.best.as_ref().map(|(_, v)| *v);
        converged = run_simplex(&mut eval, &mut tracker, bx, &start, max_evals, tol)?;
        let (best_x, best_v) = tracker.best.clone().expect("at least one evaluation");
        let improved = before.is_none_or(|b| best_v > b);
        if !converged || !improved || restarts >= 3 || tracker.evaluations >= max_evals {
            break;
        }
        restarts += 1;
        start = best_x;
    }

    let (argmax, _) = tracker.best.clone().expect("at least one evaluation");
    let value = sanitize(objective(&argmax)?);
    let status = if bx.near_boundary(&argmax, tol) {
        OptStatus::BoundaryHit
    } else if converged {
        OptStatus::Converged
    } else {
        OptStatus::MaxEvals
    };
    Ok(OptResult {
        argmax,
        value,
        evaluations: tracker.evaluations,
        trace: tracker.trace,
        status,
    })
}

/// One simplex run; returns whether the diameter criterion was met.
fn run_simplex<E>(
    eval: &mut E,
    tracker: &mut Tracker,
    bx: &SearchBox,
    start: &[f64],
    max_evals: usize,
    tol: f64,
) -> Result<bool>
where
    E: FnMut(&[f64], &mut Tracker) -> Result<f64>,
{
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let dim = start.len();
    // Vertices hold (point, value); values are maximized.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let v0 = eval(start, tracker)?;
    simplex.push((start.to_vec(), v0));
    for d in 0..dim {
        let width = bx.upper[d] - bx.lower[d];
        let mut x = start.to_vec();
        let step = 0.05 * width;
        x[d] = if x[d] + step <= bx.upper[d] {
            x[d] + step
        } else {
            x[d] - step
        };
        let v = eval(&x, tracker)?;
        simplex.push((x, v));
    }

    let point = |c: &[f64], w: &[f64], coef: f64| -> Vec<f64> {
        let mut x: Vec<f64> = c
            .iter()
            .zip(w)
            .map(|(ci, wi)| ci + coef * (ci - wi))
            .collect();
        bx.clamp(&mut x);
        x
    };

    loop {
        // best first; stable sort keeps earlier vertices ahead on ties
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let best = simplex[0].0.clone();
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&best).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if diameter < tol {
            return Ok(true);
        }
        if tracker.evaluations >= max_evals {
            return Ok(false);
        }

        let n = simplex.len();
        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..n - 1] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / (n - 1) as f64;
            }
        }
        let worst = simplex[n - 1].clone();
        let second_worst = simplex[n - 2].1;
        let best_value = simplex[0].1;

        let xr = point(&centroid, &worst.0, REFLECT);
        let vr = eval(&xr, tracker)?;
        if vr > best_value {
            let xe = point(&centroid, &worst.0, EXPAND);
            let ve = eval(&xe, tracker)?;
            simplex[n - 1] = if ve > vr { (xe, ve) } else { (xr, vr) };
            continue;
        }
        if vr > second_worst {
            simplex[n - 1] = (xr, vr);
            continue;
        }
        let (xc, vc) = if vr > worst.1 {
            let xc = point(&centroid, &xr, -CONTRACT);
            let vc = eval(&xc, tracker)?;
            (xc, vc)
        } else {
            let xc = point(&centroid, &worst.0, -CONTRACT);
            let vc = eval(&xc, tracker)?;
            (xc, vc)
        };
        if vc > vr.max(worst.1) {
            simplex[n - 1] = (xc, vc);
            continue;
        }
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = best
                .iter()
                .zip(&vertex.0)
                .map(|(b, v)| b + SHRINK * (v - b))
                .collect();
            let v = eval(&x, tracker)?;
            *vertex = (x, v);
        }
    }
}
