//! Configuration ingestion, dispatch and result documents for the
//! `bayesimax` binary.
//!
//! A run is described by one JSON object. Parsing is strict: unknown keys are
//! rejected with their position, and out-of-domain values are reported with
//! the dotted path of the offending field.

use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::asymptotics::{
    asymptotic_conditional_entropy, FisherModel, PriorSpec, DEFAULT_QUAD_POINTS,
};
use crate::conjugate::{
    gp_conditional_entropy, BetaBernoulliSpec, FamilySpec, GammaPoissonSpec, NormalNormalSpec,
    DEFAULT_TAIL_TOL,
};
use crate::error::Error;
use crate::game::{BayesimaxConfig, DiscreteGame, Rule};
use crate::mcent::{estimate_family, EntropyEstimate, Estimator, McConfig};
use crate::optimizer::{
    conjugate_sequence, maximize_conditional_entropy, BayesimaxTarget, ConjugateTarget, Coordinate,
    EntropyObjective, GeometricPath, MethodConfig, NearlyBayesimaxSequence, OptResult, SearchBox,
};
use crate::scores::{DiscreteDist, ScoreKind};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid value for {field}: {message}")]
    Validation { field: String, message: String },

    #[error("numerical failure: {0}")]
    Numerical(Error),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// 1 for bad input, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }

    /// Machine-readable error document.
    pub fn to_json(&self) -> Value {
        let mut body = Map::new();
        let kind = match self {
            CliError::Parse { line, column, .. } => {
                body.insert("line".into(), json!(line));
                body.insert("column".into(), json!(column));
                "parse"
            }
            CliError::Validation { field, .. } => {
                body.insert("field".into(), json!(field));
                "validation"
            }
            CliError::Numerical(_) => "numerical",
            CliError::Io(_) => "io",
        };
        body.insert("kind".into(), json!(kind));
        body.insert("message".into(), json!(self.to_string()));
        json!({ "error": body, "exit_code": self.exit_code() })
    }
}

/// Library errors raised after validation: bad combinations are still input
/// problems, everything else is numerical.
impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidSpec(_)
            | Error::InvalidGame(_)
            | Error::InvalidDistribution(_)
            | Error::DimensionMismatch { .. }
            | Error::IndexOutOfRange { .. }
            | Error::GridTooLarge { .. } => CliError::invalid("config", e.to_string()),
            _ => CliError::Numerical(e),
        }
    }
}

fn at(field: &str) -> impl Fn(Error) -> CliError + '_ {
    move |e| CliError::invalid(field, e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Entropy,
    Optimize,
    Game,
    Asymptotic,
    Sequence,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Entropy => "entropy",
            Command::Optimize => "optimize",
            Command::Game => "game",
            Command::Asymptotic => "asymptotic",
            Command::Sequence => "sequence",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    NormalNormal,
    BetaBernoulli,
    GammaPoisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameAction {
    CheckTruthTelling,
    Evaluate,
    FindBayesimax,
    CheckLeastFavorable,
    RiskProfile,
}

/// How a conditional entropy is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorChoice {
    Exact,
    Nested,
    Decomposed,
}

// Raw, strictly parsed shape of the config file.

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Command,
    family: Option<FamilyName>,
    prior: Option<Value>,
    model: Option<RawModel>,
    n: Option<u64>,
    mc: Option<McConfig>,
    estimator: Option<EstimatorChoice>,
    method: Option<RawMethod>,
    #[serde(rename = "box")]
    bx: Option<RawBox>,
    coords: Option<Vec<Coordinate>>,
    game: Option<RawGame>,
    omega: Option<Vec<String>>,
    likelihood: Option<Vec<Vec<f64>>>,
    score: Option<ScoreKind>,
    action: Option<GameAction>,
    trials: Option<usize>,
    tol: Option<f64>,
    resolution: Option<usize>,
    refine_iters: Option<usize>,
    sequence: Option<RawSequence>,
    seed: Option<u64>,
    output_path: Option<PathBuf>,
    csv_path: Option<PathBuf>,
    emit_per_rep: Option<bool>,
    quad_points: Option<usize>,
    tail_tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    sigma2: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMethod {
    grid_resolution: Option<usize>,
    starts: Option<usize>,
    max_evals: Option<usize>,
    tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGame {
    omega: Option<Vec<String>>,
    likelihood: Vec<Vec<f64>>,
    score: Option<ScoreKind>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSequence {
    coordinate: Coordinate,
    start: f64,
    ratio: f64,
    steps: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHyper {
    mu: Option<f64>,
    tau2: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiscretePrior {
    support: Vec<f64>,
    weights: Vec<f64>,
}

/// A validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub task: Task,
    pub seed: Option<u64>,
    pub output_path: Option<PathBuf>,
    pub csv_path: Option<PathBuf>,
    pub emit_per_rep: bool,
    /// The config as written, echoed into the result document.
    pub inputs: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Entropy {
        spec: FamilySpec,
        estimator: EstimatorChoice,
        mc: McConfig,
        tail_tol: f64,
    },
    Optimize {
        target: BayesimaxTarget,
        method: MethodConfig,
    },
    Game {
        game: DiscreteGame,
        prior: Option<DiscreteDist>,
        action: GameAction,
        trials: usize,
        tol: f64,
        bayesimax: BayesimaxConfig,
    },
    Asymptotic {
        prior: PriorSpec,
        model: FisherModel,
        n: u64,
        quad_points: usize,
    },
    Sequence {
        base: FamilySpec,
        coordinate: Coordinate,
        path: GeometricPath,
        objective: EntropyObjective,
    },
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_path: Option<PathBuf>,
    pub csv_path: Option<PathBuf>,
    pub emit_per_rep: bool,
    pub check_truth_telling: bool,
}

fn parse_error(e: serde_json::Error) -> CliError {
    CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn positive(field: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::invalid(
            field,
            format!("must be finite and > 0, got {v}"),
        ))
    }
}

fn required<T>(field: &str, v: Option<T>) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::invalid(field, "is required"))
}

/// Strict parse and validation of a config document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let inputs: Value = serde_json::from_str(text).map_err(parse_error)?;
    let raw: RawConfig = serde_json::from_str(text).map_err(parse_error)?;
    let command = raw.command;

    let task = match command {
        Command::Entropy => {
            let spec = family_spec(&raw, None)?;
            let mc = mc_config(&raw)?;
            let estimator = raw.estimator.unwrap_or(if raw.mc.is_some() {
                EstimatorChoice::Nested
            } else {
                EstimatorChoice::Exact
            });
            let tail_tol = positive("tail_tol", raw.tail_tol.unwrap_or(DEFAULT_TAIL_TOL))?;
            Task::Entropy {
                spec,
                estimator,
                mc,
                tail_tol,
            }
        }
        Command::Optimize => {
            let method = method_config(&raw)?;
            let target = if raw.family.is_some() {
                let bx = search_box(&raw)?;
                let coords = required("coords", raw.coords.clone())?;
                if coords.len() != bx.dim() {
                    return Err(CliError::invalid(
                        "coords",
                        format!(
                            "{} coordinates for a {}-dimensional box",
                            coords.len(),
                            bx.dim()
                        ),
                    ));
                }
                let base = family_spec(&raw, Some((&coords, &bx)))?;
                BayesimaxTarget::Conjugate(
                    ConjugateTarget::new(base, coords, bx).map_err(at("coords"))?,
                )
            } else {
                BayesimaxTarget::Discrete(discrete_game(&raw)?)
            };
            Task::Optimize { target, method }
        }
        Command::Game => {
            let game = discrete_game(&raw)?;
            let prior = match &raw.prior {
                None => None,
                Some(v) => {
                    let p: DiscreteDist = serde_json::from_value(v.clone())
                        .map_err(|e| CliError::invalid("prior", e.to_string()))?;
                    if p.len() != game.num_params() {
                        return Err(CliError::invalid(
                            "prior",
                            format!(
                                "{} weights for {} parameter values",
                                p.len(),
                                game.num_params()
                            ),
                        ));
                    }
                    Some(p)
                }
            };
            let action = required("action", raw.action)?;
            if action != GameAction::FindBayesimax && prior.is_none() {
                return Err(CliError::invalid("prior", "is required for this action"));
            }
            let tol = positive("tol", raw.tol.unwrap_or(1e-6))?;
            let mut bayesimax = BayesimaxConfig::default();
            if let Some(r) = raw.resolution {
                if r == 0 {
                    return Err(CliError::invalid("resolution", "must be at least 1"));
                }
                bayesimax.resolution = r;
            }
            if let Some(r) = raw.refine_iters {
                bayesimax.refine_iters = r;
            }
            Task::Game {
                game,
                prior,
                action,
                trials: raw.trials.unwrap_or(1000),
                tol,
                bayesimax,
            }
        }
        Command::Asymptotic => {
            let family = required("family", raw.family)?;
            let model = match family {
                FamilyName::NormalNormal => FisherModel::NormalKnownVar {
                    sigma2: positive(
                        "model.sigma2",
                        required("model", raw.model.as_ref())?.sigma2,
                    )?,
                },
                FamilyName::BetaBernoulli => FisherModel::Bernoulli,
                FamilyName::GammaPoisson => FisherModel::Poisson,
            };
            let prior_value = required("prior", raw.prior.as_ref())?;
            let prior = if prior_value.get("support").is_some() {
                let d: RawDiscretePrior = serde_json::from_value(prior_value.clone())
                    .map_err(|e| CliError::invalid("prior", e.to_string()))?;
                PriorSpec::Discrete {
                    support: d.support,
                    weights: d.weights,
                }
            } else {
                match family_spec(&raw, None)? {
                    FamilySpec::NormalNormal(s) => PriorSpec::Normal {
                        mu: s.mu,
                        tau2: s.tau2,
                    },
                    FamilySpec::BetaBernoulli(s) => PriorSpec::Beta {
                        alpha: s.alpha,
                        beta: s.beta,
                    },
                    FamilySpec::GammaPoisson(s) => PriorSpec::Gamma {
                        alpha: s.alpha,
                        beta: s.beta,
                    },
                }
            };
            let n = required("n", raw.n)?;
            if n == 0 {
                return Err(CliError::invalid("n", "must be at least 1"));
            }
            let quad_points = raw.quad_points.unwrap_or(DEFAULT_QUAD_POINTS);
            if quad_points < 2 {
                return Err(CliError::invalid("quad_points", "must be at least 2"));
            }
            Task::Asymptotic {
                prior,
                model,
                n,
                quad_points,
            }
        }
        Command::Sequence => {
            let seq = required("sequence", raw.sequence.as_ref())?;
            let path = GeometricPath {
                start: seq.start,
                ratio: seq.ratio,
                steps: seq.steps,
            };
            path.values().map_err(at("sequence"))?;
            let base = family_spec(&raw, None)?;
            let mut probe = base;
            seq.coordinate
                .apply(&mut probe, seq.start, f64::NAN)
                .map_err(at("sequence.coordinate"))?;
            Task::Sequence {
                base,
                coordinate: seq.coordinate,
                path,
                objective: entropy_objective(&raw)?,
            }
        }
    };

    Ok(RunConfig {
        command,
        task,
        seed: raw.seed.or(raw.mc.map(|m| m.seed)),
        output_path: raw.output_path,
        csv_path: raw.csv_path,
        emit_per_rep: raw.emit_per_rep.unwrap_or(false),
        inputs,
    })
}

fn mc_config(raw: &RawConfig) -> Result<McConfig, CliError> {
    let mut mc = raw.mc.unwrap_or_default();
    if let Some(seed) = raw.seed {
        mc.seed = seed;
    }
    if mc.knn_k == 0 || mc.knn_k >= mc.inner_draws {
        return Err(CliError::invalid(
            "mc.k",
            format!(
                "need 1 <= k < J, got k = {}, J = {}",
                mc.knn_k, mc.inner_draws
            ),
        ));
    }
    if mc.outer_reps < 2 {
        return Err(CliError::invalid(
            "mc.I",
            format!("need I >= 2, got {}", mc.outer_reps),
        ));
    }
    mc.validate().map_err(at("mc"))?;
    Ok(mc)
}

fn entropy_objective(raw: &RawConfig) -> Result<EntropyObjective, CliError> {
    Ok(match raw.estimator.unwrap_or(EstimatorChoice::Exact) {
        EstimatorChoice::Exact => EntropyObjective::Exact,
        EstimatorChoice::Nested => EntropyObjective::MonteCarlo {
            mc: mc_config(raw)?,
            estimator: Estimator::Nested,
        },
        EstimatorChoice::Decomposed => EntropyObjective::MonteCarlo {
            mc: mc_config(raw)?,
            estimator: Estimator::Decomposed,
        },
    })
}

fn method_config(raw: &RawConfig) -> Result<MethodConfig, CliError> {
    let mut m = MethodConfig {
        objective: entropy_objective(raw)?,
        ..MethodConfig::default()
    };
    if let Some(r) = &raw.method {
        if let Some(g) = r.grid_resolution {
            if g < 2 {
                return Err(CliError::invalid(
                    "method.grid_resolution",
                    "must be at least 2",
                ));
            }
            m.grid_resolution = g;
        }
        if let Some(s) = r.starts {
            if s == 0 {
                return Err(CliError::invalid("method.starts", "must be at least 1"));
            }
            m.starts = s;
        }
        if let Some(e) = r.max_evals {
            if e == 0 {
                return Err(CliError::invalid("method.max_evals", "must be at least 1"));
            }
            m.max_evals = e;
        }
        if let Some(t) = r.tol {
            m.tol = positive("method.tol", t)?;
        }
    }
    Ok(m)
}

fn search_box(raw: &RawConfig) -> Result<SearchBox, CliError> {
    let b = required("box", raw.bx.as_ref())?;
    SearchBox::new(b.lower.clone(), b.upper.clone()).map_err(at("box"))
}

fn discrete_game(raw: &RawConfig) -> Result<DiscreteGame, CliError> {
    let (omega, likelihood, score) = match &raw.game {
        Some(g) => (g.omega.clone(), g.likelihood.clone(), g.score),
        None => (
            raw.omega.clone(),
            required("likelihood", raw.likelihood.clone())?,
            raw.score,
        ),
    };
    let omega = omega.unwrap_or_else(|| (0..likelihood.len()).map(|i| format!("t{i}")).collect());
    DiscreteGame::new(omega, likelihood, score.unwrap_or(ScoreKind::Logarithmic))
        .map_err(at("likelihood"))
}

/// Builds the family spec from `family`, `prior`, `model` and `n`. Fields
/// that an optimizer coordinate overwrites may be omitted.
fn family_spec(
    raw: &RawConfig,
    free: Option<(&[Coordinate], &SearchBox)>,
) -> Result<FamilySpec, CliError> {
    let family = required("family", raw.family)?;
    let hyper: RawHyper = match &raw.prior {
        Some(v) => serde_json::from_value(v.clone())
            .map_err(|e| CliError::invalid("prior", e.to_string()))?,
        None if free.is_some() => RawHyper::default(),
        None => return Err(CliError::invalid("prior", "is required")),
    };
    let fill = |c: Coordinate, v: Option<f64>| -> Option<f64> {
        v.or_else(|| {
            let (coords, bx) = free?;
            let d = coords.iter().position(|x| *x == c)?;
            Some(0.5 * (bx.lower()[d] + bx.upper()[d]))
        })
    };
    let n = raw.n.unwrap_or(0);
    let spec = match family {
        FamilyName::NormalNormal => {
            let mu = fill(Coordinate::Mu, hyper.mu).unwrap_or(0.0);
            if !mu.is_finite() {
                return Err(CliError::invalid("prior.mu", "must be finite"));
            }
            let tau2 = positive(
                "prior.tau2",
                required("prior.tau2", fill(Coordinate::Tau2, hyper.tau2))?,
            )?;
            let sigma2 = positive("model.sigma2", raw.model.as_ref().map_or(1.0, |m| m.sigma2))?;
            if hyper.alpha.is_some() || hyper.beta.is_some() {
                return Err(CliError::invalid(
                    "prior",
                    "normal_normal takes mu and tau2",
                ));
            }
            FamilySpec::NormalNormal(
                NormalNormalSpec::new(mu, tau2, sigma2, n).map_err(at("prior"))?,
            )
        }
        FamilyName::BetaBernoulli | FamilyName::GammaPoisson => {
            if hyper.mu.is_some() || hyper.tau2.is_some() {
                return Err(CliError::invalid("prior", "expects alpha and beta"));
            }
            if raw.model.is_some() {
                return Err(CliError::invalid(
                    "model",
                    "only normal_normal has model parameters",
                ));
            }
            let alpha = positive(
                "prior.alpha",
                required("prior.alpha", fill(Coordinate::Alpha, hyper.alpha))?,
            )?;
            let beta = positive(
                "prior.beta",
                required(
                    "prior.beta",
                    fill(Coordinate::Beta, hyper.beta).or(fill(Coordinate::BetaFixedRatio, None)),
                )?,
            )?;
            if family == FamilyName::BetaBernoulli {
                FamilySpec::BetaBernoulli(
                    BetaBernoulliSpec::new(alpha, beta, n).map_err(at("prior"))?,
                )
            } else {
                FamilySpec::GammaPoisson(
                    GammaPoissonSpec::new(alpha, beta, n).map_err(at("prior"))?,
                )
            }
        }
    };
    Ok(spec)
}

impl RunConfig {
    /// Applies command-line values; a flag always wins over the file.
    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(seed) = o.seed {
            self.seed = Some(seed);
            match &mut self.task {
                Task::Entropy { mc, .. } => mc.seed = seed,
                Task::Optimize { method, .. } => {
                    if let EntropyObjective::MonteCarlo { mc, .. } = &mut method.objective {
                        mc.seed = seed;
                    }
                }
                Task::Sequence { objective, .. } => {
                    if let EntropyObjective::MonteCarlo { mc, .. } = objective {
                        mc.seed = seed;
                    }
                }
                Task::Game { .. } | Task::Asymptotic { .. } => {}
            }
        }
        if o.output_path.is_some() {
            self.output_path = o.output_path.clone();
        }
        if o.csv_path.is_some() {
            self.csv_path = o.csv_path.clone();
        }
        self.emit_per_rep |= o.emit_per_rep;
        if o.check_truth_telling {
            match &mut self.task {
                Task::Game { action, prior, .. } => {
                    if prior.is_none() {
                        return Err(CliError::invalid(
                            "prior",
                            "is required for check_truth_telling",
                        ));
                    }
                    *action = GameAction::CheckTruthTelling;
                }
                _ => {
                    return Err(CliError::invalid(
                        "check_truth_telling",
                        "only applies to the game command",
                    ))
                }
            }
        }
        Ok(())
    }
}

/// Output of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDoc {
    pub schema_version: String,
    pub command: Command,
    pub inputs: Value,
    pub outputs: Value,
    pub wall_time_ms: u64,
    pub seed: Option<u64>,
    /// CSV export (risk profile or optimizer trace), when one applies.
    #[serde(skip)]
    pub csv: Option<String>,
}

impl ResultDoc {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result documents serialize");
        s.push('\n');
        s
    }
}

/// Finite numbers as JSON numbers, infinities as "inf"/"-inf", NaN refused.
fn num(v: f64) -> Result<Value, CliError> {
    if v.is_nan() {
        Err(CliError::Numerical(Error::Divergent(
            "result is NaN".into(),
        )))
    } else if v == f64::INFINITY {
        Ok(json!("inf"))
    } else if v == f64::NEG_INFINITY {
        Ok(json!("-inf"))
    } else {
        Ok(json!(v))
    }
}

fn nums(v: &[f64]) -> Result<Value, CliError> {
    Ok(Value::Array(
        v.iter().map(|x| num(*x)).collect::<Result<_, _>>()?,
    ))
}

fn estimate_json(e: &EntropyEstimate, emit_per_rep: bool) -> Result<Value, CliError> {
    let mut o = Map::new();
    o.insert("value".into(), num(e.value)?);
    o.insert("stderr".into(), num(e.stderr)?);
    o.insert(
        "mc".into(),
        json!({
            "I": e.config.outer_reps,
            "J": e.config.inner_draws,
            "k": e.config.knn_k,
            "seed": e.config.seed,
            "jitter_scale": num(e.config.jitter_scale)?,
        }),
    );
    if emit_per_rep {
        o.insert("per_rep".into(), nums(&e.per_rep)?);
    }
    Ok(Value::Object(o))
}

fn opt_json(r: &OptResult) -> Result<Value, CliError> {
    let trace = r
        .trace
        .iter()
        .map(|t| Ok(json!({ "evaluation": t.evaluation, "params": nums(&t.params)?, "value": num(t.value)? })))
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(json!({
        "argmax": nums(&r.argmax)?,
        "value": num(r.value)?,
        "evaluations": r.evaluations,
        "status": r.status,
        "trace": trace,
    }))
}

fn trace_csv(r: &OptResult) -> String {
    let dim = r.argmax.len();
    let mut out = String::from("evaluation");
    for d in 0..dim {
        out.push_str(&format!(",x{d}"));
    }
    out.push_str(",value\n");
    for t in &r.trace {
        out.push_str(&t.evaluation.to_string());
        for p in &t.params {
            out.push_str(&format!(",{p}"));
        }
        out.push_str(&format!(",{}\n", t.value));
    }
    out
}

fn profile_json(p: &crate::game::RiskProfile) -> Result<Value, CliError> {
    Ok(json!({ "per_theta": nums(&p.per_theta)?, "sup": num(p.sup)?, "bayes": num(p.bayes)? }))
}

fn sequence_json(s: &NearlyBayesimaxSequence) -> Result<Value, CliError> {
    let points = s
        .points
        .iter()
        .map(|p| Ok(json!({ "param": num(p.param)?, "value": num(p.value)? })))
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(json!({ "points": points, "shape": s.shape, "non_decreasing": s.is_non_decreasing() }))
}

/// Executes a validated config.
pub fn run(cfg: &RunConfig) -> Result<ResultDoc, CliError> {
    let started = Instant::now();
    let mut csv = None;
    let outputs = match &cfg.task {
        Task::Entropy {
            spec,
            estimator,
            mc,
            tail_tol,
        } => {
            let exact = match spec {
                FamilySpec::GammaPoisson(s) => gp_conditional_entropy(s, *tail_tol)?,
                _ => spec.conditional_entropy()?,
            };
            match estimator {
                EstimatorChoice::Exact => json!({ "method": "exact", "value": num(exact)? }),
                EstimatorChoice::Nested | EstimatorChoice::Decomposed => {
                    let est = if *estimator == EstimatorChoice::Nested {
                        Estimator::Nested
                    } else {
                        Estimator::Decomposed
                    };
                    let e = estimate_family(spec, est, mc)?;
                    let mut o = estimate_json(&e, cfg.emit_per_rep)?;
                    o["method"] = json!(estimator);
                    o["exact"] = num(exact)?;
                    o
                }
            }
        }
        Task::Optimize { target, method } => {
            let r = maximize_conditional_entropy(target, method)?;
            csv = Some(trace_csv(&r));
            let mut o = opt_json(&r)?;
            if let BayesimaxTarget::Conjugate(t) = target {
                o["spec"] = serde_json::to_value(t.spec_at(&r.argmax)?).expect("specs serialize");
            }
            o
        }
        Task::Game {
            game,
            prior,
            action,
            trials,
            tol,
            bayesimax,
        } => run_game(
            cfg,
            game,
            prior.as_ref(),
            *action,
            *trials,
            *tol,
            bayesimax,
            &mut csv,
        )?,
        Task::Asymptotic {
            prior,
            model,
            n,
            quad_points,
        } => {
            let a = asymptotic_conditional_entropy(prior, model, *n, *quad_points)?;
            json!({
                "value": num(a.value)?,
                "expected_log_root_fisher": num(a.expected_log_root_fisher)?,
                "boundary_strained": a.boundary_strained,
            })
        }
        Task::Sequence {
            base,
            coordinate,
            path,
            objective,
        } => sequence_json(&conjugate_sequence(base, *coordinate, objective, path)?)?,
    };
    Ok(ResultDoc {
        schema_version: SCHEMA_VERSION.into(),
        command: cfg.command,
        inputs: cfg.inputs.clone(),
        outputs,
        wall_time_ms: started.elapsed().as_millis() as u64,
        seed: effective_seed(cfg),
        csv,
    })
}

/// Seed used by randomized truth-telling trials when none is given.
const DEFAULT_TRUTH_SEED: u64 = 0;

/// The seed that actually drove the run, if any randomness was involved.
fn effective_seed(cfg: &RunConfig) -> Option<u64> {
    match &cfg.task {
        Task::Game {
            action: GameAction::CheckTruthTelling,
            ..
        } => Some(cfg.seed.unwrap_or(DEFAULT_TRUTH_SEED)),
        _ => cfg.seed,
    }
}

#[allow(clippy::too_many_arguments)]
fn run_game(
    cfg: &RunConfig,
    game: &DiscreteGame,
    prior: Option<&DiscreteDist>,
    action: GameAction,
    trials: usize,
    tol: f64,
    bayesimax: &BayesimaxConfig,
    csv: &mut Option<String>,
) -> Result<Value, CliError> {
    let prior_or_err =
        || prior.ok_or_else(|| CliError::invalid("prior", "is required for this action"));
    Ok(match action {
        GameAction::CheckTruthTelling => {
            let r = game.verify_truth_telling(
                prior_or_err()?,
                trials,
                cfg.seed.unwrap_or(DEFAULT_TRUTH_SEED),
            )?;
            let violations = r
                .violations
                .iter()
                .map(|v| Ok(json!({ "trial": v.trial, "margin": num(v.margin)? })))
                .collect::<Result<Vec<_>, CliError>>()?;
            json!({
                "passed": r.passed(),
                "trials": r.trials,
                "truth_risk": num(r.truth_risk)?,
                "violations": violations,
                "ties": r.ties,
                "min_margin": match r.min_margin { Some(m) => num(m)?, None => Value::Null },
                "injective": r.injective,
            })
        }
        GameAction::Evaluate => {
            let p = prior_or_err()?;
            let d = game.decomposition(p)?;
            let marginal = game.marginal(p)?;
            let posteriors = (0..game.num_outcomes())
                .map(|x| {
                    if marginal.get(x) > 0.0 {
                        nums(game.posterior(p, x)?.weights())
                    } else {
                        Ok(Value::Null)
                    }
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            json!({
                "min_bayes_risk": num(d.min_bayes_risk)?,
                "prior_entropy": num(d.prior_entropy)?,
                "information": num(d.information)?,
                "marginal": nums(marginal.weights())?,
                "posteriors": posteriors,
            })
        }
        GameAction::FindBayesimax => {
            let r = game.find_bayesimax_with(bayesimax)?;
            csv.replace(trace_csv(&r));
            let lf =
                game.check_least_favorable(&DiscreteDist::normalized(r.argmax.clone())?, tol)?;
            let mut o = opt_json(&r)?;
            o["least_favorable"] =
                json!({ "pass": lf.pass, "tol": num(tol)?, "sup_risk": num(lf.profile.sup)? });
            o
        }
        GameAction::CheckLeastFavorable => {
            let r = game.check_least_favorable(prior_or_err()?, tol)?;
            csv.replace(r.profile.to_csv());
            json!({
                "pass": r.pass,
                "tol": num(r.tol)?,
                "min_bayes_risk": num(r.min_bayes_risk)?,
                "profile": profile_json(&r.profile)?,
            })
        }
        GameAction::RiskProfile => {
            let p = prior_or_err()?;
            let profile = game.risk_profile(&Rule::constant(p, game.num_outcomes()), p)?;
            csv.replace(profile.to_csv());
            profile_json(&profile)?
        }
    })
}
