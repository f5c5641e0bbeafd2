//! The SPSA family assembled into runnable optimizers.
//!
//! One [`run`] drives every method: first order (SPSA, CSPSA), second order
//! (2SPSA, 2CSPSA) and quantum natural (QN-SPSA, QN-CSPSA), each optionally
//! with a scalar preconditioner, blocking and resampling.

mod preconditioner;
mod update;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use preconditioner::{
    postprocess_gidi, postprocess_gidi_scalar, postprocess_spall, postprocess_spall_scalar, PostProcessing,
    Preconditioner, PreconditionerState,
};
pub use update::{
    apply_blocking, estimate_blocking_tolerance, resample_average, step_first_order, step_preconditioned, step_scalar,
    Average, BlockingOutcome, Curvature,
};

use crate::error::{Error, Result};
use crate::estimators::{
    fidelity_second_difference, gradient_estimate, hessian_estimate, metric_estimate, objective_second_difference,
    sample_perturbation, scalar_preconditioner, CurvatureKind, Field, GainSchedule,
};
use crate::oracle::{Counting, Oracle};
use crate::{rng_stream, PERTURBATION_STREAM};

/// Number of objective samples used for the automatic blocking tolerance.
pub const DEFAULT_BLOCKING_SAMPLES: usize = 25;

/// Order of the optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FirstOrder,
    SecondOrder,
    QuantumNatural,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::FirstOrder => "first_order",
            Method::SecondOrder => "second_order",
            Method::QuantumNatural => "quantum_natural",
        }
    }

    fn curvature(self) -> Option<CurvatureKind> {
        match self {
            Method::FirstOrder => None,
            Method::SecondOrder => Some(CurvatureKind::SecondOrder),
            Method::QuantumNatural => Some(CurvatureKind::QuantumNatural),
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "first_order" => Ok(Method::FirstOrder),
            "second_order" => Ok(Method::SecondOrder),
            "quantum_natural" => Ok(Method::QuantumNatural),
            _ => Err(Error::Config(format!(
                "unknown method `{s}` (expected first_order, second_order or quantum_natural)"
            ))),
        }
    }
}

/// Blocking policy. Textual form: `off`, `auto`, `auto:<samples>` or a
/// non-negative tolerance such as `0.01`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Blocking {
    Off,
    Fixed(f64),
    /// Twice the sample standard deviation of `samples` evaluations at `z₀`.
    Auto {
        samples: usize,
    },
}

impl Blocking {
    pub fn auto() -> Self {
        Blocking::Auto { samples: DEFAULT_BLOCKING_SAMPLES }
    }

    pub fn is_on(&self) -> bool {
        !matches!(self, Blocking::Off)
    }
}

impl std::fmt::Display for Blocking {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Blocking::Off => write!(f, "off"),
            Blocking::Fixed(d) => write!(f, "{d:?}"),
            Blocking::Auto { samples } if *samples == DEFAULT_BLOCKING_SAMPLES => write!(f, "auto"),
            Blocking::Auto { samples } => write!(f, "auto:{samples}"),
        }
    }
}

impl std::str::FromStr for Blocking {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "off" | "none" | "false" => return Ok(Blocking::Off),
            "auto" | "on" | "true" => return Ok(Blocking::auto()),
            _ => {}
        }
        if let Some(n) = s.strip_prefix("auto:") {
            let samples = n.parse().map_err(|_| Error::Config(format!("invalid blocking sample count `{n}`")))?;
            return Ok(Blocking::Auto { samples });
        }
        match s.parse::<f64>() {
            Ok(d) if d >= 0.0 && d.is_finite() => Ok(Blocking::Fixed(d)),
            _ => {
                Err(Error::Config(format!("invalid blocking `{s}` (expected off, auto, auto:<n> or a tolerance >= 0)")))
            }
        }
    }
}

impl From<Blocking> for String {
    fn from(b: Blocking) -> Self {
        b.to_string()
    }
}

impl TryFrom<String> for Blocking {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Complete description of one optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub method: Method,
    pub field: Field,
    /// Replace the matrix preconditioner by its perturbation-free scalar.
    pub scalar: bool,
    pub gains: GainSchedule,
    pub postprocessing: PostProcessing,
    /// Regularizer; `None` selects the pipeline default.
    pub epsilon: Option<f64>,
    pub blocking: Blocking,
    pub resamples: usize,
    pub max_iterations: u64,
    pub seed: u64,
}

impl OptimizerConfig {
    pub fn new(method: Method, field: Field) -> Self {
        Self {
            method,
            field,
            scalar: false,
            gains: GainSchedule::standard(),
            postprocessing: PostProcessing::Spall,
            epsilon: None,
            blocking: Blocking::Off,
            resamples: 1,
            max_iterations: 100,
            seed: 0,
        }
    }

    pub fn with_gains(mut self, gains: GainSchedule) -> Self {
        self.gains = gains;
        self
    }

    pub fn with_scalar(mut self, scalar: bool) -> Self {
        self.scalar = scalar;
        self
    }

    pub fn with_postprocessing(mut self, pp: PostProcessing) -> Self {
        self.postprocessing = pp;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = Some(epsilon);
        self
    }

    pub fn with_blocking(mut self, blocking: Blocking) -> Self {
        self.blocking = blocking;
        self
    }

    pub fn with_resamples(mut self, n: usize) -> Self {
        self.resamples = n;
        self
    }

    pub fn with_iterations(mut self, n: u64) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or_else(|| self.postprocessing.default_epsilon())
    }

    /// Conventional name such as `CSPSA`, `2SPSA` or `scalar QN-CSPSA`.
    pub fn label(&self) -> String {
        let base = match self.field {
            Field::Real => "SPSA",
            Field::Complex => "CSPSA",
        };
        let prefix = match self.method {
            Method::FirstOrder => "",
            Method::SecondOrder => "2",
            Method::QuantumNatural => "QN-",
        };
        let scalar = if self.scalar { "scalar " } else { "" };
        format!("{scalar}{prefix}{base}")
    }

    pub fn validate(&self) -> Result<()> {
        if self.scalar && self.method == Method::FirstOrder {
            return Err(Error::Config("scalar preconditioning requires second_order or quantum_natural".into()));
        }
        if self.resamples == 0 {
            return Err(Error::Config("resamples must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::Config(format!("epsilon must be positive, got {eps}")));
            }
        }
        match self.blocking {
            Blocking::Fixed(d) if !(d >= 0.0 && d.is_finite()) => {
                return Err(Error::Config(format!("blocking tolerance must be >= 0, got {d}")));
            }
            Blocking::Auto { samples } if samples < 2 => {
                return Err(Error::Config("automatic blocking needs at least 2 samples".into()));
            }
            _ => {}
        }
        self.gains.validate().map_err(|e| Error::Config(e.to_string()))
    }
}

/// One iteration of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: u64,
    /// Objective at the iterate after this iteration (noiseless when the
    /// oracle offers a monitor).
    pub value: f64,
    pub accepted: bool,
    /// Cumulative, including any blocking evaluations.
    pub objective_evals: u64,
    pub fidelity_evals: u64,
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    /// A non-finite iterate or objective value appeared at iteration `k`.
    Diverged {
        k: u64,
    },
    /// The update failed at iteration `k`, for instance a singular solve.
    Failed {
        k: u64,
        reason: String,
    },
}

/// Record of one optimization run. Runs that diverge or fail stop early, so
/// `records` is shorter than `max_iterations` exactly when `status` is not
/// [`RunStatus::Completed`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
    pub final_params: Vec<Complex64>,
    pub status: RunStatus,
    pub blocking_tolerance: Option<f64>,
}

impl RunTrace {
    pub fn is_completed(&self) -> bool {
        self.status == RunStatus::Completed
    }

    pub fn final_value(&self) -> Option<f64> {
        self.records.last().map(|r| r.value)
    }
}

/// What an observer sees after each iteration.
#[derive(Debug)]
pub struct IterationEvent<'a> {
    pub k: u64,
    /// Averaged gradient estimate at `previous`.
    pub gradient: &'a [Complex64],
    pub previous: &'a [Complex64],
    /// Proposed update before blocking.
    pub candidate: &'a [Complex64],
    pub accepted: bool,
    pub value: f64,
}

/// Runs the configured optimizer from `z0`.
pub fn run<O: Oracle + ?Sized>(oracle: &mut O, config: &OptimizerConfig, z0: &[Complex64]) -> Result<RunTrace> {
    run_with_observer(oracle, config, z0, |_| {})
}

/// [`run`], calling `observer` after every iteration.
pub fn run_with_observer<O: Oracle + ?Sized>(
    oracle: &mut O,
    config: &OptimizerConfig,
    z0: &[Complex64],
    mut observer: impl FnMut(&IterationEvent<'_>),
) -> Result<RunTrace> {
    config.validate()?;
    let p = oracle.dim();
    if z0.len() != p {
        return Err(Error::Config(format!("initial point has length {}, oracle expects {p}", z0.len())));
    }
    if p == 0 {
        return Err(Error::Config("cannot optimize over zero parameters".into()));
    }
    if config.method == Method::QuantumNatural && !oracle.has_fidelity() {
        return Err(Error::Config("quantum_natural requires an oracle with a fidelity".into()));
    }
    if config.field == Field::Real && z0.iter().any(|z| z.im != 0.0) {
        return Err(Error::Config(
            "real-field runs need a real initial point; wrap complex problems in RealView".into(),
        ));
    }
    if z0.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Config("initial point is not finite".into()));
    }

    let mut oracle = Counting::new(oracle);
    let mut rng = rng_stream(config.seed, PERTURBATION_STREAM);
    let eps = config.epsilon();
    let n_r = config.resamples;
    let curvature = config.method.curvature();

    let (tolerance, mut f_cur) = match config.blocking {
        Blocking::Off => (None, None),
        Blocking::Fixed(d) => (Some(d), Some(oracle.objective(z0)?)),
        Blocking::Auto { samples } => {
            let xs = update::sample_objective(&mut oracle, z0, samples)?;
            (Some(update::blocking_tolerance_from(&xs)), xs.last().copied())
        }
    };

    let mut state = match (curvature, config.scalar) {
        (Some(_), true) => Some(PreconditionerState::scalar()),
        (Some(_), false) => Some(PreconditionerState::matrix(p)),
        (None, _) => None,
    };

    let mut z = z0.to_vec();
    let mut records = Vec::with_capacity(config.max_iterations as usize);
    let mut status = RunStatus::Completed;

    for k in 1..=config.max_iterations {
        let gains = config.gains.gains_at(k)?;
        let (g, curv) = resample_average(n_r, || {
            let delta = sample_perturbation(p, config.field, &mut rng);
            let est = gradient_estimate(&mut oracle, &z, gains.b, &delta)?;
            let Some(kind) = curvature else {
                return Ok((est.gradient, Curvature::None));
            };
            let delta_tilde = sample_perturbation(p, config.field, &mut rng);
            let c = match (kind, config.scalar) {
                (CurvatureKind::SecondOrder, false) => Curvature::Matrix(
                    hessian_estimate(&mut oracle, &z, gains.b, gains.b_tilde, &delta, &delta_tilde, &est)?.0,
                ),
                (CurvatureKind::QuantumNatural, false) => {
                    Curvature::Matrix(metric_estimate(&mut oracle, &z, gains.b, gains.b_tilde, &delta, &delta_tilde)?.0)
                }
                (CurvatureKind::SecondOrder, true) => {
                    let d2 = objective_second_difference(
                        &mut oracle,
                        &z,
                        gains.b,
                        gains.b_tilde,
                        &delta,
                        &delta_tilde,
                        &est,
                    )?;
                    Curvature::Scalar(scalar_preconditioner(d2, gains.b, gains.b_tilde, kind))
                }
                (CurvatureKind::QuantumNatural, true) => {
                    let d2 = fidelity_second_difference(&mut oracle, &z, gains.b, gains.b_tilde, &delta, &delta_tilde)?;
                    Curvature::Scalar(scalar_preconditioner(d2, gains.b, gains.b_tilde, kind))
                }
            };
            Ok((est.gradient, c))
        })?;

        let step = match (curv, state.as_mut()) {
            (Curvature::None, _) => Ok(step_first_order(&z, gains.a, &g)),
            (Curvature::Matrix(raw), Some(st)) => {
                let h_bar = match config.postprocessing {
                    PostProcessing::Spall => postprocess_spall(&raw, st, k, eps),
                    PostProcessing::Gidi => postprocess_gidi(&raw, st, k, eps),
                };
                h_bar.and_then(|h| step_preconditioned(&z, gains.a_bar, &g, &h))
            }
            (Curvature::Scalar(raw), Some(st)) => {
                let h = match config.postprocessing {
                    PostProcessing::Spall => postprocess_spall_scalar(raw, st, k, eps),
                    PostProcessing::Gidi => postprocess_gidi_scalar(raw, st, k, eps),
                };
                h.and_then(|h| step_scalar(&z, gains.a_bar, &g, h))
            }
            (_, None) => unreachable!("curvature estimates always come with a preconditioner state"),
        };
        let mut candidate = match step {
            Ok(c) => c,
            Err(e) => {
                status = RunStatus::Failed { k, reason: e.to_string() };
                break;
            }
        };
        if candidate.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            status = RunStatus::Diverged { k };
            break;
        }
        oracle.project(&mut candidate);

        let (next, accepted) = match (tolerance, f_cur) {
            (Some(delta), Some(f_old)) => {
                let out = apply_blocking(&mut oracle, &z, f_old, candidate.clone(), delta)?;
                f_cur = Some(out.value);
                (out.params, out.accepted)
            }
            _ => (candidate.clone(), true),
        };

        let value = match (oracle.exact_objective(&next), f_cur) {
            (Some(v), _) => v,
            (None, Some(v)) => v,
            // Monitoring evaluation, not charged to the optimizer.
            (None, None) => oracle.inner_mut().objective(&next)?,
        };

        observer(&IterationEvent { k, gradient: &g, previous: &z, candidate: &candidate, accepted, value });
        z = next;
        if !value.is_finite() {
            status = RunStatus::Diverged { k };
            break;
        }
        let budget = oracle.budget();
        records.push(IterationRecord {
            k,
            value,
            accepted,
            objective_evals: budget.objective_evals,
            fidelity_evals: budget.fidelity_evals,
        });
    }

    Ok(RunTrace { records, final_params: z, status, blocking_tolerance: tolerance })
}
