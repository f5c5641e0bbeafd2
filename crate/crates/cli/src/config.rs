use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use cspsa_bench::{Calibration, EnsembleSpec};
use cspsa_core::{
    Blocking, ControlCoupling, Entangler, Field, GainPreset, GainSchedule, Method, OptimizerConfig, PostProcessing,
    ProblemSpec, Shots,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable consulted for the seed when neither the config
/// file nor the command line sets one.
pub const SEED_ENV: &str = "CSPSA_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Application {
    Vqe,
    Grape,
    Sgqt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

/// A gain preset name or an explicit `a,b,A,s,t` tuple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainsSpec {
    Preset(GainPreset),
    Explicit { a: f64, b: f64, offset: f64, s: f64, t: f64 },
}

impl GainsSpec {
    pub fn schedule(self) -> GainSchedule {
        match self {
            GainsSpec::Preset(p) => GainSchedule::preset(p),
            GainsSpec::Explicit { a, b, offset, s, t } => GainSchedule::new(a, b, offset, s, t),
        }
    }
}

impl fmt::Display for GainsSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GainsSpec::Preset(p) => f.write_str(p.name()),
            GainsSpec::Explicit { a, b, offset, s, t } => write!(f, "{a},{b},{offset},{s},{t}"),
        }
    }
}

impl FromStr for GainsSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Ok(p) = s.trim().parse::<GainPreset>() {
            return Ok(GainsSpec::Preset(p));
        }
        let values: Vec<f64> = s
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Config(format!("gains `{s}` is neither a preset nor a list of numbers")))?;
        match values[..] {
            [a, b, offset, s, t] => Ok(GainsSpec::Explicit { a, b, offset, s, t }),
            _ => Err(Error::Config(format!("explicit gains need five values a,b,A,s,t; got {}", values.len()))),
        }
    }
}

impl Serialize for GainsSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GainsSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Every setting of one experiment. Keys are optional so that a config
/// file and command-line flags can be layered; [`ExperimentConfig::resolve`]
/// fills in the per-application defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Problem family.
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub application: Option<Application>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qubits: Option<usize>,

    /// Entangling layers of the VQE ansatz.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layers: Option<usize>,

    /// GRAPE time slices (M).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slices: Option<usize>,

    /// Shots per measured quantity, or `exact`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<Shots>,

    /// VQE coupling.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,

    /// VQE field.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,

    /// Close the chain into a ring.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub periodic: Option<bool>,

    /// GRAPE slice duration.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,

    /// VQE entangling layer: cz_ring or cz_chain.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entangler: Option<Entangler>,

    /// GRAPE coupling: literal or hermitian.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<ControlCoupling>,

    /// first_order, second_order or quantum_natural.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,

    /// real or complex.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<Field>,

    /// Scalar preconditioning.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scalar: Option<bool>,

    /// standard, asymptotic, static, or `a,b,A,s,t`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gains: Option<GainsSpec>,

    /// Preconditioned step gain.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_bar: Option<f64>,

    /// Second perturbation size; defaults to `b`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_tilde: Option<f64>,

    /// Replace `a` by a calibrated value before running.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibrate: Option<bool>,

    /// spall or gidi.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub postproc: Option<PostProcessing>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,

    /// off, auto, auto:<samples>, or a tolerance.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocking: Option<Blocking>,

    /// Estimates averaged per iteration (N_R).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resampling: Option<usize>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<u64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runs: Option<usize>,

    /// Base seed; run `r` uses `seed + r`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    /// Worker threads; defaults to all cores.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,

    /// Output directory.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    /// The configuration with every default filled in.
    pub config: ExperimentConfig,
    pub ensemble: EnsembleSpec,
    pub out: PathBuf,
    pub format: OutputFormat,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),* $(,)?) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f; } )*
    };
}

fn not_for(app: Application, key: &str) -> Error {
    Error::Config(format!("`{key}` does not apply to {}", app_name(app)))
}

fn app_name(app: Application) -> &'static str {
    match app {
        Application::Vqe => "vqe",
        Application::Grape => "grape",
        Application::Sgqt => "sgqt",
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|source| Error::ReadConfig { path: path.to_path_buf(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }

    /// `self` with every key set in `top` replaced.
    pub fn overlay(mut self, top: ExperimentConfig) -> Self {
        let base = &mut self;
        overlay!(base, top;
            application, qubits, layers, slices, shots, j, h, periodic, dt, entangler, coupling,
            method, field, scalar, gains, a_bar, b_tilde, calibrate, postproc, epsilon, blocking,
            resampling, iterations, runs, seed, threads, out, format,
        );
        self
    }

    /// Applies defaults and validates. `env_seed` is used only when no seed
    /// is configured.
    pub fn resolve(&self, env_seed: Option<u64>) -> Result<Experiment> {
        let app =
            self.application.ok_or_else(|| Error::Config("`application` is required (vqe, grape or sgqt)".into()))?;
        let mut c = self.clone();

        match app {
            Application::Vqe => {
                for (set, key) in
                    [(c.slices.is_some(), "slices"), (c.dt.is_some(), "dt"), (c.coupling.is_some(), "coupling")]
                {
                    if set {
                        return Err(not_for(app, key));
                    }
                }
                c.qubits.get_or_insert(10);
                c.layers.get_or_insert(1);
                c.shots.get_or_insert(Shots::Finite(20_000));
                c.j.get_or_insert(1.0);
                c.h.get_or_insert(0.3);
                c.periodic.get_or_insert(c.qubits.unwrap() >= 3);
                c.entangler.get_or_insert(Entangler::default());
                c.gains.get_or_insert(GainsSpec::Preset(GainPreset::Standard));
                c.calibrate.get_or_insert(true);
                c.iterations.get_or_insert(700);
            }
            Application::Grape => {
                for (set, key) in [
                    (c.layers.is_some(), "layers"),
                    (c.j.is_some(), "j"),
                    (c.h.is_some(), "h"),
                    (c.entangler.is_some(), "entangler"),
                ] {
                    if set {
                        return Err(not_for(app, key));
                    }
                }
                c.qubits.get_or_insert(5);
                c.slices.get_or_insert(25);
                c.shots.get_or_insert(Shots::Finite(1 << 13));
                c.periodic.get_or_insert(false);
                c.dt.get_or_insert(1.0);
                c.coupling.get_or_insert(ControlCoupling::default());
                c.gains.get_or_insert(GainsSpec::Preset(GainPreset::Static));
                c.calibrate.get_or_insert(false);
                c.iterations.get_or_insert(1000);
            }
            Application::Sgqt => {
                for (set, key) in [
                    (c.layers.is_some(), "layers"),
                    (c.slices.is_some(), "slices"),
                    (c.j.is_some(), "j"),
                    (c.h.is_some(), "h"),
                    (c.periodic.is_some(), "periodic"),
                    (c.dt.is_some(), "dt"),
                    (c.entangler.is_some(), "entangler"),
                    (c.coupling.is_some(), "coupling"),
                ] {
                    if set {
                        return Err(not_for(app, key));
                    }
                }
                c.qubits.get_or_insert(6);
                c.shots.get_or_insert(Shots::Finite(20_000));
                c.gains.get_or_insert(GainsSpec::Preset(GainPreset::Asymptotic));
                c.calibrate.get_or_insert(false);
                c.iterations.get_or_insert(5000);
            }
        }
        c.method.get_or_insert(Method::FirstOrder);
        c.field.get_or_insert(Field::Complex);
        c.scalar.get_or_insert(false);
        c.postproc.get_or_insert(PostProcessing::Spall);
        c.blocking.get_or_insert(Blocking::Off);
        c.resampling.get_or_insert(1);
        c.runs.get_or_insert(100);
        if c.seed.is_none() {
            c.seed = Some(env_seed.unwrap_or(0));
        }
        c.out.get_or_insert_with(|| PathBuf::from("results"));
        c.format.get_or_insert(OutputFormat::default());

        let problem = match app {
            Application::Vqe => ProblemSpec::Vqe {
                qubits: c.qubits.unwrap(),
                layers: c.layers.unwrap(),
                j: c.j.unwrap(),
                h: c.h.unwrap(),
                periodic: c.periodic.unwrap(),
                shots: c.shots.unwrap(),
                entangler: c.entangler.unwrap(),
            },
            Application::Grape => ProblemSpec::Grape {
                qubits: c.qubits.unwrap(),
                slices: c.slices.unwrap(),
                dt: c.dt.unwrap(),
                periodic: c.periodic.unwrap(),
                shots: c.shots.unwrap(),
                coupling: c.coupling.unwrap(),
            },
            Application::Sgqt => ProblemSpec::Sgqt { qubits: c.qubits.unwrap(), shots: c.shots.unwrap() },
        };
        if let ProblemSpec::Grape { qubits: 2, periodic: true, .. } = problem {
            return Err(Error::Config("a periodic 2-qubit chain would count its single bond twice".into()));
        }
        if let ProblemSpec::Grape { dt, .. } = problem {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::Config(format!("dt must be positive, got {dt}")));
            }
        }

        let mut gains = c.gains.unwrap().schedule();
        if let Some(a_bar) = c.a_bar {
            gains = gains.with_a_bar(a_bar);
        }
        if let Some(b_tilde) = c.b_tilde {
            gains = gains.with_b_tilde(b_tilde);
        }
        let mut optimizer = OptimizerConfig::new(c.method.unwrap(), c.field.unwrap())
            .with_scalar(c.scalar.unwrap())
            .with_gains(gains)
            .with_postprocessing(c.postproc.unwrap())
            .with_blocking(c.blocking.unwrap())
            .with_resamples(c.resampling.unwrap())
            .with_iterations(c.iterations.unwrap())
            .with_seed(c.seed.unwrap());
        if let Some(eps) = c.epsilon {
            optimizer = optimizer.with_epsilon(eps);
        }
        optimizer.validate()?;
        if c.runs == Some(0) {
            return Err(Error::Config("`runs` must be at least 1".into()));
        }
        if c.threads == Some(0) {
            return Err(Error::Config("`threads` must be at least 1".into()));
        }
        problem.validate().map_err(|e| Error::Config(e.to_string()))?;

        let mut ensemble = EnsembleSpec::new(problem, optimizer, c.runs.unwrap(), c.seed.unwrap());
        if c.calibrate.unwrap() {
            ensemble = ensemble.with_calibration(Calibration::default());
        }
        ensemble.threads = c.threads;
        Ok(Experiment { out: c.out.clone().unwrap(), format: c.format.unwrap(), config: c, ensemble })
    }
}

/// Parses the seed override environment value.
pub fn parse_env_seed(value: Option<&str>) -> Result<Option<u64>> {
    value
        .map(|v| {
            v.trim().parse::<u64>().map_err(|_| Error::Config(format!("{SEED_ENV}=`{v}` is not an unsigned integer")))
        })
        .transpose()
}
