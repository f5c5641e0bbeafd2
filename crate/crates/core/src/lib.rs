//! Real and complex simultaneous perturbation stochastic approximation.
//!
//! The crate provides the SPSA family in both fields (first order, second
//! order and quantum natural, each with an optional scalar preconditioner,
//! blocking and resampling), a dense statevector simulator, and three
//! quantum problems exposed as shot-noisy [`Oracle`]s.
//!
//! ```
//! use cspsa_core::{run, Field, FnOracle, GainSchedule, Method, OptimizerConfig};
//! use num_complex::Complex64;
//!
//! let target = Complex64::new(1.0, -0.5);
//! let mut f = FnOracle::new(1, move |z| (z[0] - target).norm_sqr());
//! let config = OptimizerConfig::new(Method::FirstOrder, Field::Complex)
//!     .with_gains(GainSchedule::fixed().with_a(0.2))
//!     .with_iterations(300);
//! let trace = run(&mut f, &config, &[Complex64::new(0.0, 0.0)]).unwrap();
//! assert!((trace.final_params[0] - target).norm() < 1e-6);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod applications;
pub mod error;
pub mod estimators;
pub mod linalg;
pub mod optimizers;
pub mod oracle;
pub mod quantum;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use applications::{ControlCoupling, Entangler, GrapeProblem, Instance, ProblemSpec, SgqtProblem, VqeProblem};
pub use error::{Error, Result};
pub use estimators::{Field, GainPreset, GainSchedule, Gains, PerturbationVector};
pub use linalg::HermitianMatrix;
pub use optimizers::{
    run, run_with_observer, Blocking, IterationEvent, IterationRecord, Method, OptimizerConfig, PostProcessing,
    RunStatus, RunTrace,
};
pub use oracle::{Counting, EvaluationBudget, FnOracle, Oracle, RealView};
pub use quantum::{Shots, StateVector};

/// Stream carrying the optimizer's perturbations.
pub const PERTURBATION_STREAM: u64 = 0;
/// Stream used to draw problem instances and initial points.
pub const INSTANCE_STREAM: u64 = 1;
/// Stream carrying simulated measurement noise.
pub const NOISE_STREAM: u64 = 2;

/// Independent ChaCha8 stream `stream` of `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
