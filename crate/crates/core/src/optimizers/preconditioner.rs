//! Post-processing of raw curvature estimates into a positive-definite
//! preconditioner, with inertia carried across iterations.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitize, matrix_abs, psd_sqrt_shifted, HermitianMatrix};

/// Post-processing pipeline applied to every raw curvature estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PostProcessing {
    /// hermitize → inertia → `√(H″²) + εI`
    Spall,
    /// hermitize → `√(H′² + εI)` → inertia
    Gidi,
}

impl PostProcessing {
    pub fn default_epsilon(self) -> f64 {
        match self {
            PostProcessing::Spall => 1e-3,
            PostProcessing::Gidi => 1e-4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PostProcessing::Spall => "spall",
            PostProcessing::Gidi => "gidi",
        }
    }
}

impl std::str::FromStr for PostProcessing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spall" => Ok(PostProcessing::Spall),
            "gidi" => Ok(PostProcessing::Gidi),
            other => Err(Error::Config(format!("unknown post-processing `{other}`"))),
        }
    }
}

/// Smoothed curvature memory: a matrix, or a scalar in scalar mode.
#[derive(Debug, Clone, PartialEq)]
pub enum Preconditioner {
    Matrix(HermitianMatrix),
    Scalar(f64),
}

/// Memory of the inertia recursion, starting from the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct PreconditionerState {
    memory: Preconditioner,
    k: u64,
}

impl PreconditionerState {
    pub fn matrix(dim: usize) -> Self {
        Self { memory: Preconditioner::Matrix(HermitianMatrix::identity(dim)), k: 0 }
    }

    pub fn scalar() -> Self {
        Self { memory: Preconditioner::Scalar(1.0), k: 0 }
    }

    pub fn memory(&self) -> &Preconditioner {
        &self.memory
    }

    /// Iteration of the last update (0 before the first).
    pub fn iteration(&self) -> u64 {
        self.k
    }

    fn check_k(&self, k: u64) -> Result<()> {
        if k == 0 {
            return Err(Error::State("post-processing iterations are 1-indexed".into()));
        }
        Ok(())
    }

    fn matrix_memory(&self, dim: usize) -> Result<&HermitianMatrix> {
        match &self.memory {
            Preconditioner::Matrix(m) if m.dim() == dim => Ok(m),
            Preconditioner::Matrix(m) => {
                Err(Error::State(format!("memory is {}x{0}, estimate is {dim}x{dim}", m.dim())))
            }
            Preconditioner::Scalar(_) => Err(Error::State("memory is scalar, estimate is a matrix".into())),
        }
    }

    fn scalar_memory(&self) -> Result<f64> {
        match self.memory {
            Preconditioner::Scalar(h) => Ok(h),
            Preconditioner::Matrix(_) => Err(Error::State("memory is a matrix, estimate is scalar".into())),
        }
    }
}

fn inertia_weights(k: u64) -> (f64, f64) {
    let k = k as f64;
    (k / (k + 1.0), 1.0 / (k + 1.0))
}

/// Hermitize, blend into `H″`, then return `√(H″²) + εI`.
pub fn postprocess_spall(
    raw: &DMatrix<Complex64>,
    state: &mut PreconditionerState,
    k: u64,
    epsilon: f64,
) -> Result<HermitianMatrix> {
    state.check_k(k)?;
    let h1 = hermitize(raw)?;
    let (w_old, w_new) = inertia_weights(k);
    let h2 = state.matrix_memory(h1.dim())?.blend(w_old, &h1, w_new)?;
    let out = matrix_abs(&h2)?.shifted(epsilon);
    state.memory = Preconditioner::Matrix(h2);
    state.k = k;
    Ok(out)
}

/// Hermitize, map to `√(H′² + εI)`, then blend into `H̄` and return it.
pub fn postprocess_gidi(
    raw: &DMatrix<Complex64>,
    state: &mut PreconditionerState,
    k: u64,
    epsilon: f64,
) -> Result<HermitianMatrix> {
    state.check_k(k)?;
    let h1 = hermitize(raw)?;
    let h2 = psd_sqrt_shifted(&h1, epsilon)?;
    let (w_old, w_new) = inertia_weights(k);
    let bar = state.matrix_memory(h2.dim())?.blend(w_old, &h2, w_new)?;
    state.memory = Preconditioner::Matrix(bar.clone());
    state.k = k;
    Ok(bar)
}

/// [`postprocess_spall`] at dimension one, without building any matrix.
pub fn postprocess_spall_scalar(raw: f64, state: &mut PreconditionerState, k: u64, epsilon: f64) -> Result<f64> {
    state.check_k(k)?;
    let (w_old, w_new) = inertia_weights(k);
    let h2 = w_old * state.scalar_memory()? + w_new * raw;
    state.memory = Preconditioner::Scalar(h2);
    state.k = k;
    Ok(h2.abs() + epsilon)
}

/// [`postprocess_gidi`] at dimension one, without building any matrix.
pub fn postprocess_gidi_scalar(raw: f64, state: &mut PreconditionerState, k: u64, epsilon: f64) -> Result<f64> {
    state.check_k(k)?;
    if !(epsilon > 0.0) {
        return Err(Error::Parameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let h2 = (raw * raw + epsilon).sqrt();
    let (w_old, w_new) = inertia_weights(k);
    let bar = w_old * state.scalar_memory()? + w_new * h2;
    state.memory = Preconditioner::Scalar(bar);
    state.k = k;
    Ok(bar)
}
