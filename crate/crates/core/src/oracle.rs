//! Objective and fidelity oracles as seen by the optimizers.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A (possibly shot-noisy) objective over a flat parameter vector.
///
/// Real-field optimizers pass vectors whose imaginary parts are zero.
/// Oracles own their measurement randomness, so `&mut self` is required.
pub trait Oracle {
    /// Number of parameters in the optimizer's field.
    fn dim(&self) -> usize;

    fn objective(&mut self, z: &[Complex64]) -> Result<f64>;

    fn has_fidelity(&self) -> bool {
        false
    }

    /// Fidelity between the states parameterized by `a` and `b`.
    fn fidelity(&mut self, _a: &[Complex64], _b: &[Complex64]) -> Result<f64> {
        Err(Error::Oracle("this oracle provides no fidelity".into()))
    }

    /// Noiseless objective used only to monitor runs; never charged to the
    /// evaluation budget.
    fn exact_objective(&self, _z: &[Complex64]) -> Option<f64> {
        None
    }

    /// Maps an updated iterate back onto the parameter set the oracle
    /// expects. Applied to every candidate before it is evaluated or
    /// accepted. The default leaves `z` untouched.
    fn project(&self, _z: &mut [Complex64]) {}
}

impl<O: Oracle + ?Sized> Oracle for &mut O {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn objective(&mut self, z: &[Complex64]) -> Result<f64> {
        (**self).objective(z)
    }
    fn has_fidelity(&self) -> bool {
        (**self).has_fidelity()
    }
    fn fidelity(&mut self, a: &[Complex64], b: &[Complex64]) -> Result<f64> {
        (**self).fidelity(a, b)
    }
    fn exact_objective(&self, z: &[Complex64]) -> Option<f64> {
        (**self).exact_objective(z)
    }
    fn project(&self, z: &mut [Complex64]) {
        (**self).project(z)
    }
}

impl<O: Oracle + ?Sized> Oracle for Box<O> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn objective(&mut self, z: &[Complex64]) -> Result<f64> {
        (**self).objective(z)
    }
    fn has_fidelity(&self) -> bool {
        (**self).has_fidelity()
    }
    fn fidelity(&mut self, a: &[Complex64], b: &[Complex64]) -> Result<f64> {
        (**self).fidelity(a, b)
    }
    fn exact_objective(&self, z: &[Complex64]) -> Option<f64> {
        (**self).exact_objective(z)
    }
    fn project(&self, z: &mut [Complex64]) {
        (**self).project(z)
    }
}

/// Cumulative evaluation counters for one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvaluationBudget {
    pub objective_evals: u64,
    pub fidelity_evals: u64,
}

/// Wraps an oracle and counts every objective and fidelity evaluation.
#[derive(Debug)]
pub struct Counting<O> {
    inner: O,
    budget: EvaluationBudget,
}

impl<O: Oracle> Counting<O> {
    pub fn new(inner: O) -> Self {
        Self { inner, budget: EvaluationBudget::default() }
    }

    pub fn budget(&self) -> EvaluationBudget {
        self.budget
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }

    pub fn inner_mut(&mut self) -> &mut O {
        &mut self.inner
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<O: Oracle> Oracle for Counting<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn objective(&mut self, z: &[Complex64]) -> Result<f64> {
        self.budget.objective_evals += 1;
        self.inner.objective(z)
    }
    fn has_fidelity(&self) -> bool {
        self.inner.has_fidelity()
    }
    fn fidelity(&mut self, a: &[Complex64], b: &[Complex64]) -> Result<f64> {
        self.budget.fidelity_evals += 1;
        self.inner.fidelity(a, b)
    }
    fn exact_objective(&self, z: &[Complex64]) -> Option<f64> {
        self.inner.exact_objective(z)
    }
    fn project(&self, z: &mut [Complex64]) {
        self.inner.project(z)
    }
}

type ObjectiveFn = Box<dyn FnMut(&[Complex64]) -> f64 + Send>;
type FidelityFn = Box<dyn FnMut(&[Complex64], &[Complex64]) -> f64 + Send>;
type ExactFn = Box<dyn Fn(&[Complex64]) -> f64 + Send>;

/// Oracle built from closures, mostly for tests and quick experiments.
pub struct FnOracle {
    dim: usize,
    objective: ObjectiveFn,
    fidelity: Option<FidelityFn>,
    exact: Option<ExactFn>,
}

impl FnOracle {
    pub fn new(dim: usize, objective: impl FnMut(&[Complex64]) -> f64 + Send + 'static) -> Self {
        Self { dim, objective: Box::new(objective), fidelity: None, exact: None }
    }

    pub fn with_fidelity(mut self, fidelity: impl FnMut(&[Complex64], &[Complex64]) -> f64 + Send + 'static) -> Self {
        self.fidelity = Some(Box::new(fidelity));
        self
    }

    pub fn with_exact(mut self, exact: impl Fn(&[Complex64]) -> f64 + Send + 'static) -> Self {
        self.exact = Some(Box::new(exact));
        self
    }
}

impl std::fmt::Debug for FnOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnOracle").field("dim", &self.dim).field("fidelity", &self.fidelity.is_some()).finish()
    }
}

impl Oracle for FnOracle {
    fn dim(&self) -> usize {
        self.dim
    }
    fn objective(&mut self, z: &[Complex64]) -> Result<f64> {
        check_len(z, self.dim)?;
        Ok((self.objective)(z))
    }
    fn has_fidelity(&self) -> bool {
        self.fidelity.is_some()
    }
    fn fidelity(&mut self, a: &[Complex64], b: &[Complex64]) -> Result<f64> {
        check_len(a, self.dim)?;
        check_len(b, self.dim)?;
        match self.fidelity.as_mut() {
            Some(f) => Ok(f(a, b)),
            None => Err(Error::Oracle("this oracle provides no fidelity".into())),
        }
    }
    fn exact_objective(&self, z: &[Complex64]) -> Option<f64> {
        self.exact.as_ref().map(|f| f(z))
    }
}

pub(crate) fn check_len(z: &[Complex64], dim: usize) -> Result<()> {
    if z.len() != dim {
        return Err(Error::Dimension(format!("parameter vector has length {}, expected {dim}", z.len())));
    }
    Ok(())
}

/// Presents a complex-native oracle of dimension `p` to real-field
/// optimizers as a function of `2p` reals laid out as `(Re z₁, Im z₁, …)`.
#[derive(Debug)]
pub struct RealView<O> {
    inner: O,
}

impl<O: Oracle> RealView<O> {
    pub fn new(inner: O) -> Self {
        Self { inner }
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

/// `(Re z₁, Im z₁, Re z₂, …)` as zero-imaginary complex entries.
pub fn complex_to_real(z: &[Complex64]) -> Vec<Complex64> {
    z.iter().flat_map(|w| [Complex64::new(w.re, 0.0), Complex64::new(w.im, 0.0)]).collect()
}

/// Inverse of [`complex_to_real`]; imaginary parts of the input are ignored.
pub fn real_to_complex(theta: &[Complex64]) -> Vec<Complex64> {
    theta.chunks_exact(2).map(|p| Complex64::new(p[0].re, p[1].re)).collect()
}

impl<O: Oracle> Oracle for RealView<O> {
    fn dim(&self) -> usize {
        2 * self.inner.dim()
    }
    fn objective(&mut self, theta: &[Complex64]) -> Result<f64> {
        check_len(theta, self.dim())?;
        self.inner.objective(&real_to_complex(theta))
    }
    fn has_fidelity(&self) -> bool {
        self.inner.has_fidelity()
    }
    fn fidelity(&mut self, a: &[Complex64], b: &[Complex64]) -> Result<f64> {
        check_len(a, self.dim())?;
        check_len(b, self.dim())?;
        self.inner.fidelity(&real_to_complex(a), &real_to_complex(b))
    }
    fn exact_objective(&self, theta: &[Complex64]) -> Option<f64> {
        if theta.len() != self.dim() {
            return None;
        }
        self.inner.exact_objective(&real_to_complex(theta))
    }
    fn project(&self, theta: &mut [Complex64]) {
        if theta.len() != self.dim() {
            return;
        }
        let mut z = real_to_complex(theta);
        self.inner.project(&mut z);
        theta.copy_from_slice(&complex_to_real(&z));
    }
}
