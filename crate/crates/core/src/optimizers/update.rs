//! Parameter updates, blocking and resampling.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{solve_pd, HermitianMatrix};
use crate::oracle::Oracle;

/// `z − a_k g`
pub fn step_first_order(z: &[Complex64], a_k: f64, g: &[Complex64]) -> Vec<Complex64> {
    z.iter().zip(g).map(|(zi, gi)| zi - gi * a_k).collect()
}

/// `z − ā_k H̄⁻¹ g`
pub fn step_preconditioned(
    z: &[Complex64],
    a_bar_k: f64,
    g: &[Complex64],
    h_bar: &HermitianMatrix,
) -> Result<Vec<Complex64>> {
    let dir = solve_pd(h_bar, g)?;
    Ok(step_first_order(z, a_bar_k, &dir))
}

/// `z − ā_k g / h` for a positive scalar preconditioner `h`.
pub fn step_scalar(z: &[Complex64], a_bar_k: f64, g: &[Complex64], h: f64) -> Result<Vec<Complex64>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(step_first_order(z, a_bar_k / h, g))
}

/// Result of testing a candidate against the blocking criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockingOutcome {
    pub params: Vec<Complex64>,
    /// Objective value attached to `params`: the fresh evaluation when the
    /// candidate is accepted, otherwise the cached value of the old iterate.
    pub value: f64,
    pub accepted: bool,
}

/// Accepts `candidate` if `f(candidate) < f_old + δ`. One objective
/// evaluation; `f_old` is the cached value of the current iterate.
pub fn apply_blocking<O: Oracle + ?Sized>(
    oracle: &mut O,
    z_old: &[Complex64],
    f_old: f64,
    candidate: Vec<Complex64>,
    delta: f64,
) -> Result<BlockingOutcome> {
    if !(delta >= 0.0) {
        return Err(Error::Parameter(format!("blocking tolerance must be non-negative, got {delta}")));
    }
    let f_new = oracle.objective(&candidate)?;
    if f_new < f_old + delta {
        Ok(BlockingOutcome { params: candidate, value: f_new, accepted: true })
    } else {
        Ok(BlockingOutcome { params: z_old.to_vec(), value: f_old, accepted: false })
    }
}

pub(crate) fn sample_objective<O: Oracle + ?Sized>(oracle: &mut O, z0: &[Complex64], n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::Parameter(format!("need at least 2 samples, got {n}")));
    }
    (0..n).map(|_| oracle.objective(z0)).collect()
}

pub(crate) fn blocking_tolerance_from(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    2.0 * var.sqrt()
}

/// Twice the sample standard deviation of `n_samples` evaluations at `z0`.
pub fn estimate_blocking_tolerance<O: Oracle + ?Sized>(
    oracle: &mut O,
    z0: &[Complex64],
    n_samples: usize,
) -> Result<f64> {
    Ok(blocking_tolerance_from(&sample_objective(oracle, z0, n_samples)?))
}

/// Values that can be averaged across resampled draws.
pub trait Average: Sized {
    fn accumulate(&mut self, other: Self) -> Result<()>;
    fn scale(&mut self, factor: f64);
}

impl Average for f64 {
    fn accumulate(&mut self, other: Self) -> Result<()> {
        *self += other;
        Ok(())
    }
    fn scale(&mut self, factor: f64) {
        *self *= factor;
    }
}

impl Average for Vec<Complex64> {
    fn accumulate(&mut self, other: Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::Dimension("resampled vectors differ in length".into()));
        }
        self.iter_mut().zip(other).for_each(|(a, b)| *a += b);
        Ok(())
    }
    fn scale(&mut self, factor: f64) {
        self.iter_mut().for_each(|a| *a *= factor);
    }
}

impl Average for DMatrix<Complex64> {
    fn accumulate(&mut self, other: Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Dimension("resampled matrices differ in shape".into()));
        }
        *self += other;
        Ok(())
    }
    fn scale(&mut self, factor: f64) {
        self.scale_mut(factor);
    }
}

impl<A: Average, B: Average> Average for (A, B) {
    fn accumulate(&mut self, other: Self) -> Result<()> {
        self.0.accumulate(other.0)?;
        self.1.accumulate(other.1)
    }
    fn scale(&mut self, factor: f64) {
        self.0.scale(factor);
        self.1.scale(factor);
    }
}

/// Curvature information carried by one resampled draw.
#[derive(Debug, Clone, PartialEq)]
pub enum Curvature {
    None,
    Matrix(DMatrix<Complex64>),
    Scalar(f64),
}

impl Average for Curvature {
    fn accumulate(&mut self, other: Self) -> Result<()> {
        match (self, other) {
            (Curvature::None, Curvature::None) => Ok(()),
            (Curvature::Matrix(a), Curvature::Matrix(b)) => a.accumulate(b),
            (Curvature::Scalar(a), Curvature::Scalar(b)) => a.accumulate(b),
            _ => Err(Error::Dimension("resampled draws differ in kind".into())),
        }
    }
    fn scale(&mut self, factor: f64) {
        match self {
            Curvature::None => {}
            Curvature::Matrix(m) => m.scale(factor),
            Curvature::Scalar(h) => h.scale(factor),
        }
    }
}

/// Arithmetic mean of `n_r` independent draws.
pub fn resample_average<T: Average>(n_r: usize, mut draw: impl FnMut() -> Result<T>) -> Result<T> {
    if n_r == 0 {
        return Err(Error::Parameter("resampling count must be at least 1".into()));
    }
    let mut acc = draw()?;
    for _ in 1..n_r {
        acc.accumulate(draw()?)?;
    }
    if n_r > 1 {
        acc.scale(1.0 / n_r as f64);
    }
    Ok(acc)
}
