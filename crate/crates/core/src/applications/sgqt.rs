use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::oracle::{check_len, Oracle};
use crate::quantum::{fidelity_with_shots, Shots, StateVector};

/// Self-guided tomography of a pure state. The guess is parameterized by
/// its raw, unnormalized amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct SgqtProblem {
    unknown: StateVector,
    shots: Shots,
}

impl SgqtProblem {
    pub fn new(unknown: StateVector, shots: Shots) -> Self {
        Self { unknown, shots }
    }

    pub fn unknown(&self) -> &StateVector {
        &self.unknown
    }

    /// One amplitude per basis state.
    pub fn dim(&self) -> usize {
        self.unknown.dim()
    }

    pub fn guess(&self, amplitudes: &[Complex64]) -> Result<StateVector> {
        check_len(amplitudes, self.dim())?;
        StateVector::normalized(amplitudes.to_vec())
    }

    pub fn infidelity<R: Rng + ?Sized>(&self, amplitudes: &[Complex64], rng: &mut R) -> Result<f64> {
        Ok(1.0 - fidelity_with_shots(&self.unknown, &self.guess(amplitudes)?, self.shots, rng)?)
    }

    pub fn exact_infidelity(&self, amplitudes: &[Complex64]) -> Result<f64> {
        Ok(1.0 - self.unknown.fidelity(&self.guess(amplitudes)?)?)
    }

    pub fn oracle(self, noise: ChaCha8Rng) -> SgqtOracle {
        SgqtOracle { problem: self, rng: noise }
    }
}

/// [`SgqtProblem`] together with its measurement noise.
#[derive(Debug, Clone)]
pub struct SgqtOracle {
    problem: SgqtProblem,
    rng: ChaCha8Rng,
}

impl SgqtOracle {
    pub fn problem(&self) -> &SgqtProblem {
        &self.problem
    }
}

impl Oracle for SgqtOracle {
    fn dim(&self) -> usize {
        self.problem.dim()
    }
    fn objective(&mut self, z: &[Complex64]) -> Result<f64> {
        self.problem.infidelity(z, &mut self.rng)
    }
    fn has_fidelity(&self) -> bool {
        true
    }
    fn fidelity(&mut self, a: &[Complex64], b: &[Complex64]) -> Result<f64> {
        let (ga, gb) = (self.problem.guess(a)?, self.problem.guess(b)?);
        fidelity_with_shots(&ga, &gb, self.problem.shots, &mut self.rng)
    }
    fn exact_objective(&self, z: &[Complex64]) -> Option<f64> {
        self.problem.exact_infidelity(z).ok()
    }
    /// Rescales the guess amplitudes to unit norm. Without this the norm
    /// grows with every step and the infidelity gradient shrinks as `1/‖z‖`.
    fn project(&self, z: &mut [Complex64]) {
        let norm = z.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 && norm.is_finite() {
            z.iter_mut().for_each(|w| *w /= norm);
        }
    }
}
