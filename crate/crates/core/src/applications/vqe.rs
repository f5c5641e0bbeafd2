use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{check_len, Oracle};
use crate::quantum::{
    chain_bonds, exact_ground_energy, expectation_with_shots, fidelity_with_shots, heisenberg_hamiltonian, w_gate,
    PauliTermSum, Shots, StateVector,
};

/// Entangling layer placed between rotation layers of the ansatz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entangler {
    /// Controlled-Z on every pair `(q, q+1 mod n)`. On two qubits the ring
    /// has a single bond.
    #[default]
    CzRing,
    /// Controlled-Z on `(q, q+1)` without the closing bond.
    CzChain,
}

impl std::str::FromStr for Entangler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "cz_ring" => Ok(Entangler::CzRing),
            "cz_chain" => Ok(Entangler::CzChain),
            _ => Err(Error::Config(format!("unknown entangler `{s}` (expected cz_ring or cz_chain)"))),
        }
    }
}

impl Entangler {
    fn pairs(self, n: usize) -> Result<Vec<(usize, usize)>> {
        if n < 2 {
            return Err(Error::Parameter(format!("an entangling layer needs at least 2 qubits, got {n}")));
        }
        let periodic = self == Entangler::CzRing && n >= 3;
        chain_bonds(n, periodic)
    }

    pub fn apply(self, psi: &mut StateVector) -> Result<()> {
        for (a, b) in self.pairs(psi.n_qubits())? {
            psi.apply_cz(a, b)?;
        }
        Ok(())
    }

    /// Dense unitary of the layer on `n` qubits.
    pub fn unitary(self, n: usize) -> Result<DMatrix<Complex64>> {
        let pairs = self.pairs(n)?;
        let dim = 1usize << n;
        Ok(DMatrix::from_fn(dim, dim, |i, j| {
            if i != j {
                return Complex64::new(0.0, 0.0);
            }
            let flips = pairs.iter().filter(|(a, b)| (i >> a) & 1 == 1 && (i >> b) & 1 == 1).count();
            Complex64::new(if flips % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        }))
    }
}

/// Ground-state search for the Heisenberg model with a layered `W`-gate
/// ansatz. Parameters are ordered layer by layer, qubit by qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct VqeProblem {
    n_qubits: usize,
    layers: usize,
    periodic: bool,
    shots: Shots,
    entangler: Entangler,
    hamiltonian: PauliTermSum,
}

impl VqeProblem {
    pub fn new(n_qubits: usize, layers: usize, j: f64, h: f64, periodic: bool, shots: Shots) -> Result<Self> {
        if n_qubits < 2 {
            return Err(Error::Parameter(format!("the ansatz needs at least 2 qubits, got {n_qubits}")));
        }
        let hamiltonian = heisenberg_hamiltonian(n_qubits, j, h, periodic)?;
        Ok(Self { n_qubits, layers, periodic, shots, entangler: Entangler::default(), hamiltonian })
    }

    pub fn with_entangler(mut self, entangler: Entangler) -> Self {
        self.entangler = entangler;
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn hamiltonian(&self) -> &PauliTermSum {
        &self.hamiltonian
    }

    /// `n_qubits × (layers + 1)` complex parameters.
    pub fn dim(&self) -> usize {
        self.n_qubits * (self.layers + 1)
    }

    pub fn state(&self, z: &[Complex64]) -> Result<StateVector> {
        check_len(z, self.dim())?;
        let n = self.n_qubits;
        let mut psi = StateVector::zero(n)?;
        for (l, layer) in z.chunks_exact(n).enumerate() {
            if l > 0 {
                self.entangler.apply(&mut psi)?;
            }
            for (q, zq) in layer.iter().enumerate() {
                psi.apply_gate(q, &w_gate(*zq))?;
            }
        }
        Ok(psi)
    }

    pub fn energy<R: Rng + ?Sized>(&self, z: &[Complex64], rng: &mut R) -> Result<f64> {
        expectation_with_shots(&self.state(z)?, &self.hamiltonian, self.shots, rng)
    }

    pub fn exact_energy(&self, z: &[Complex64]) -> Result<f64> {
        self.hamiltonian.expectation(&self.state(z)?)
    }

    pub fn fidelity<R: Rng + ?Sized>(&self, a: &[Complex64], b: &[Complex64], rng: &mut R) -> Result<f64> {
        fidelity_with_shots(&self.state(a)?, &self.state(b)?, self.shots, rng)
    }

    pub fn ground_energy(&self) -> Result<f64> {
        exact_ground_energy(&self.hamiltonian)
    }

    /// Starting point whose first rotation layer leaves each qubit in a
    /// Haar-random single-qubit state: `cos(4|z|)` uniform on `[−1, 1]`
    /// and a uniform phase.
    pub fn random_initial_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Complex64> {
        (0..self.dim())
            .map(|_| {
                let r = rng.random_range(-1.0f64..=1.0).acos() / 4.0;
                let phase = rng.random_range(0.0..std::f64::consts::TAU);
                Complex64::from_polar(r, phase)
            })
            .collect()
    }

    pub fn oracle(self, noise: ChaCha8Rng) -> VqeOracle {
        VqeOracle { problem: self, rng: noise }
    }
}

/// [`VqeProblem`] together with its measurement noise.
#[derive(Debug, Clone)]
pub struct VqeOracle {
    problem: VqeProblem,
    rng: ChaCha8Rng,
}

impl VqeOracle {
    pub fn problem(&self) -> &VqeProblem {
        &self.problem
    }
}

impl Oracle for VqeOracle {
    fn dim(&self) -> usize {
        self.problem.dim()
    }
    fn objective(&mut self, z: &[Complex64]) -> Result<f64> {
        self.problem.energy(z, &mut self.rng)
    }
    fn has_fidelity(&self) -> bool {
        true
    }
    fn fidelity(&mut self, a: &[Complex64], b: &[Complex64]) -> Result<f64> {
        self.problem.fidelity(a, b, &mut self.rng)
    }
    fn exact_objective(&self, z: &[Complex64]) -> Option<f64> {
        self.problem.exact_energy(z).ok()
    }
}
