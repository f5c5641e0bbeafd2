use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{check_len, Oracle};
use crate::quantum::{
    chain_bonds, evolve_pauli_generator, fidelity_with_shots, Pauli, PauliString, Shots, StateVector,
};

/// How the complex couplings `J_k` enter the slice generator
/// `−½ Σ_k J_k B_k` with `B_k = Σ_bonds σᵏσᵏ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlCoupling {
    /// Complex `J_k` used as written. The slice propagator is then not
    /// unitary when `Im J_k ≠ 0`; the evolved state is renormalized.
    #[default]
    Literal,
    /// Hermitian part only, `−½ Σ_k Re(J_k) B_k`; imaginary parts are inert.
    Hermitian,
}

impl std::str::FromStr for ControlCoupling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(ControlCoupling::Literal),
            "hermitian" => Ok(ControlCoupling::Hermitian),
            _ => Err(Error::Config(format!("unknown coupling `{s}` (expected literal or hermitian)"))),
        }
    }
}

/// State preparation by piecewise-constant control of Heisenberg couplings.
/// Controls are ordered slice by slice as `(J_x, J_y, J_z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrapeProblem {
    slices: usize,
    dt: f64,
    shots: Shots,
    coupling: ControlCoupling,
    psi0: StateVector,
    target: StateVector,
    couplings: [Vec<PauliString>; 3],
}

impl GrapeProblem {
    pub fn new(
        psi0: StateVector,
        target: StateVector,
        slices: usize,
        dt: f64,
        periodic: bool,
        shots: Shots,
    ) -> Result<Self> {
        let n = psi0.n_qubits();
        if target.n_qubits() != n {
            return Err(Error::Dimension("initial and target states differ in qubit count".into()));
        }
        if n < 2 {
            return Err(Error::Parameter("coupling control needs at least 2 qubits".into()));
        }
        if slices == 0 {
            return Err(Error::Parameter("at least one time slice is required".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Parameter(format!("slice duration must be positive, got {dt}")));
        }
        let bonds = chain_bonds(n, periodic)?;
        let id = PauliString::identity(n)?;
        let group =
            |p: Pauli| -> Result<Vec<PauliString>> { bonds.iter().map(|&(a, b)| id.with(a, p)?.with(b, p)).collect() };
        let couplings = [group(Pauli::X)?, group(Pauli::Y)?, group(Pauli::Z)?];
        Ok(Self { slices, dt, shots, coupling: ControlCoupling::default(), psi0, target, couplings })
    }

    pub fn with_coupling(mut self, coupling: ControlCoupling) -> Self {
        self.coupling = coupling;
        self
    }

    /// `3M` complex controls.
    pub fn dim(&self) -> usize {
        3 * self.slices
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.psi0
    }

    pub fn target(&self) -> &StateVector {
        &self.target
    }

    /// Generator of one slice as a list of weighted Pauli strings.
    pub fn slice_generator(&self, controls: &[Complex64]) -> Vec<(Complex64, PauliString)> {
        let mut gen = Vec::with_capacity(self.couplings.iter().map(Vec::len).sum());
        for (j, group) in controls.iter().zip(&self.couplings) {
            let j = match self.coupling {
                ControlCoupling::Literal => *j,
                ControlCoupling::Hermitian => Complex64::from(j.re),
            };
            if j == Complex64::default() {
                continue;
            }
            gen.extend(group.iter().map(|p| (j * -0.5, *p)));
        }
        gen
    }

    /// Normalized state after all slices, first slice first.
    pub fn final_state(&self, controls: &[Complex64]) -> Result<StateVector> {
        check_len(controls, self.dim())?;
        let mut psi = self.psi0.clone();
        for slice in controls.chunks_exact(3) {
            let gen = self.slice_generator(slice);
            if !gen.is_empty() {
                psi = evolve_pauli_generator(&psi, &gen, self.dt)?;
            }
        }
        Ok(psi)
    }

    pub fn infidelity<R: Rng + ?Sized>(&self, controls: &[Complex64], rng: &mut R) -> Result<f64> {
        Ok(1.0 - fidelity_with_shots(&self.target, &self.final_state(controls)?, self.shots, rng)?)
    }

    pub fn exact_infidelity(&self, controls: &[Complex64]) -> Result<f64> {
        Ok(1.0 - self.target.fidelity(&self.final_state(controls)?)?)
    }

    pub fn oracle(self, noise: ChaCha8Rng) -> GrapeOracle {
        GrapeOracle { problem: self, rng: noise }
    }
}

/// [`GrapeProblem`] together with its measurement noise.
#[derive(Debug, Clone)]
pub struct GrapeOracle {
    problem: GrapeProblem,
    rng: ChaCha8Rng,
}

impl GrapeOracle {
    pub fn problem(&self) -> &GrapeProblem {
        &self.problem
    }
}

impl Oracle for GrapeOracle {
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
        let (pa, pb) = (self.problem.final_state(a)?, self.problem.final_state(b)?);
        fidelity_with_shots(&pa, &pb, self.problem.shots, &mut self.rng)
    }
    fn exact_objective(&self, z: &[Complex64]) -> Option<f64> {
        self.problem.exact_infidelity(z).ok()
    }
}
