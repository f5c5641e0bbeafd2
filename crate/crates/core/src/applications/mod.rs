//! Quantum problems packaged as objective and fidelity oracles.

mod grape;
mod sgqt;
mod vqe;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use grape::{ControlCoupling, GrapeOracle, GrapeProblem};
pub use sgqt::{SgqtOracle, SgqtProblem};
pub use vqe::{Entangler, VqeOracle, VqeProblem};

use crate::error::Result;
use crate::estimators::Field;
use crate::oracle::{complex_to_real, Oracle, RealView};
use crate::quantum::{haar_random_state, Shots, StateVector};
use crate::{rng_stream, INSTANCE_STREAM, NOISE_STREAM};

/// Serializable description of a problem family. A seed turns it into a
/// concrete [`Instance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "application", rename_all = "snake_case")]
pub enum ProblemSpec {
    /// Heisenberg ground state from `|0…0⟩` through the layered ansatz.
    Vqe {
        qubits: usize,
        layers: usize,
        j: f64,
        h: f64,
        periodic: bool,
        shots: Shots,
        #[serde(default)]
        entangler: Entangler,
    },
    /// Preparation of `|0…0⟩` from a Haar-random state.
    Grape {
        qubits: usize,
        slices: usize,
        dt: f64,
        periodic: bool,
        shots: Shots,
        #[serde(default)]
        coupling: ControlCoupling,
    },
    /// Tomography of a Haar-random state from a Haar-random guess.
    Sgqt { qubits: usize, shots: Shots },
}

/// A concrete problem: its oracle and starting point, both in the
/// optimizer's field.
pub struct Instance {
    pub oracle: Box<dyn Oracle + Send>,
    pub z0: Vec<Complex64>,
}

impl std::fmt::Debug for Instance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Instance").field("dim", &self.oracle.dim()).field("z0", &self.z0).finish()
    }
}

impl ProblemSpec {
    pub fn vqe(qubits: usize, layers: usize, shots: Shots) -> Self {
        ProblemSpec::Vqe {
            qubits,
            layers,
            j: 1.0,
            h: 0.3,
            periodic: qubits >= 3,
            shots,
            entangler: Entangler::default(),
        }
    }

    pub fn grape(qubits: usize, slices: usize, shots: Shots) -> Self {
        ProblemSpec::Grape { qubits, slices, dt: 1.0, periodic: false, shots, coupling: ControlCoupling::default() }
    }

    pub fn sgqt(qubits: usize, shots: Shots) -> Self {
        ProblemSpec::Sgqt { qubits, shots }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProblemSpec::Vqe { .. } => "vqe",
            ProblemSpec::Grape { .. } => "grape",
            ProblemSpec::Sgqt { .. } => "sgqt",
        }
    }

    pub fn shots(&self) -> Shots {
        match self {
            ProblemSpec::Vqe { shots, .. } | ProblemSpec::Grape { shots, .. } | ProblemSpec::Sgqt { shots, .. } => {
                *shots
            }
        }
    }

    /// Number of complex parameters.
    pub fn complex_dim(&self) -> usize {
        match self {
            ProblemSpec::Vqe { qubits, layers, .. } => qubits * (layers + 1),
            ProblemSpec::Grape { slices, .. } => 3 * slices,
            ProblemSpec::Sgqt { qubits, .. } => 1usize << qubits,
        }
    }

    /// Checks the parameters by building a throwaway instance.
    pub fn validate(&self) -> Result<()> {
        self.instantiate(0, Field::Complex).map(|_| ())
    }

    /// Problem instance for `seed`. Instance data and the initial point come
    /// from one random stream, measurement noise from another.
    pub fn instantiate(&self, seed: u64, field: Field) -> Result<Instance> {
        let mut inst_rng = rng_stream(seed, INSTANCE_STREAM);
        let noise = rng_stream(seed, NOISE_STREAM);
        let (oracle, z0): (Box<dyn Oracle + Send>, Vec<Complex64>) = match self {
            ProblemSpec::Vqe { qubits, layers, j, h, periodic, shots, entangler } => {
                let p = VqeProblem::new(*qubits, *layers, *j, *h, *periodic, *shots)?.with_entangler(*entangler);
                let z0 = p.random_initial_point(&mut inst_rng);
                (Box::new(p.oracle(noise)), z0)
            }
            ProblemSpec::Grape { qubits, slices, dt, periodic, shots, coupling } => {
                let psi0 = haar_random_state(*qubits, &mut inst_rng)?;
                let target = StateVector::zero(*qubits)?;
                let p = GrapeProblem::new(psi0, target, *slices, *dt, *periodic, *shots)?.with_coupling(*coupling);
                let z0 = vec![Complex64::default(); p.dim()];
                (Box::new(p.oracle(noise)), z0)
            }
            ProblemSpec::Sgqt { qubits, shots } => {
                let unknown = haar_random_state(*qubits, &mut inst_rng)?;
                let guess = haar_random_state(*qubits, &mut inst_rng)?;
                let p = SgqtProblem::new(unknown, *shots);
                (Box::new(p.oracle(noise)), guess.into_amplitudes())
            }
        };
        Ok(match field {
            Field::Complex => Instance { oracle, z0 },
            Field::Real => Instance { oracle: Box::new(RealView::new(oracle)), z0: complex_to_real(&z0) },
        })
    }

    /// Exact minimum of the noiseless objective when it is known: the
    /// ground energy for VQE, zero for the infidelities.
    pub fn exact_minimum(&self) -> Result<f64> {
        match self {
            ProblemSpec::Vqe { qubits, layers, j, h, periodic, shots, .. } => {
                VqeProblem::new(*qubits, *layers, *j, *h, *periodic, *shots)?.ground_energy()
            }
            ProblemSpec::Grape { .. } | ProblemSpec::Sgqt { .. } => Ok(0.0),
        }
    }
}
