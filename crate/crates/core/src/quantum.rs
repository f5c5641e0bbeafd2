//! Dense statevector simulator.
//!
//! Basis index bit `q` is the state of qubit `q`, so qubit 0 is the least
//! significant bit.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;

/// Largest register the simulator accepts for dense operations.
pub const MAX_DENSE_QUBITS: usize = 12;

/// Largest register representable at all.
pub const MAX_QUBITS: usize = 24;

const NORM_TOL: f64 = 1e-10;

/// A single-qubit gate `[[u00, u01], [u10, u11]]`.
pub type Gate = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::Parameter(format!("qubit count must be in 1..={MAX_QUBITS}, got {n}")));
    }
    Ok(())
}

/// Normalized pure state of `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Wraps amplitudes that are already normalized within 1e-10.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n_qubits = qubits_for_len(amplitudes.len())?;
        let norm = l2(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Parameter(format!("state has norm {norm}, expected 1")));
        }
        Ok(Self { n_qubits, amplitudes })
    }

    /// Scales `amplitudes` to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let n_qubits = qubits_for_len(amplitudes.len())?;
        let norm = l2(&amplitudes);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Parameter(format!("cannot normalize a vector of norm {norm}")));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { n_qubits, amplitudes })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::Parameter(format!("basis index {index} out of range for {n_qubits} qubits")));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(Self { n_qubits, amplitudes })
    }

    /// `|0…0⟩`
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        l2(&self.amplitudes)
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.same_register(other)?;
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|⟨self|other⟩|²`, clamped to `[0, 1]`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr().clamp(0.0, 1.0))
    }

    fn same_register(&self, other: &StateVector) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Dimension(format!("states on {} and {} qubits", self.n_qubits, other.n_qubits)));
        }
        Ok(())
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::Parameter(format!("qubit {q} out of range for {} qubits", self.n_qubits)));
        }
        Ok(())
    }

    /// Applies `gate` to qubit `q`.
    pub fn apply_gate(&mut self, q: usize, gate: &Gate) -> Result<()> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        for i in 0..self.amplitudes.len() {
            if i & bit == 0 {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i | bit];
                self.amplitudes[i] = gate[0][0] * a0 + gate[0][1] * a1;
                self.amplitudes[i | bit] = gate[1][0] * a0 + gate[1][1] * a1;
            }
        }
        Ok(())
    }

    /// Controlled-Z between qubits `a` and `b`.
    pub fn apply_cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(Error::Parameter("controlled-Z needs two distinct qubits".into()));
        }
        let mask = (1usize << a) | (1usize << b);
        for (i, amp) in self.amplitudes.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
        Ok(())
    }
}

fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

fn qubits_for_len(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::Dimension(format!("{len} amplitudes is not a register of at least one qubit")));
    }
    let n = len.trailing_zeros() as usize;
    check_qubits(n)?;
    Ok(n)
}

/// Haar-random pure state: normalized i.i.d. standard complex Gaussians.
pub fn haar_random_state<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<StateVector> {
    check_qubits(n_qubits)?;
    let amps = (0..1usize << n_qubits)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    StateVector::normalized(amps)
}

/// `W(z) = exp(−i(zσ₊ + z*σ₋))` with `σ± = σˣ ± iσʸ`, whose generator is
/// `2Re(z)σˣ − 2Im(z)σʸ = [[0, 2z], [2z*, 0]]`.
pub fn w_gate(z: Complex64) -> Gate {
    let r = 2.0 * z.norm();
    // sin(r)/r stays finite at z = 0.
    let sinc = if r < 1e-8 { 1.0 - r * r / 6.0 } else { r.sin() / r };
    let off = -I * sinc * 2.0;
    [[Complex64::from(r.cos()), off * z], [off * z.conj(), Complex64::from(r.cos())]]
}

/// One-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// Tensor product of Pauli operators, stored as bit masks: `x_mask` marks
/// X or Y factors and `z_mask` marks Z or Y factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    x_mask: usize,
    z_mask: usize,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        Ok(Self { n_qubits, x_mask: 0, z_mask: 0 })
    }

    /// Sets the factor on qubit `q`.
    pub fn with(mut self, q: usize, p: Pauli) -> Result<Self> {
        if q >= self.n_qubits {
            return Err(Error::Parameter(format!("qubit {q} out of range for {} qubits", self.n_qubits)));
        }
        let bit = 1usize << q;
        self.x_mask &= !bit;
        self.z_mask &= !bit;
        match p {
            Pauli::I => {}
            Pauli::X => self.x_mask |= bit,
            Pauli::Y => {
                self.x_mask |= bit;
                self.z_mask |= bit;
            }
            Pauli::Z => self.z_mask |= bit,
        }
        Ok(self)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn factor(&self, q: usize) -> Pauli {
        let bit = 1usize << q;
        match (self.x_mask & bit != 0, self.z_mask & bit != 0) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn y_phase(&self) -> Complex64 {
        match (self.x_mask & self.z_mask).count_ones() % 4 {
            0 => ONE,
            1 => I,
            2 => -ONE,
            _ => -I,
        }
    }

    /// `P|i⟩ = phase(i)|i ⊕ x_mask⟩`.
    #[inline]
    fn phase(&self, i: usize, y_phase: Complex64) -> Complex64 {
        if (i & self.z_mask).count_ones().is_multiple_of(2) {
            y_phase
        } else {
            -y_phase
        }
    }

    /// `out += coeff · P ψ`
    pub fn apply_add(&self, coeff: Complex64, psi: &[Complex64], out: &mut [Complex64]) {
        let yp = self.y_phase() * coeff;
        for (i, a) in psi.iter().enumerate() {
            out[i ^ self.x_mask] += self.phase(i, yp) * a;
        }
    }

    /// `⟨ψ|P|ψ⟩` for a normalized state.
    pub fn expectation(&self, psi: &StateVector) -> f64 {
        let yp = self.y_phase();
        let amps = psi.amplitudes();
        let mut acc = ZERO;
        for (i, a) in amps.iter().enumerate() {
            acc += amps[i ^ self.x_mask].conj() * self.phase(i, yp) * a;
        }
        acc.re
    }

    /// Whether the dense matrix of this string is real.
    pub fn is_real(&self) -> bool {
        (self.x_mask & self.z_mask).count_ones().is_multiple_of(2)
    }

    fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }
}

impl std::fmt::Display for PauliString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for q in 0..self.n_qubits {
            let c = match self.factor(q) {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for PauliString {
    type Err = Error;

    /// Character `q` is the factor on qubit `q`, e.g. `"XZI"`.
    fn from_str(s: &str) -> Result<Self> {
        let mut out = Self::identity(s.chars().count())?;
        for (q, c) in s.chars().enumerate() {
            let p = match c {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                _ => return Err(Error::Parameter(format!("invalid Pauli symbol `{c}`"))),
            };
            out = out.with(q, p)?;
        }
        Ok(out)
    }
}

/// Real linear combination of Pauli strings; hermitian by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTermSum {
    n_qubits: usize,
    terms: Vec<(f64, PauliString)>,
}

impl PauliTermSum {
    pub fn new(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        Ok(Self { n_qubits, terms: Vec::new() })
    }

    pub fn push(&mut self, coeff: f64, term: PauliString) -> Result<()> {
        if term.n_qubits() != self.n_qubits {
            return Err(Error::Dimension(format!(
                "term on {} qubits added to a {}-qubit operator",
                term.n_qubits(),
                self.n_qubits
            )));
        }
        if !coeff.is_finite() {
            return Err(Error::Parameter(format!("non-finite coefficient {coeff}")));
        }
        self.terms.push((coeff, term));
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Upper bound on the spectral norm: `Σ|cᵢ|`.
    pub fn norm_bound(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }

    fn check_dense(&self) -> Result<()> {
        if self.n_qubits > MAX_DENSE_QUBITS {
            return Err(Error::Capability(format!(
                "dense operators are limited to {MAX_DENSE_QUBITS} qubits, got {}",
                self.n_qubits
            )));
        }
        Ok(())
    }

    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        self.check_dense()?;
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for (c, p) in &self.terms {
            let yp = p.y_phase() * *c;
            for i in 0..dim {
                m[(i ^ p.x_mask, i)] += p.phase(i, yp);
            }
        }
        Ok(m)
    }

    /// Exact `⟨ψ|H|ψ⟩`.
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        self.check_state(psi)?;
        Ok(self.terms.iter().map(|(c, p)| c * p.expectation(psi)).sum())
    }

    fn check_state(&self, psi: &StateVector) -> Result<()> {
        if psi.n_qubits() != self.n_qubits {
            return Err(Error::Dimension(format!(
                "{}-qubit state measured against a {}-qubit operator",
                psi.n_qubits(),
                self.n_qubits
            )));
        }
        Ok(())
    }
}

/// Nearest-neighbour bonds of an open chain, plus `(n−1, 0)` for a ring.
pub fn chain_bonds(n: usize, periodic: bool) -> Result<Vec<(usize, usize)>> {
    check_qubits(n)?;
    if periodic && n < 3 {
        return Err(Error::Parameter(format!(
            "a periodic chain needs at least 3 qubits, got {n}; smaller rings repeat a bond"
        )));
    }
    let mut bonds: Vec<_> = (0..n.saturating_sub(1)).map(|q| (q, q + 1)).collect();
    if periodic {
        bonds.push((n - 1, 0));
    }
    Ok(bonds)
}

/// `j Σ_bonds (XX + YY + ZZ) + h Σ_q Z_q`. Terms are ordered bond by bond
/// (XX, YY, ZZ), followed by the field terms.
pub fn heisenberg_hamiltonian(n: usize, j: f64, h: f64, periodic: bool) -> Result<PauliTermSum> {
    let bonds = chain_bonds(n, periodic)?;
    let mut ham = PauliTermSum::new(n)?;
    let id = PauliString::identity(n)?;
    for (a, b) in bonds {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            ham.push(j, id.with(a, p)?.with(b, p)?)?;
        }
    }
    for q in 0..n {
        ham.push(h, id.with(q, Pauli::Z)?)?;
    }
    Ok(ham)
}

/// Smallest eigenvalue of `h`, by dense diagonalization.
pub fn exact_ground_energy(h: &PauliTermSum) -> Result<f64> {
    h.check_dense()?;
    let dense = h.to_dense()?;
    let min = if h.terms().iter().all(|(_, p)| p.is_real()) {
        let real = dense.map(|z| z.re);
        SymmetricEigen::new(real).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    } else {
        HermitianMatrix::new(dense)?.min_eigenvalue()?
    };
    if !min.is_finite() {
        return Err(Error::Numerical("diagonalization produced a non-finite eigenvalue".into()));
    }
    Ok(min)
}

/// Measurement budget: a finite number of shots or the exact value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ShotsRepr", into = "ShotsRepr")]
pub enum Shots {
    Finite(u64),
    Exact,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ShotsRepr {
    Count(u64),
    Text(String),
}

impl From<Shots> for ShotsRepr {
    fn from(s: Shots) -> Self {
        match s {
            Shots::Finite(n) => ShotsRepr::Count(n),
            Shots::Exact => ShotsRepr::Text("exact".into()),
        }
    }
}

impl TryFrom<ShotsRepr> for Shots {
    type Error = Error;

    fn try_from(r: ShotsRepr) -> Result<Self> {
        match r {
            ShotsRepr::Count(0) => Err(Error::Config("shots must be at least 1".into())),
            ShotsRepr::Count(n) => Ok(Shots::Finite(n)),
            ShotsRepr::Text(s) => s.parse(),
        }
    }
}

impl std::fmt::Display for Shots {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Shots::Finite(n) => write!(f, "{n}"),
            Shots::Exact => write!(f, "exact"),
        }
    }
}

impl std::str::FromStr for Shots {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exact" | "inf" | "infinite" => Ok(Shots::Exact),
            t => match t.parse::<u64>() {
                Ok(n) if n > 0 => Ok(Shots::Finite(n)),
                _ => Err(Error::Config(format!("invalid shot count `{s}`"))),
            },
        }
    }
}

/// Fraction of successes in `shots` Bernoulli(`p`) trials.
fn sample_frequency<R: Rng + ?Sized>(p: f64, shots: u64, rng: &mut R) -> Result<f64> {
    let p = p.clamp(0.0, 1.0);
    let dist = Binomial::new(shots, p).map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(dist.sample(rng) as f64 / shots as f64)
}

/// Energy estimate from measuring each term separately with the full shot
/// budget. Identity terms are not sampled.
pub fn expectation_with_shots<R: Rng + ?Sized>(
    psi: &StateVector,
    h: &PauliTermSum,
    shots: Shots,
    rng: &mut R,
) -> Result<f64> {
    h.check_state(psi)?;
    let Shots::Finite(n) = shots else {
        return h.expectation(psi);
    };
    let mut total = 0.0;
    for (c, p) in h.terms() {
        let exact = p.expectation(psi);
        let mean = if p.is_identity() { exact } else { 2.0 * sample_frequency((1.0 + exact) / 2.0, n, rng)? - 1.0 };
        total += c * mean;
    }
    Ok(total)
}

/// `Binomial(N, |⟨ψ|φ⟩|²)/N`, or the exact overlap for [`Shots::Exact`].
pub fn fidelity_with_shots<R: Rng + ?Sized>(
    psi: &StateVector,
    phi: &StateVector,
    shots: Shots,
    rng: &mut R,
) -> Result<f64> {
    let p = psi.fidelity(phi)?;
    match shots {
        Shots::Exact => Ok(p),
        Shots::Finite(n) => sample_frequency(p, n, rng),
    }
}

/// Applies `exp(−iΔt_m H_m)` for each slice in order, first slice first.
pub fn evolve_piecewise(psi0: &StateVector, slices: &[(DMatrix<Complex64>, f64)]) -> Result<StateVector> {
    let mut amps = nalgebra::DVector::from_column_slice(psi0.amplitudes());
    for (m, (gen, dt)) in slices.iter().enumerate() {
        if gen.nrows() != psi0.dim() {
            return Err(Error::Dimension(format!(
                "slice {m} generator is {}x{}, state has dimension {}",
                gen.nrows(),
                gen.ncols(),
                psi0.dim()
            )));
        }
        let h = HermitianMatrix::new(gen.clone()).map_err(|e| Error::Parameter(format!("slice {m} generator: {e}")))?;
        let (vals, vecs) = h.spectral()?;
        let mut coeffs = vecs.adjoint() * &amps;
        for (c, l) in coeffs.iter_mut().zip(&vals) {
            *c *= Complex64::from_polar(1.0, -dt * l);
        }
        amps = vecs * coeffs;
    }
    StateVector::normalized(amps.iter().copied().collect())
}

/// `exp(−iΔt G)ψ` for `G = Σ cᵢPᵢ` with complex coefficients, by a Taylor
/// series on sub-steps. `G` need not be hermitian; the result is rescaled
/// to unit norm after every sub-step and at the end.
pub fn evolve_pauli_generator(
    psi: &StateVector,
    generator: &[(Complex64, PauliString)],
    dt: f64,
) -> Result<StateVector> {
    if generator.iter().any(|(_, p)| p.n_qubits() != psi.n_qubits()) {
        return Err(Error::Dimension("generator and state act on different registers".into()));
    }
    let bound: f64 = generator.iter().map(|(c, _)| c.norm()).sum::<f64>() * dt.abs();
    if !bound.is_finite() {
        return Err(Error::Numerical("non-finite generator".into()));
    }
    let substeps = bound.ceil().max(1.0) as usize;
    let tau = dt / substeps as f64;
    let factor = -I * tau;

    let dim = psi.dim();
    let mut state = psi.amplitudes().to_vec();
    let mut term = vec![ZERO; dim];
    let mut next = vec![ZERO; dim];
    for _ in 0..substeps {
        term.copy_from_slice(&state);
        for order in 1..=40 {
            next.iter_mut().for_each(|x| *x = ZERO);
            let scale = factor / order as f64;
            for (c, p) in generator {
                p.apply_add(scale * c, &term, &mut next);
            }
            std::mem::swap(&mut term, &mut next);
            let mut size = 0.0;
            for (s, t) in state.iter_mut().zip(&term) {
                *s += t;
                size += t.norm_sqr();
            }
            if size < 1e-32 {
                break;
            }
        }
        let norm = l2(&state);
        if !(norm > 1e-300 && norm.is_finite()) {
            return Err(Error::Numerical(format!("evolved state has norm {norm}")));
        }
        state.iter_mut().for_each(|a| *a /= norm);
    }
    StateVector::normalized(state)
}
