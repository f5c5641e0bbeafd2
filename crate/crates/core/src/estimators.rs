//! Gain schedules, perturbation sampling and the simultaneous-perturbation
//! estimators of the gradient, the Hessian and the Fubini–Study metric.
//!
//! Every perturbation entry has unit modulus, so the reciprocals that appear
//! in the estimators reduce to conjugation: `1/Δᵢ = Δᵢ` for `Δᵢ ∈ {±1}` and
//! `1/Δᵢ* = Δᵢ` for `Δᵢ ∈ {±1, ±i}`. Both fields therefore share the same
//! formulas `gᵢ = δf/(2b)·Δᵢ` and `Hᵢⱼ ∝ Δᵢ·conj(Δ̃ⱼ)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::note_matrix_allocation;
use crate::oracle::{check_len, Oracle};

/// Field over which the optimizer moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Field::Real => "real",
            Field::Complex => "complex",
        })
    }
}

impl std::str::FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(Field::Real),
            "complex" => Ok(Field::Complex),
            other => Err(Error::Config(format!("unknown field `{other}`"))),
        }
    }
}

/// Named gain presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GainPreset {
    Standard,
    Asymptotic,
    Static,
}

impl GainPreset {
    pub fn name(self) -> &'static str {
        match self {
            GainPreset::Standard => "standard",
            GainPreset::Asymptotic => "asymptotic",
            GainPreset::Static => "static",
        }
    }
}

impl std::str::FromStr for GainPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(GainPreset::Standard),
            "asymptotic" => Ok(GainPreset::Asymptotic),
            "static" => Ok(GainPreset::Static),
            other => Err(Error::Config(format!("unknown gain preset `{other}`"))),
        }
    }
}

/// Gain parameters `(a, b, A, s, t)`.
///
/// * `a_k = a/(k+A)^s` (first-order step)
/// * `ā_k = ā/(k+A)^s` (preconditioned step, `ā = 1` unless overridden)
/// * `b_k = b/k^t`, `b̃_k = b̃/k^t` with `b̃ = b` unless overridden
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainSchedule {
    pub a: f64,
    pub b: f64,
    #[serde(rename = "A")]
    pub offset: f64,
    pub s: f64,
    pub t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_tilde: Option<f64>,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub a_bar: f64,
}

fn one() -> f64 {
    1.0
}

fn is_one(x: &f64) -> bool {
    *x == 1.0
}

/// Per-iteration gain coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains {
    pub a: f64,
    pub a_bar: f64,
    pub b: f64,
    pub b_tilde: f64,
}

impl GainSchedule {
    pub fn new(a: f64, b: f64, offset: f64, s: f64, t: f64) -> Self {
        Self { a, b, offset, s, t, b_tilde: None, a_bar: 1.0 }
    }

    pub fn preset(preset: GainPreset) -> Self {
        match preset {
            GainPreset::Standard => Self::standard(),
            GainPreset::Asymptotic => Self::asymptotic(),
            GainPreset::Static => Self::fixed(),
        }
    }

    pub fn standard() -> Self {
        Self::new(3.0, 0.1, 0.0, 0.602, 0.101)
    }

    pub fn asymptotic() -> Self {
        Self::new(3.0, 0.1, 0.0, 1.0, 1.0 / 6.0)
    }

    /// The static set: constant gains `a = b = 0.01`.
    pub fn fixed() -> Self {
        Self::new(0.01, 0.01, 0.0, 0.0, 0.0)
    }

    pub fn with_a(mut self, a: f64) -> Self {
        self.a = a;
        self
    }

    pub fn with_a_bar(mut self, a_bar: f64) -> Self {
        self.a_bar = a_bar;
        self
    }

    pub fn with_b_tilde(mut self, b_tilde: f64) -> Self {
        self.b_tilde = Some(b_tilde);
        self
    }

    /// Which preset this schedule equals, if any.
    pub fn matching_preset(&self) -> Option<GainPreset> {
        [GainPreset::Standard, GainPreset::Asymptotic, GainPreset::Static]
            .into_iter()
            .find(|p| Self::preset(*p) == *self)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite();
        if !(self.a > 0.0 && self.b > 0.0 && self.a_bar > 0.0)
            || !(self.offset >= 0.0 && self.s >= 0.0 && self.t >= 0.0)
            || ![self.a, self.b, self.offset, self.s, self.t, self.a_bar].into_iter().all(ok)
        {
            return Err(Error::Parameter(format!("invalid gain schedule {self:?}")));
        }
        if let Some(bt) = self.b_tilde {
            if !(bt > 0.0 && bt.is_finite()) {
                return Err(Error::Parameter(format!("invalid b_tilde {bt}")));
            }
        }
        Ok(())
    }

    /// Gain coefficients at the 1-indexed iteration `k`.
    pub fn gains_at(&self, k: u64) -> Result<Gains> {
        if k == 0 {
            return Err(Error::Parameter("gain schedules are 1-indexed; got k = 0".into()));
        }
        let k = k as f64;
        let step_decay = (k + self.offset).powf(self.s);
        let perturbation_decay = k.powf(self.t);
        Ok(Gains {
            a: self.a / step_decay,
            a_bar: self.a_bar / step_decay,
            b: self.b / perturbation_decay,
            b_tilde: self.b_tilde.unwrap_or(self.b) / perturbation_decay,
        })
    }
}

/// Random direction with unit-modulus entries from the field's alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationVector {
    field: Field,
    entries: Vec<Complex64>,
}

impl PerturbationVector {
    /// Builds a vector after checking every entry belongs to the alphabet.
    pub fn new(field: Field, entries: Vec<Complex64>) -> Result<Self> {
        let valid = |z: &Complex64| match field {
            Field::Real => z.im == 0.0 && z.re.abs() == 1.0,
            Field::Complex => (z.im == 0.0 && z.re.abs() == 1.0) || (z.re == 0.0 && z.im.abs() == 1.0),
        };
        if !entries.iter().all(valid) {
            return Err(Error::Parameter(format!("entries outside the {field} alphabet")));
        }
        Ok(Self { field, entries })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

const ALPHABET_COMPLEX: [Complex64; 4] =
    [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)];

/// i.i.d. uniform entries from `{±1}` or `{±1, ±i}`.
pub fn sample_perturbation<R: Rng + ?Sized>(p: usize, field: Field, rng: &mut R) -> PerturbationVector {
    let entries = (0..p)
        .map(|_| match field {
            Field::Real => Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0),
            Field::Complex => ALPHABET_COMPLEX[rng.random_range(0..4)],
        })
        .collect();
    PerturbationVector { field, entries }
}

fn perturbed(z: &[Complex64], shifts: &[(f64, &PerturbationVector)]) -> Vec<Complex64> {
    let mut out = z.to_vec();
    for (scale, delta) in shifts {
        for (o, d) in out.iter_mut().zip(delta.entries()) {
            *o += d * *scale;
        }
    }
    out
}

fn check_perturbations(z: &[Complex64], deltas: &[&PerturbationVector]) -> Result<()> {
    for d in deltas {
        check_len(d.entries(), z.len())?;
    }
    if deltas.windows(2).any(|w| w[0].field() != w[1].field()) {
        return Err(Error::Parameter("perturbations drawn from different fields".into()));
    }
    Ok(())
}

/// Gradient estimate together with the two evaluations it consumed.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub gradient: Vec<Complex64>,
    /// `f(z + b_k Δ)`
    pub f_plus: f64,
    /// `f(z − b_k Δ)`
    pub f_minus: f64,
}

/// Two-evaluation simultaneous-perturbation gradient.
///
/// In the complex field the estimate targets the Wirtinger derivative
/// `(∂f/∂z)† = ∂f/∂z*`.
pub fn gradient_estimate<O: Oracle + ?Sized>(
    oracle: &mut O,
    z: &[Complex64],
    b_k: f64,
    delta: &PerturbationVector,
) -> Result<GradientEstimate> {
    check_perturbations(z, &[delta])?;
    let f_plus = oracle.objective(&perturbed(z, &[(b_k, delta)]))?;
    let f_minus = oracle.objective(&perturbed(z, &[(-b_k, delta)]))?;
    let scale = (f_plus - f_minus) / (2.0 * b_k);
    let gradient = delta.entries().iter().map(|d| d * scale).collect();
    Ok(GradientEstimate { gradient, f_plus, f_minus })
}

/// `δ²f = f(z+bΔ+b̃Δ̃) − f(z+bΔ) − f(z−bΔ+b̃Δ̃) + f(z−bΔ)`, reusing the
/// cached `f(z ± bΔ)` from the gradient estimate. Two new evaluations.
pub fn objective_second_difference<O: Oracle + ?Sized>(
    oracle: &mut O,
    z: &[Complex64],
    b_k: f64,
    b_tilde_k: f64,
    delta: &PerturbationVector,
    delta_tilde: &PerturbationVector,
    cached: &GradientEstimate,
) -> Result<f64> {
    check_perturbations(z, &[delta, delta_tilde])?;
    let f_pp = oracle.objective(&perturbed(z, &[(b_k, delta), (b_tilde_k, delta_tilde)]))?;
    let f_mp = oracle.objective(&perturbed(z, &[(-b_k, delta), (b_tilde_k, delta_tilde)]))?;
    Ok(f_pp - cached.f_plus - f_mp + cached.f_minus)
}

/// Second difference of the fidelity with the first argument pinned at `z`.
/// Four fidelity evaluations, no objective evaluations.
pub fn fidelity_second_difference<O: Oracle + ?Sized>(
    oracle: &mut O,
    z: &[Complex64],
    b_k: f64,
    b_tilde_k: f64,
    delta: &PerturbationVector,
    delta_tilde: &PerturbationVector,
) -> Result<f64> {
    check_perturbations(z, &[delta, delta_tilde])?;
    let f_pp = oracle.fidelity(z, &perturbed(z, &[(b_k, delta), (b_tilde_k, delta_tilde)]))?;
    let f_p = oracle.fidelity(z, &perturbed(z, &[(b_k, delta)]))?;
    let f_mp = oracle.fidelity(z, &perturbed(z, &[(-b_k, delta), (b_tilde_k, delta_tilde)]))?;
    let f_m = oracle.fidelity(z, &perturbed(z, &[(-b_k, delta)]))?;
    Ok(f_pp - f_p - f_mp + f_m)
}

/// `scale · Δᵢ · conj(Δ̃ⱼ)`, the rank-one matrix shared by the Hessian and
/// metric estimators.
pub fn perturbation_outer(
    scale: f64,
    delta: &PerturbationVector,
    delta_tilde: &PerturbationVector,
) -> DMatrix<Complex64> {
    note_matrix_allocation();
    let p = delta.len();
    DMatrix::from_fn(p, p, |i, j| delta.entries()[i] * delta_tilde.entries()[j].conj() * scale)
}

/// Raw Hessian estimate `δ²f / (2 b b̃ Δᵢ Δ̃ⱼ)` (real) or
/// `δ²f / (2 b b̃ Δᵢ* Δ̃ⱼ)` (complex), plus the second difference itself.
#[allow(clippy::too_many_arguments)]
pub fn hessian_estimate<O: Oracle + ?Sized>(
    oracle: &mut O,
    z: &[Complex64],
    b_k: f64,
    b_tilde_k: f64,
    delta: &PerturbationVector,
    delta_tilde: &PerturbationVector,
    cached: &GradientEstimate,
) -> Result<(DMatrix<Complex64>, f64)> {
    let d2 = objective_second_difference(oracle, z, b_k, b_tilde_k, delta, delta_tilde, cached)?;
    let h = perturbation_outer(d2 / (2.0 * b_k * b_tilde_k), delta, delta_tilde);
    Ok((h, d2))
}

/// Raw metric estimate `−δ²F / (4 b b̃ Δᵢ Δ̃ⱼ)` (complex: `Δᵢ*`), plus `δ²F`.
pub fn metric_estimate<O: Oracle + ?Sized>(
    oracle: &mut O,
    z: &[Complex64],
    b_k: f64,
    b_tilde_k: f64,
    delta: &PerturbationVector,
    delta_tilde: &PerturbationVector,
) -> Result<(DMatrix<Complex64>, f64)> {
    let d2 = fidelity_second_difference(oracle, z, b_k, b_tilde_k, delta, delta_tilde)?;
    let h = perturbation_outer(-d2 / (4.0 * b_k * b_tilde_k), delta, delta_tilde);
    Ok((h, d2))
}

/// Which curvature a preconditioner estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureKind {
    SecondOrder,
    QuantumNatural,
}

/// Perturbation-free scalar curvature: `δ²f/(2bb̃)` or `−δ²F/(4bb̃)`.
pub fn scalar_preconditioner(second_difference: f64, b_k: f64, b_tilde_k: f64, kind: CurvatureKind) -> f64 {
    match kind {
        CurvatureKind::SecondOrder => second_difference / (2.0 * b_k * b_tilde_k),
        CurvatureKind::QuantumNatural => -second_difference / (4.0 * b_k * b_tilde_k),
    }
}
