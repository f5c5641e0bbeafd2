//! Dense hermitian matrix utilities for the preconditioned methods.
//!
//! Real-field quantities are stored as complex matrices with zero imaginary
//! parts, so there is a single code path for both fields. Every spectral
//! function goes through one eigendecomposition of a hermitian matrix.

use std::cell::Cell;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute tolerance used when checking `M == M†`.
pub const HERMITIAN_TOL: f64 = 1e-12;

const EIGEN_MAX_SWEEPS: usize = 100_000;

thread_local! {
    static MATRIX_ALLOCATIONS: Cell<u64> = const { Cell::new(0) };
}

/// Number of p×p matrices built by this crate on the current thread.
///
/// Scalar-preconditioned runs must leave this counter untouched.
pub fn matrix_allocations() -> u64 {
    MATRIX_ALLOCATIONS.with(Cell::get)
}

pub(crate) fn note_matrix_allocation() {
    MATRIX_ALLOCATIONS.with(|c| c.set(c.get() + 1));
}

/// A square complex matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(DMatrix<Complex64>);

impl HermitianMatrix {
    /// Wraps `m` after checking hermiticity within [`HERMITIAN_TOL`].
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        check_square(&m)?;
        let dev = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > HERMITIAN_TOL {
            return Err(Error::Parameter(format!("matrix deviates from hermitian by {dev:e}")));
        }
        note_matrix_allocation();
        Ok(Self(m))
    }

    pub(crate) fn from_hermitian_unchecked(m: DMatrix<Complex64>) -> Self {
        note_matrix_allocation();
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_hermitian_unchecked(DMatrix::identity(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| Complex64::new(x, 0.0)));
        Self::from_hermitian_unchecked(DMatrix::from_diagonal(&d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    /// Real eigenvalues (ascending) and the unitary whose columns are the
    /// matching eigenvectors.
    pub fn spectral(&self) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
        let eig = SymmetricEigen::try_new(self.0.clone(), f64::EPSILON, EIGEN_MAX_SWEEPS)
            .ok_or_else(|| Error::Numerical("hermitian eigendecomposition did not converge".into()))?;
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
        Ok((values, vectors))
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.spectral()?.0)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.first().copied().unwrap_or(f64::INFINITY))
    }

    /// `U diag(f(λ)) U†` for the spectral decomposition of `self`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let (values, u) = self.spectral()?;
        let mut scaled = u.clone();
        for (j, &lambda) in values.iter().enumerate() {
            let w = f(lambda);
            scaled.column_mut(j).scale_mut(w);
        }
        let m = &scaled * u.adjoint();
        Ok(Self::from_hermitian_unchecked(symmetrize(m)))
    }

    /// Adds `shift · I`.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut m = self.0.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += shift;
        }
        Self::from_hermitian_unchecked(m)
    }

    /// `w_self · self + w_other · other`, used by the inertia recursions.
    pub fn blend(&self, w_self: f64, other: &Self, w_other: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!("cannot blend {}x{0} with {}x{1}", self.dim(), other.dim())));
        }
        Ok(Self::from_hermitian_unchecked(self.0.scale(w_self) + other.0.scale(w_other)))
    }
}

fn check_square(m: &DMatrix<Complex64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!("expected a square matrix, got {}x{}", m.nrows(), m.ncols())));
    }
    Ok(())
}

fn symmetrize(m: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let adj = m.adjoint();
    (m + adj).scale(0.5)
}

/// `(M + M†)/2`. For real inputs this is `(M + Mᵀ)/2`.
pub fn hermitize(m: &DMatrix<Complex64>) -> Result<HermitianMatrix> {
    check_square(m)?;
    Ok(HermitianMatrix::from_hermitian_unchecked(symmetrize(m.clone())))
}

/// `√(M²)`: the eigenvalues of `m` replaced by their absolute values.
pub fn matrix_abs(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    m.map_spectrum(f64::abs)
}

/// `√(M² + εI)`. Every eigenvalue of the result is at least `√ε`.
pub fn psd_sqrt_shifted(m: &HermitianMatrix, epsilon: f64) -> Result<HermitianMatrix> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Parameter(format!("epsilon must be positive, got {epsilon}")));
    }
    m.map_spectrum(|l| (l * l + epsilon).sqrt())
}

/// Solves `H x = v` through a Cholesky factorization of `H`.
pub fn solve_pd(h: &HermitianMatrix, v: &[Complex64]) -> Result<Vec<Complex64>> {
    if v.len() != h.dim() {
        return Err(Error::Dimension(format!("right-hand side has length {} for a {}x{1} matrix", v.len(), h.dim())));
    }
    let chol = Cholesky::new(h.as_matrix().clone()).ok_or(Error::NotPositiveDefinite)?;
    // The complex square root never fails, so a negative pivot shows up as
    // an imaginary diagonal entry of the factor instead of an error.
    let l = chol.l_dirty();
    if (0..h.dim()).any(|i| !(l[(i, i)].re > 0.0) || l[(i, i)].im.abs() > HERMITIAN_TOL * l[(i, i)].re.max(1.0)) {
        return Err(Error::NotPositiveDefinite);
    }
    let x = chol.solve(&DVector::from_column_slice(v));
    Ok(x.iter().copied().collect())
}
