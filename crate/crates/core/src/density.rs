// Copyright 2026 The spin-dephasing Contributors
// SPDX-License-Identifier: Apache-2.0

//! System density matrices.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, hermiticity_deviation};

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = 1e-10;

/// A D×D density matrix of the system.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedState {
    matrix: Array2<Complex64>,
}

/// Deviations of a matrix from being a density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Physicality {
    pub hermiticity: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl Physicality {
    pub fn of(matrix: &Array2<Complex64>) -> Result<Self> {
        let hermiticity = hermiticity_deviation(matrix);
        let trace: Complex64 = matrix.diag().iter().sum();
        let trace_error = (trace - Complex64::new(1.0, 0.0)).norm();
        // symmetrize before the eigensolve so tiny asymmetries do not block it
        let sym = (matrix + &matrix.t().mapv(|z| z.conj())) * Complex64::new(0.5, 0.0);
        let min_eigenvalue = hermitian_eigenvalues(&sym)?.min();
        Ok(Self {
            hermiticity,
            trace_error,
            min_eigenvalue,
        })
    }

    pub fn is_physical(&self) -> bool {
        self.hermiticity <= HERMITICITY_TOL
            && self.trace_error <= TRACE_TOL
            && self.min_eigenvalue >= -POSITIVITY_TOL
    }
}

impl ReducedState {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: Array2<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidState(format!(
                "density matrix must be square and nonempty, got {:?}",
                matrix.dim()
            )));
        }
        let phys = Physicality::of(&matrix)?;
        if !phys.is_physical() {
            return Err(Error::InvalidState(format!(
                "not a density matrix: hermiticity {:e}, trace error {:e}, min eigenvalue {:e}",
                phys.hermiticity, phys.trace_error, phys.min_eigenvalue
            )));
        }
        Ok(Self { matrix })
    }

    /// Wrap without validation; callers guarantee the invariants.
    pub(crate) fn from_matrix_unchecked(matrix: Array2<Complex64>) -> Self {
        Self { matrix }
    }

    /// |ψ⟩⟨ψ| for a (not necessarily normalized) amplitude vector.
    pub fn pure(amplitudes: &[Complex64]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if amplitudes.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("pure state needs a nonzero vector".into()));
        }
        let psi: Array1<Complex64> = amplitudes.iter().map(|z| z / norm).collect();
        let n = psi.len();
        let matrix = Array2::from_shape_fn((n, n), |(i, j)| psi[i] * psi[j].conj());
        Ok(Self { matrix })
    }

    /// Equal-amplitude superposition of all basis states.
    pub fn uniform_superposition(dim: usize) -> Result<Self> {
        Self::pure(&vec![Complex64::new(1.0, 0.0); dim])
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let mut matrix = Array2::zeros((dim, dim));
        for k in 0..dim {
            matrix[[k, k]] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        Self { matrix }
    }

    /// Diagonal state with the given populations.
    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        let n = populations.len();
        let mut matrix = Array2::zeros((n, n));
        for (k, &w) in populations.iter().enumerate() {
            matrix[[k, k]] = Complex64::new(w, 0.0);
        }
        Self::new(matrix)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<Complex64> {
        self.matrix
    }

    pub fn physicality(&self) -> Result<Physicality> {
        Physicality::of(&self.matrix)
    }

    /// Largest entrywise modulus difference.
    pub fn max_abs_diff(&self, other: &ReducedState) -> f64 {
        max_abs_diff(&self.matrix, &other.matrix)
    }
}

pub fn max_abs_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    Array2::from_shape_fn((ar * br, ac * bc), |(i, j)| {
        a[[i / br, j / bc]] * b[[i % br, j % bc]]
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_are_physical() {
        for s in [
            ReducedState::maximally_mixed(4),
            ReducedState::uniform_superposition(8).unwrap(),
            ReducedState::diagonal(&[0.2, 0.3, 0.5]).unwrap(),
        ] {
            assert!(s.physicality().unwrap().is_physical());
        }
    }

    #[test]
    fn rejects_unphysical() {
        assert!(ReducedState::diagonal(&[0.5, 0.6]).is_err());
        assert!(ReducedState::diagonal(&[1.5, -0.5]).is_err());
        let mut m = ReducedState::maximally_mixed(2).into_matrix();
        m[[0, 1]] = Complex64::new(0.1, 0.0);
        assert!(ReducedState::new(m).is_err());
    }

    #[test]
    fn kron_of_identities() {
        let a = ReducedState::maximally_mixed(2).into_matrix();
        let b = ReducedState::maximally_mixed(3).into_matrix();
        let k = kron(&a, &b);
        assert_eq!(k.dim(), (6, 6));
        assert!(max_abs_diff(&k, ReducedState::maximally_mixed(6).matrix()) < 1e-16);
    }
}
