// Copyright 2026 The spin-dephasing Contributors
// SPDX-License-Identifier: Apache-2.0

//! Brute-force reference: evolve the whole ensemble with its diagonal
//! Hamiltonian and trace out the environment. Nothing here uses dephasing
//! factors or the system/environment split of the energy.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::bloch::{bloch_coords, bloch_matrix};
use crate::density::{kron, ReducedState};
use crate::entanglement::{evolve_global, global_energies, partial_trace_env, partial_trace_env_matrix, GLOBAL_CAP};
use crate::env::EnvPopulations;
use crate::error::{Error, Result};
use crate::linalg::lu_determinant;
use crate::spin::EnsembleSpec;

/// Largest system dimension for which the superoperator is assembled.
pub const SUPEROPERATOR_MAX_DIM: usize = 16;

/// tr_E(e^{−iHt} (ρ_S ⊗ ρ_E) e^{iHt}).
pub fn oracle_reduced_state(
    spec: &EnsembleSpec,
    rho_s0: &ReducedState,
    rho_e0: &Array2<Complex64>,
    t: f64,
) -> Result<ReducedState> {
    Ok(partial_trace_env(&evolve_global(spec, rho_s0, rho_e0, t)?))
}

/// The Bloch-coordinate map assembled column by column, with its determinant.
#[derive(Clone, Debug)]
pub struct Superoperator {
    pub matrix: Array2<f64>,
    pub det: f64,
}

/// Map each Hermitian unit operator of the Bloch basis through the global
/// evolution (extended linearly beyond density matrices) and read back its
/// coordinates.
pub fn oracle_superoperator(spec: &EnsembleSpec, env: &EnvPopulations, t: f64) -> Result<Superoperator> {
    let d = spec.system_dim(GLOBAL_CAP)?;
    if d > SUPEROPERATOR_MAX_DIM {
        return Err(Error::CapExceeded {
            required: d as u128,
            cap: SUPEROPERATOR_MAX_DIM as u128,
        });
    }
    let energies = global_energies(spec, GLOBAL_CAP)?;
    let de = env.dim();
    if d * de != energies.len() {
        return Err(Error::DimensionMismatch {
            expected: energies.len() / d,
            got: de,
        });
    }
    let rho_e = env.to_density_matrix();
    let phases = Array2::from_shape_fn((d * de, d * de), |(x, y)| {
        Complex64::from_polar(1.0, -(energies[x] - energies[y]) * t)
    });
    let n = d * d;
    let mut matrix = Array2::zeros((n, n));
    for k in 0..n {
        let mut unit = Array1::zeros(n);
        unit[k] = 1.0;
        let x = bloch_matrix(&unit)?;
        let evolved = kron(&x, &rho_e) * &phases;
        let column = bloch_coords(&partial_trace_env_matrix(&evolved, d, de));
        matrix.column_mut(k).assign(&column);
    }
    let det = lu_determinant(&matrix);
    Ok(Superoperator { matrix, det })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::maximally_mixed;
    use crate::spin::{CouplingModel, DEFAULT_ENUMERATION_CAP as CAP};

    #[test]
    fn identity_at_zero() {
        let spec = EnsembleSpec::from_model(&CouplingModel::NearestNeighborRing { j: 1.0 }, 4, 2, 1, 0.5)
            .unwrap();
        let env = maximally_mixed(2, 1, CAP).unwrap();
        let s = oracle_superoperator(&spec, &env, 0.0).unwrap();
        for ((i, j), v) in s.matrix.indexed_iter() {
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((v - expected).abs() < 1e-15);
        }
        assert!((s.det - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ring_single_spin_det() {
        let spec = EnsembleSpec::from_model(&CouplingModel::NearestNeighborRing { j: 1.0 }, 5, 1, 1, 0.2)
            .unwrap();
        let env = maximally_mixed(4, 1, CAP).unwrap();
        for t in [0.3, 1.0, 2.2] {
            let s = oracle_superoperator(&spec, &env, t).unwrap();
            assert!((s.det - t.cos().powi(4)).abs() < 1e-10);
        }
    }
}
