// Copyright 2026 The spin-dephasing Contributors
// SPDX-License-Identifier: Apache-2.0

//! Exact pure-dephasing dynamics of a spin subsystem coupled to a spin
//! environment through ZZ interactions.
//!
//! The ensemble Hamiltonian
//!
//!   H = −Σ_i Σ_j J_ij S_i^z S_j^z + Σ_i h_i S_i^z
//!
//! is diagonal in the computational basis, so the reduced state of the first
//! p sites follows from per-pair dephasing factors. On top of that the crate
//! provides the determinant witness of non-Markovianity, its closed forms for
//! several coupling geometries, the single-spin rate and trace-distance
//! measures, negativity, and a brute-force oracle that evolves the whole
//! ensemble.

pub mod bloch;
pub mod closed_form;
pub mod dephasing;
pub mod density;
pub mod entanglement;
pub mod env;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod sampling;
pub mod single_spin;
pub mod spin;
pub mod verify;
pub mod witness;

pub use bloch::{bloch_evolution_matrix, bloch_to_density, bloch_vector, BlochVector};
pub use dephasing::{
    dephasing_factor, dephasing_factor_derivative, dephasing_spectrum, reduced_state,
    witness_log_det, DephasingEngine, DephasingSpectrum, SpectralTerm, WitnessPoint,
};
pub use density::ReducedState;
pub use env::{
    basis_state, ground_state_populations, maximally_mixed, thermal_populations, EnvEnergy,
    EnvKind, EnvPopulations,
};
pub use error::{Error, Result};
pub use spin::{
    build_coupling, enumerate_configs, CouplingModel, EnsembleDoc, EnsembleSpec,
    PowerLawNormalization, SpinConfig, SpinValue, DEFAULT_ENUMERATION_CAP,
};
pub use witness::{Episode, TimeGrid, WitnessSeries};
