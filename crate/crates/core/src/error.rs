// Copyright 2026 The spin-dephasing Contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised while building ensembles, states and dynamical maps.
#[derive(Debug, Error)]
pub enum Error {
    #[error("enumeration needs {required} configurations but the cap is {cap}")]
    CapExceeded { required: u128, cap: u128 },

    #[error("configuration has {got} sites, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("spin value 2s = {twice} is not allowed for 2S = {twice_spin}")]
    InvalidSpin { twice: i32, twice_spin: u32 },

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("invalid coupling model: {0}")]
    InvalidModel(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid environment populations: {0}")]
    InvalidPopulations(String),

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
