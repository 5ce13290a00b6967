// Copyright 2026 The spin-dephasing Contributors
// SPDX-License-Identifier: Apache-2.0

//! Initial environment populations.
//!
//! Only the diagonal of the environment density matrix in the computational
//! basis enters the reduced dynamics, so environments are described by a
//! probability vector indexed in basis order.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::{advance_odometer, config_count, EnsembleSpec, SpinConfig};

const NORMALIZATION_TOL: f64 = 1e-12;

/// Probability weights a_σσ over environment configurations.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvPopulations {
    site_count: usize,
    twice_spin: u32,
    weights: Vec<f64>,
}

impl EnvPopulations {
    pub fn new(site_count: usize, twice_spin: u32, weights: Vec<f64>, cap: u128) -> Result<Self> {
        let dim = config_count(site_count, twice_spin, cap)?;
        if weights.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: weights.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidPopulations(format!(
                "weights must be finite and nonnegative, found {w}"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidPopulations(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self {
            site_count,
            twice_spin,
            weights,
        })
    }

    /// Diagonal of a full environment density matrix.
    pub fn from_density_matrix(
        site_count: usize,
        twice_spin: u32,
        matrix: &Array2<Complex64>,
        cap: u128,
    ) -> Result<Self> {
        let weights = matrix.diag().iter().map(|z| z.re).collect();
        Self::new(site_count, twice_spin, weights, cap)
    }

    pub fn site_count(&self) -> usize {
        self.site_count
    }

    pub fn twice_spin(&self) -> u32 {
        self.twice_spin
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// diag(weights) as a complex matrix.
    pub fn to_density_matrix(&self) -> Array2<Complex64> {
        let n = self.dim();
        let mut m = Array2::zeros((n, n));
        for (k, &w) in self.weights.iter().enumerate() {
            m[[k, k]] = Complex64::new(w, 0.0);
        }
        m
    }

    /// Total-variation distance ½ Σ |a − b|.
    pub fn total_variation(&self, other: &EnvPopulations) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(0.5
            * self
                .weights
                .iter()
                .zip(&other.weights)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }

    /// Single-site marginals, indexed by level (+S first), when the weights
    /// factorize over sites to within 1e−15.
    pub fn product_marginals(&self) -> Option<Vec<Vec<f64>>> {
        let levels = self.twice_spin as usize + 1;
        let n = self.site_count;
        let mut marginals = vec![vec![0.0; levels]; n];
        for (idx, &w) in self.weights.iter().enumerate() {
            let mut rest = idx;
            for k in (0..n).rev() {
                marginals[k][rest % levels] += w;
                rest /= levels;
            }
        }
        for (idx, &w) in self.weights.iter().enumerate() {
            let mut rest = idx;
            let mut prod = 1.0;
            for k in (0..n).rev() {
                prod *= marginals[k][rest % levels];
                rest /= levels;
            }
            if (prod - w).abs() > 1e-15 {
                return None;
            }
        }
        Some(marginals)
    }

    pub(crate) fn check_matches(&self, spec: &EnsembleSpec) -> Result<()> {
        if self.site_count != spec.n_env() {
            return Err(Error::LengthMismatch {
                expected: spec.n_env(),
                got: self.site_count,
            });
        }
        if self.twice_spin != spec.twice_spin() {
            return Err(Error::InvalidPopulations(format!(
                "populations use 2S = {}, ensemble has 2S = {}",
                self.twice_spin,
                spec.twice_spin()
            )));
        }
        Ok(())
    }
}

/// Uniform weights 1/(2S+1)^n_env.
pub fn maximally_mixed(n_env: usize, twice_spin: u32, cap: u128) -> Result<EnvPopulations> {
    let dim = config_count(n_env, twice_spin, cap)?;
    Ok(EnvPopulations {
        site_count: n_env,
        twice_spin,
        weights: vec![1.0 / dim as f64; dim],
    })
}

/// All weight on a single configuration.
pub fn basis_state(sigma: &SpinConfig, twice_spin: u32, cap: u128) -> Result<EnvPopulations> {
    let n = sigma.site_count();
    let dim = config_count(n, twice_spin, cap)?;
    let sigma = SpinConfig::from_twice(&sigma.twice_values().collect::<Vec<_>>(), twice_spin)?;
    let mut weights = vec![0.0; dim];
    weights[sigma.index(twice_spin)] = 1.0;
    Ok(EnvPopulations {
        site_count: n,
        twice_spin,
        weights,
    })
}

/// How environment energies are evaluated for Gibbs weights.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvEnergy {
    /// Each unordered environment bond once: −Σ_{p<i<j} J_ij σ_i σ_j + Σ h_i σ_i.
    /// For a ring this is the open-chain Hamiltonian −J Σ σ_i σ_{i+1} + h Σ σ_i.
    #[default]
    Bonds,
    /// The literal double sum of the ensemble Hamiltonian restricted to the environment.
    DoubleSum,
}

impl EnvEnergy {
    fn energy(self, spec: &EnsembleSpec, twice: &[i32]) -> f64 {
        match self {
            EnvEnergy::Bonds => spec.env_bond_energy(twice),
            EnvEnergy::DoubleSum => spec.env_double_sum_energy(twice),
        }
    }
}

/// Environment energies in basis order.
pub fn env_energies(spec: &EnsembleSpec, convention: EnvEnergy, cap: u128) -> Result<Vec<f64>> {
    let dim = spec.env_dim(cap)?;
    let ts = spec.twice_spin() as i32;
    let mut twice = vec![ts; spec.n_env()];
    let mut out = Vec::with_capacity(dim);
    for _ in 0..dim {
        out.push(convention.energy(spec, &twice));
        advance_odometer(&mut twice, ts);
    }
    Ok(out)
}

/// Gibbs populations together with the partition function.
#[derive(Clone, Debug)]
pub struct ThermalPopulations {
    pub populations: EnvPopulations,
    /// ln Z; Z itself may overflow.
    pub log_partition: f64,
}

impl ThermalPopulations {
    pub fn partition(&self) -> f64 {
        self.log_partition.exp()
    }
}

/// Weights e^{−βH_E(σ)}/Z for finite β ≥ 0.
pub fn thermal_populations(
    spec: &EnsembleSpec,
    beta: f64,
    convention: EnvEnergy,
    cap: u128,
) -> Result<ThermalPopulations> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::InvalidPopulations(format!(
            "inverse temperature must be finite and nonnegative, got {beta}"
        )));
    }
    let energies = env_energies(spec, convention, cap)?;
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let mut weights: Vec<f64> = energies
        .iter()
        .map(|&e| (-beta * (e - e_min)).exp())
        .collect();
    let shifted_z: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= shifted_z;
    }
    Ok(ThermalPopulations {
        populations: EnvPopulations {
            site_count: spec.n_env(),
            twice_spin: spec.twice_spin(),
            weights,
        },
        log_partition: shifted_z.ln() - beta * e_min,
    })
}

/// Uniform mixture over the degenerate ground manifold of the environment.
///
/// Configurations within 1e−12 · max(|E_min|, max|E|) of the minimum count as degenerate.
pub fn ground_state_populations(
    spec: &EnsembleSpec,
    convention: EnvEnergy,
    cap: u128,
) -> Result<EnvPopulations> {
    let energies = env_energies(spec, convention, cap)?;
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = energies.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let tol = 1e-12 * e_min.abs().max(scale);
    let ground: Vec<bool> = energies.iter().map(|&e| e - e_min <= tol).collect();
    let count = ground.iter().filter(|g| **g).count() as f64;
    Ok(EnvPopulations {
        site_count: spec.n_env(),
        twice_spin: spec.twice_spin(),
        weights: ground
            .into_iter()
            .map(|g| if g { 1.0 / count } else { 0.0 })
            .collect(),
    })
}

/// Environment initial condition by kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvKind {
    Mixed,
    /// Doubled spin values of the occupied configuration.
    Basis(Vec<i32>),
    /// Gibbs state; `None` means β → ∞ (ground manifold).
    Thermal {
        beta: Option<f64>,
        #[serde(default)]
        energy: EnvEnergy,
    },
    Explicit(Vec<f64>),
}

impl EnvKind {
    pub fn populations(&self, spec: &EnsembleSpec, cap: u128) -> Result<EnvPopulations> {
        let ts = spec.twice_spin();
        match self {
            EnvKind::Mixed => maximally_mixed(spec.n_env(), ts, cap),
            EnvKind::Basis(twice) => {
                let sigma = SpinConfig::from_twice(twice, ts)?;
                if sigma.site_count() != spec.n_env() {
                    return Err(Error::LengthMismatch {
                        expected: spec.n_env(),
                        got: sigma.site_count(),
                    });
                }
                basis_state(&sigma, ts, cap)
            }
            EnvKind::Thermal {
                beta: Some(beta),
                energy,
            } => Ok(thermal_populations(spec, *beta, *energy, cap)?.populations),
            EnvKind::Thermal { beta: None, energy } => {
                ground_state_populations(spec, *energy, cap)
            }
            EnvKind::Explicit(w) => EnvPopulations::new(spec.n_env(), ts, w.clone(), cap),
        }
    }
}
