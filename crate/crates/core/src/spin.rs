// Copyright 2026 The spin-dephasing Contributors
// SPDX-License-Identifier: Apache-2.0

//! Spin ensembles with pairwise ZZ couplings and longitudinal fields.
//!
//! The ensemble Hamiltonian is
//!
//!   H = −Σ_i Σ_j J_ij S_i^z S_j^z + Σ_i h_i S_i^z
//!
//! where the double sum runs over all ordered pairs. The coupling matrix is
//! stored exactly as it enters that sum, so an unordered bond (i, j) with
//! entry J contributes −2 J s_i s_j to the energy. Sites `0..n_system` form
//! the system, the remaining sites the environment.
//!
//! Spin projections are stored doubled (`2s`) so half-integer values stay
//! exact integers.

use std::fmt;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default bound on the number of configurations any enumeration may visit.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 20;

/// A spin-z eigenvalue, stored as twice its physical value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpinValue(i32);

impl SpinValue {
    pub fn from_twice(twice: i32, twice_spin: u32) -> Result<Self> {
        let bound = twice_spin as i32;
        if twice.abs() > bound || (twice - bound) % 2 != 0 {
            return Err(Error::InvalidSpin { twice, twice_spin });
        }
        Ok(Self(twice))
    }

    #[inline]
    pub const fn twice(self) -> i32 {
        self.0
    }

    /// Physical value s = twice / 2.
    #[inline]
    pub fn value(self) -> f64 {
        f64::from(self.0) * 0.5
    }
}

impl fmt::Display for SpinValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{:+}", self.0 / 2)
        } else {
            write!(f, "{:+}/2", self.0)
        }
    }
}

/// A computational-basis label: one spin projection per site.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpinConfig {
    values: Vec<SpinValue>,
}

impl SpinConfig {
    pub fn new(values: Vec<SpinValue>) -> Self {
        Self { values }
    }

    /// Build from doubled values, validating each against `twice_spin`.
    pub fn from_twice(twice: &[i32], twice_spin: u32) -> Result<Self> {
        let values = twice
            .iter()
            .map(|&v| SpinValue::from_twice(v, twice_spin))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { values })
    }

    /// Configuration with lexicographic `index` (see [`enumerate_configs`]).
    pub fn from_index(index: usize, site_count: usize, twice_spin: u32) -> Self {
        let levels = level_count(twice_spin);
        let mut digits = vec![SpinValue(0); site_count];
        let mut rest = index;
        for slot in digits.iter_mut().rev() {
            let d = rest % levels;
            rest /= levels;
            *slot = SpinValue(twice_spin as i32 - 2 * d as i32);
        }
        Self { values: digits }
    }

    /// Lexicographic index of this configuration.
    pub fn index(&self, twice_spin: u32) -> usize {
        let levels = level_count(twice_spin);
        self.values.iter().fold(0usize, |acc, v| {
            acc * levels + ((twice_spin as i32 - v.0) / 2) as usize
        })
    }

    pub fn site_count(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[SpinValue] {
        &self.values
    }

    pub fn twice_values(&self) -> impl Iterator<Item = i32> + '_ {
        self.values.iter().map(|v| v.0)
    }

    /// System configuration followed by environment configuration.
    pub fn concat(&self, other: &SpinConfig) -> SpinConfig {
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        SpinConfig { values }
    }
}

impl fmt::Display for SpinConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, v) in self.values.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// Number of spin-z levels, 2S + 1.
#[inline]
pub fn level_count(twice_spin: u32) -> usize {
    twice_spin as usize + 1
}

/// (2S+1)^site_count, checked against `cap`.
pub fn config_count(site_count: usize, twice_spin: u32, cap: u128) -> Result<usize> {
    let levels = level_count(twice_spin) as u128;
    let mut required: u128 = 1;
    for _ in 0..site_count {
        required = required.saturating_mul(levels);
        if required > cap {
            // keep multiplying so the error names the full count when it fits
            let full = (levels).checked_pow(site_count as u32).unwrap_or(u128::MAX);
            return Err(Error::CapExceeded {
                required: full,
                cap,
            });
        }
    }
    Ok(required as usize)
}

/// Iterator over every configuration of `site_count` sites.
///
/// Order is lexicographic with the first site most significant and each
/// site running from +S down to −S. This order fixes the basis index used by
/// every matrix in the crate.
#[derive(Debug, Clone)]
pub struct ConfigIter {
    current: Vec<i32>,
    twice_spin: i32,
    remaining: usize,
}

impl Iterator for ConfigIter {
    type Item = SpinConfig;

    fn next(&mut self) -> Option<SpinConfig> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let out = SpinConfig {
            values: self.current.iter().map(|&v| SpinValue(v)).collect(),
        };
        advance_odometer(&mut self.current, self.twice_spin);
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl ExactSizeIterator for ConfigIter {}

/// Step doubled spin values to the next configuration in basis order.
#[inline]
pub(crate) fn advance_odometer(twice: &mut [i32], twice_spin: i32) {
    for slot in twice.iter_mut().rev() {
        if *slot > -twice_spin {
            *slot -= 2;
            return;
        }
        *slot = twice_spin;
    }
}

pub fn enumerate_configs(site_count: usize, twice_spin: u32, cap: u128) -> Result<ConfigIter> {
    let remaining = config_count(site_count, twice_spin, cap)?;
    Ok(ConfigIter {
        current: vec![twice_spin as i32; site_count],
        twice_spin: twice_spin as i32,
        remaining,
    })
}

/// Normalization of the power-law coupling amplitude J_N(α).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerLawNormalization {
    /// J_N(α) = J independent of N.
    #[default]
    Constant,
    /// J_N(α) = J / Σ_{j≠i} r_ij^−α, unit mean field per site.
    Kac,
}

/// Interaction geometries with a closed-form coupling matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CouplingModel {
    /// J_ij = J for ring neighbours.
    NearestNeighborRing { j: f64 },
    /// J_ij = J / N for every i ≠ j.
    InfiniteRange { j: f64 },
    /// J_ij = J_N(α) / r_ij^α with minimal-image ring distance.
    PowerLawRing {
        j: f64,
        alpha: f64,
        #[serde(default)]
        normalization: PowerLawNormalization,
    },
    /// J between the four lattice neighbours of an M × M periodic square
    /// lattice; site (x, y) has index x·M + y.
    NearestNeighborTorus { side: usize, j: f64 },
    Explicit { matrix: Vec<Vec<f64>> },
}

/// Minimal-image distance between sites `i` and `j` on a ring of `n` sites.
#[inline]
pub fn ring_distance(i: usize, j: usize, n: usize) -> usize {
    let d = i.abs_diff(j);
    d.min(n - d)
}

pub fn build_coupling(model: &CouplingModel, n_total: usize) -> Result<Array2<f64>> {
    if n_total < 2 {
        return Err(Error::InvalidModel(format!(
            "need at least 2 sites, got {n_total}"
        )));
    }
    let n = n_total;
    let mut m = Array2::<f64>::zeros((n, n));
    match *model {
        CouplingModel::NearestNeighborRing { j } => {
            if n < 3 {
                return Err(Error::InvalidModel(
                    "a ring with two distinct neighbours needs at least 3 sites".into(),
                ));
            }
            for i in 0..n {
                let k = (i + 1) % n;
                m[[i, k]] = j;
                m[[k, i]] = j;
            }
        }
        CouplingModel::InfiniteRange { j } => {
            let v = j / n as f64;
            for i in 0..n {
                for k in 0..n {
                    if i != k {
                        m[[i, k]] = v;
                    }
                }
            }
        }
        CouplingModel::PowerLawRing {
            j,
            alpha,
            normalization,
        } => {
            let amplitude = match normalization {
                PowerLawNormalization::Constant => j,
                PowerLawNormalization::Kac => {
                    let mean_field: f64 = (1..n)
                        .map(|k| (ring_distance(0, k, n) as f64).powf(-alpha))
                        .sum();
                    j / mean_field
                }
            };
            for i in 0..n {
                for k in (i + 1)..n {
                    let v = amplitude / (ring_distance(i, k, n) as f64).powf(alpha);
                    m[[i, k]] = v;
                    m[[k, i]] = v;
                }
            }
        }
        CouplingModel::NearestNeighborTorus { side, j } => {
            if side < 2 || side * side != n {
                return Err(Error::InvalidModel(format!(
                    "torus of side {side} does not have {n} sites"
                )));
            }
            let idx = |x: usize, y: usize| x * side + y;
            for x in 0..side {
                for y in 0..side {
                    let here = idx(x, y);
                    for there in [idx((x + 1) % side, y), idx(x, (y + 1) % side)] {
                        if there != here {
                            m[[here, there]] = j;
                            m[[there, here]] = j;
                        }
                    }
                }
            }
        }
        CouplingModel::Explicit { ref matrix } => {
            if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
                return Err(Error::InvalidModel(format!(
                    "explicit coupling matrix must be {n}×{n}"
                )));
            }
            for (i, row) in matrix.iter().enumerate() {
                for (k, &v) in row.iter().enumerate() {
                    m[[i, k]] = v;
                }
            }
        }
    }
    Ok(m)
}

/// Reorder sites so that `order[k]` becomes site `k`.
pub fn permute_sites(matrix: &Array2<f64>, order: &[usize]) -> Result<Array2<f64>> {
    let n = matrix.nrows();
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: order.len(),
        });
    }
    for &o in order {
        if o >= n || std::mem::replace(&mut seen[o], true) {
            return Err(Error::InvalidEnsemble(format!(
                "site order is not a permutation of 0..{n}"
            )));
        }
    }
    Ok(Array2::from_shape_fn((n, n), |(a, b)| {
        matrix[[order[a], order[b]]]
    }))
}

/// Site order placing `system` first (in the given order) and the rest after
/// it in increasing index.
pub fn system_first_order(n_total: usize, system: &[usize]) -> Vec<usize> {
    let mut order = system.to_vec();
    order.extend((0..n_total).filter(|s| !system.contains(s)));
    order
}

/// Row-major indices of the `block × block` corner of an `side × side` torus.
pub fn torus_corner_block(side: usize, block: usize) -> Vec<usize> {
    (0..block)
        .flat_map(|x| (0..block).map(move |y| x * side + y))
        .collect()
}

/// N spins of quantum number S with couplings, fields and a system/environment split.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleSpec {
    n_system: usize,
    twice_spin: u32,
    couplings: Array2<f64>,
    fields: Vec<f64>,
}

impl EnsembleSpec {
    pub fn new(
        n_system: usize,
        twice_spin: u32,
        couplings: Array2<f64>,
        fields: Vec<f64>,
    ) -> Result<Self> {
        let n = couplings.nrows();
        if couplings.ncols() != n {
            return Err(Error::InvalidEnsemble("coupling matrix is not square".into()));
        }
        if n_system == 0 || n_system >= n {
            return Err(Error::InvalidEnsemble(format!(
                "system size must satisfy 1 <= p < N, got p = {n_system}, N = {n}"
            )));
        }
        if twice_spin == 0 {
            return Err(Error::InvalidEnsemble("2S must be at least 1".into()));
        }
        if fields.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: fields.len(),
            });
        }
        for i in 0..n {
            if couplings[[i, i]] != 0.0 {
                return Err(Error::InvalidEnsemble(format!(
                    "coupling diagonal must vanish, J[{i}][{i}] = {}",
                    couplings[[i, i]]
                )));
            }
            for k in (i + 1)..n {
                if couplings[[i, k]] != couplings[[k, i]] {
                    return Err(Error::InvalidEnsemble(format!(
                        "coupling matrix is not symmetric at ({i}, {k})"
                    )));
                }
            }
        }
        if couplings.iter().chain(fields.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidEnsemble("non-finite coupling or field".into()));
        }
        Ok(Self {
            n_system,
            twice_spin,
            couplings,
            fields,
        })
    }

    /// Spin-1/2 ensemble built from a coupling model with a uniform field.
    pub fn from_model(
        model: &CouplingModel,
        n_total: usize,
        n_system: usize,
        twice_spin: u32,
        field: f64,
    ) -> Result<Self> {
        let couplings = build_coupling(model, n_total)?;
        Self::new(n_system, twice_spin, couplings, vec![field; n_total])
    }

    pub fn n_total(&self) -> usize {
        self.couplings.nrows()
    }

    pub fn n_system(&self) -> usize {
        self.n_system
    }

    pub fn n_env(&self) -> usize {
        self.n_total() - self.n_system
    }

    pub fn twice_spin(&self) -> u32 {
        self.twice_spin
    }

    pub fn levels(&self) -> usize {
        level_count(self.twice_spin)
    }

    pub fn couplings(&self) -> &Array2<f64> {
        &self.couplings
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    /// Hilbert-space dimension of the system, (2S+1)^p, checked against `cap`.
    pub fn system_dim(&self, cap: u128) -> Result<usize> {
        config_count(self.n_system, self.twice_spin, cap)
    }

    pub fn env_dim(&self, cap: u128) -> Result<usize> {
        config_count(self.n_env(), self.twice_spin, cap)
    }

    pub fn with_fields(&self, fields: Vec<f64>) -> Result<Self> {
        Self::new(self.n_system, self.twice_spin, self.couplings.clone(), fields)
    }

    pub fn with_couplings(&self, couplings: Array2<f64>) -> Result<Self> {
        Self::new(self.n_system, self.twice_spin, couplings, self.fields.clone())
    }

    fn check(&self, config: &SpinConfig, expected: usize) -> Result<()> {
        if config.site_count() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: config.site_count(),
            });
        }
        let bound = self.twice_spin as i32;
        for v in config.values() {
            if v.0.abs() > bound || (v.0 - bound) % 2 != 0 {
                return Err(Error::InvalidSpin {
                    twice: v.0,
                    twice_spin: self.twice_spin,
                });
            }
        }
        Ok(())
    }

    /// Energy of a block of sites starting at `offset`, double-sum convention.
    fn block_energy(&self, offset: usize, twice: &[i32]) -> f64 {
        let mut pair = 0.0;
        for (a, &ta) in twice.iter().enumerate() {
            for (b, &tb) in twice.iter().enumerate() {
                pair += self.couplings[[offset + a, offset + b]] * f64::from(ta * tb);
            }
        }
        let field: f64 = twice
            .iter()
            .enumerate()
            .map(|(a, &ta)| self.fields[offset + a] * f64::from(ta))
            .sum();
        -0.25 * pair + 0.5 * field
    }

    /// H_S(s) = −Σ_{i,j≤p} J_ij s_i s_j + Σ_{i≤p} h_i s_i.
    pub fn hamiltonian_system(&self, s: &SpinConfig) -> Result<f64> {
        self.check(s, self.n_system)?;
        let twice: Vec<i32> = s.twice_values().collect();
        Ok(self.block_energy(0, &twice))
    }

    /// H_E(σ) = −Σ_{i,j>p} J_ij σ_i σ_j + Σ_{i>p} h_i σ_i.
    pub fn hamiltonian_env(&self, sigma: &SpinConfig) -> Result<f64> {
        self.check(sigma, self.n_env())?;
        let twice: Vec<i32> = sigma.twice_values().collect();
        Ok(self.block_energy(self.n_system, &twice))
    }

    /// Environment energy with each unordered environment bond counted once:
    /// −Σ_{p<i<j} J_ij σ_i σ_j + Σ_{i>p} h_i σ_i.
    pub fn hamiltonian_env_bonds(&self, sigma: &SpinConfig) -> Result<f64> {
        self.check(sigma, self.n_env())?;
        let twice: Vec<i32> = sigma.twice_values().collect();
        Ok(self.env_bond_energy(&twice))
    }

    pub(crate) fn env_bond_energy(&self, twice: &[i32]) -> f64 {
        let p = self.n_system;
        let mut pair = 0.0;
        for a in 0..twice.len() {
            for b in (a + 1)..twice.len() {
                pair += self.couplings[[p + a, p + b]] * f64::from(twice[a] * twice[b]);
            }
        }
        let field: f64 = twice
            .iter()
            .enumerate()
            .map(|(a, &ta)| self.fields[p + a] * f64::from(ta))
            .sum();
        -0.25 * pair + 0.5 * field
    }

    pub(crate) fn env_double_sum_energy(&self, twice: &[i32]) -> f64 {
        self.block_energy(self.n_system, twice)
    }

    /// H_SE(s, σ) = −2 Σ_{i≤p} Σ_{j>p} J_ij s_i σ_j.
    pub fn hamiltonian_interaction(&self, s: &SpinConfig, sigma: &SpinConfig) -> Result<f64> {
        self.check(s, self.n_system)?;
        self.check(sigma, self.n_env())?;
        let p = self.n_system;
        let mut acc = 0.0;
        for (i, si) in s.twice_values().enumerate() {
            for (j, sj) in sigma.twice_values().enumerate() {
                acc += self.couplings[[i, p + j]] * f64::from(si * sj);
            }
        }
        Ok(-0.5 * acc)
    }

    /// Full-ensemble energy of a configuration over all N sites.
    pub fn hamiltonian_total(&self, config: &SpinConfig) -> Result<f64> {
        self.check(config, self.n_total())?;
        let twice: Vec<i32> = config.twice_values().collect();
        Ok(self.block_energy(0, &twice))
    }

    /// Copy of this ensemble with every system–environment coupling negated.
    pub fn with_flipped_interaction(&self) -> Self {
        let mut couplings = self.couplings.clone();
        let p = self.n_system;
        let n = self.n_total();
        for i in 0..p {
            for j in p..n {
                couplings[[i, j]] = -couplings[[i, j]];
                couplings[[j, i]] = -couplings[[j, i]];
            }
        }
        Self {
            couplings,
            ..self.clone()
        }
    }
}

/// JSON document describing an ensemble.
///
/// ```json
/// { "n_total": 10, "n_system": 2, "twice_spin": 1,
///   "model": { "kind": "nearest_neighbor_ring", "j": 1.0 },
///   "fields": [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0] }
/// ```
///
/// Exactly one of `model` and `couplings` must be present. `fields` defaults
/// to zero and `uniform_field` fills every entry with one value. When
/// `system_sites` is given, those sites (0-based, in the given order) are
/// moved to the front and form the system.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleDoc {
    pub n_total: usize,
    pub n_system: usize,
    #[serde(default = "default_twice_spin")]
    pub twice_spin: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<CouplingModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fields: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform_field: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system_sites: Option<Vec<usize>>,
}

fn default_twice_spin() -> u32 {
    1
}

impl EnsembleDoc {
    pub fn build(&self) -> Result<EnsembleSpec> {
        let n = self.n_total;
        let couplings = match (&self.model, &self.couplings) {
            (Some(model), None) => build_coupling(model, n)?,
            (None, Some(matrix)) => build_coupling(
                &CouplingModel::Explicit {
                    matrix: matrix.clone(),
                },
                n,
            )?,
            _ => {
                return Err(Error::InvalidEnsemble(
                    "exactly one of `model` and `couplings` is required".into(),
                ))
            }
        };
        let fields = match (&self.fields, self.uniform_field) {
            (Some(f), None) => f.clone(),
            (None, Some(h)) => vec![h; n],
            (None, None) => vec![0.0; n],
            (Some(_), Some(_)) => {
                return Err(Error::InvalidEnsemble(
                    "`fields` and `uniform_field` are mutually exclusive".into(),
                ))
            }
        };
        if fields.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: fields.len(),
            });
        }
        let (couplings, fields) = match &self.system_sites {
            Some(sites) => {
                if sites.len() != self.n_system {
                    return Err(Error::InvalidEnsemble(format!(
                        "system_sites lists {} sites but n_system is {}",
                        sites.len(),
                        self.n_system
                    )));
                }
                let order = system_first_order(n, sites);
                let permuted = permute_sites(&couplings, &order)?;
                let fields = order.iter().map(|&o| fields[o]).collect();
                (permuted, fields)
            }
            None => (couplings, fields),
        };
        EnsembleSpec::new(self.n_system, self.twice_spin, couplings, fields)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<EnsembleSpec> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)?.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn half(t: &[i32]) -> SpinConfig {
        SpinConfig::from_twice(t, 1).unwrap()
    }

    #[test]
    fn ring_adjacency() {
        let m = build_coupling(&CouplingModel::NearestNeighborRing { j: 1.5 }, 4).unwrap();
        for i in 0..4 {
            for k in 0..4 {
                let adjacent = matches!((i as i32 - k as i32).rem_euclid(4), 1 | 3);
                assert_eq!(m[[i, k]], if adjacent { 1.5 } else { 0.0 });
            }
        }
        assert!(build_coupling(&CouplingModel::NearestNeighborRing { j: 1.0 }, 2).is_err());
    }

    #[test]
    fn infinite_range_entries() {
        let m = build_coupling(&CouplingModel::InfiniteRange { j: 2.0 }, 4).unwrap();
        for i in 0..4 {
            for k in 0..4 {
                assert_eq!(m[[i, k]], if i == k { 0.0 } else { 0.5 });
            }
        }
    }

    #[test]
    fn power_law_uses_minimal_image() {
        let model = CouplingModel::PowerLawRing {
            j: 1.0,
            alpha: 2.0,
            normalization: PowerLawNormalization::Constant,
        };
        let m = build_coupling(&model, 5).unwrap();
        // sites 1 and 3 (0-based 0 and 2): r = 2
        assert_eq!(m[[0, 2]], 0.25);
        // sites 1 and 5 wrap around: r = 1
        assert_eq!(m[[0, 4]], 1.0);
    }

    #[test]
    fn kac_normalization_gives_unit_mean_field() {
        let model = CouplingModel::PowerLawRing {
            j: 1.0,
            alpha: 1.5,
            normalization: PowerLawNormalization::Kac,
        };
        let m = build_coupling(&model, 7).unwrap();
        for i in 0..7 {
            let row: f64 = m.row(i).sum();
            assert!((row - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn torus_neighbours() {
        let m = build_coupling(&CouplingModel::NearestNeighborTorus { side: 3, j: 1.0 }, 9)
            .unwrap();
        for i in 0..9 {
            assert_eq!(m.row(i).sum(), 4.0);
        }
        assert_eq!(m[[0, 2]], 1.0); // (0,0)-(0,2) wraps
        assert_eq!(m[[0, 6]], 1.0); // (0,0)-(2,0) wraps
        assert_eq!(m[[0, 4]], 0.0);
        assert!(build_coupling(&CouplingModel::NearestNeighborTorus { side: 3, j: 1.0 }, 8)
            .is_err());
    }

    #[test]
    fn enumeration_order() {
        let one: Vec<_> = enumerate_configs(1, 1, DEFAULT_ENUMERATION_CAP)
            .unwrap()
            .map(|c| c.twice_values().collect::<Vec<_>>())
            .collect();
        assert_eq!(one, vec![vec![1], vec![-1]]);
        let two: Vec<_> = enumerate_configs(2, 1, DEFAULT_ENUMERATION_CAP)
            .unwrap()
            .map(|c| c.twice_values().collect::<Vec<_>>())
            .collect();
        assert_eq!(two, vec![vec![1, 1], vec![1, -1], vec![-1, 1], vec![-1, -1]]);
        let spin_one: Vec<_> = enumerate_configs(1, 2, DEFAULT_ENUMERATION_CAP)
            .unwrap()
            .map(|c| c.twice_values().collect::<Vec<_>>())
            .collect();
        assert_eq!(spin_one, vec![vec![2], vec![0], vec![-2]]);
    }

    #[test]
    fn enumeration_cap_names_required_count() {
        match enumerate_configs(21, 1, DEFAULT_ENUMERATION_CAP) {
            Err(Error::CapExceeded { required, cap }) => {
                assert_eq!(required, 1 << 21);
                assert_eq!(cap, 1 << 20);
            }
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn index_round_trip() {
        for (k, c) in enumerate_configs(3, 2, DEFAULT_ENUMERATION_CAP)
            .unwrap()
            .enumerate()
        {
            assert_eq!(c.index(2), k);
            assert_eq!(SpinConfig::from_index(k, 3, 2), c);
        }
    }

    #[test]
    fn invalid_spin_rejected() {
        assert!(SpinValue::from_twice(0, 1).is_err());
        assert!(SpinValue::from_twice(3, 1).is_err());
        assert!(SpinValue::from_twice(0, 2).is_ok());
    }

    #[test]
    fn scalar_hamiltonians_small_cases() {
        let mut j = Array2::zeros((2, 2));
        j[[0, 1]] = 1.0;
        j[[1, 0]] = 1.0;
        let h = 0.7;
        let spec = EnsembleSpec::new(1, 1, j.clone(), vec![h, 0.3]).unwrap();
        assert_eq!(spec.hamiltonian_system(&half(&[1])).unwrap(), h / 2.0);
        assert_eq!(spec.hamiltonian_env(&half(&[-1])).unwrap(), -0.15);
        assert_eq!(
            spec.hamiltonian_interaction(&half(&[1]), &half(&[1])).unwrap(),
            -0.5
        );
        assert!(spec.hamiltonian_system(&half(&[1, 1])).is_err());

        let mut j3 = Array2::zeros((3, 3));
        j3[[0, 1]] = 1.0;
        j3[[1, 0]] = 1.0;
        let spec = EnsembleSpec::new(2, 1, j3, vec![0.0; 3]).unwrap();
        assert_eq!(spec.hamiltonian_system(&half(&[1, 1])).unwrap(), -0.5);
    }

    #[test]
    fn zero_projection_annihilates_coupling() {
        let m = build_coupling(&CouplingModel::InfiniteRange { j: 3.0 }, 4).unwrap();
        let spec = EnsembleSpec::new(2, 2, m, vec![0.2; 4]).unwrap();
        let s = SpinConfig::from_twice(&[2, -2], 2).unwrap();
        let sigma = SpinConfig::from_twice(&[0, 0], 2).unwrap();
        assert_eq!(spec.hamiltonian_interaction(&s, &sigma).unwrap(), 0.0);
    }

    #[test]
    fn environment_energy_conventions() {
        // open environment subchain of the N = 10, p = 2 ring, all spins up, h = J
        let jref = 1.0;
        let ring = EnsembleSpec::from_model(
            &CouplingModel::NearestNeighborRing { j: jref },
            10,
            2,
            1,
            jref,
        )
        .unwrap();
        let up = half(&[1; 8]);
        assert_eq!(ring.hamiltonian_env_bonds(&up).unwrap(), 9.0 * jref / 4.0);
        // the literal double sum counts each bond twice
        assert_eq!(ring.hamiltonian_env(&up).unwrap(), 0.5 * jref);
        // storing J/2 per bond makes the double sum reproduce bond energy J
        let halved = ring.with_couplings(ring.couplings().mapv(|v| v / 2.0)).unwrap();
        assert_eq!(halved.hamiltonian_env(&up).unwrap(), 9.0 * jref / 4.0);
    }

    #[test]
    fn doc_round_trip_and_system_sites() {
        let text = r#"{"n_total": 9, "n_system": 1, "model": {"kind": "nearest_neighbor_torus", "side": 3, "j": 1.0},
                       "uniform_field": 0.5, "system_sites": [4]}"#;
        let spec = EnsembleDoc::from_json(text).unwrap().build().unwrap();
        assert_eq!(spec.n_total(), 9);
        let sys_row: f64 = spec.couplings().row(0).sum();
        assert_eq!(sys_row, 4.0);
        assert!(EnsembleDoc::from_json(r#"{"n_total": 3, "n_system": 1}"#)
            .unwrap()
            .build()
            .is_err());
    }

    fn arb_spec(max_n: usize) -> impl Strategy<Value = (EnsembleSpec, Vec<i32>)> {
        (3..=max_n, 1u32..=2).prop_flat_map(|(n, ts)| {
            (
                1..n,
                proptest::collection::vec(-2.0f64..2.0, n * n),
                proptest::collection::vec(-1.0f64..1.0, n),
                proptest::collection::vec(0..=ts as i32, n),
                Just(ts),
            )
                .prop_map(move |(p, raw, fields, digits, ts)| {
                    let mut j = Array2::zeros((n, n));
                    for a in 0..n {
                        for b in (a + 1)..n {
                            j[[a, b]] = raw[a * n + b];
                            j[[b, a]] = raw[a * n + b];
                        }
                    }
                    let twice = digits.iter().map(|d| ts as i32 - 2 * d).collect();
                    (EnsembleSpec::new(p, ts, j, fields).unwrap(), twice)
                })
        })
    }

    proptest! {
        #[test]
        fn energy_split_is_consistent((spec, twice) in arb_spec(6)) {
            let p = spec.n_system();
            let ts = spec.twice_spin();
            let full = SpinConfig::from_twice(&twice, ts).unwrap();
            let s = SpinConfig::from_twice(&twice[..p], ts).unwrap();
            let e = SpinConfig::from_twice(&twice[p..], ts).unwrap();
            let split = spec.hamiltonian_system(&s).unwrap()
                + spec.hamiltonian_env(&e).unwrap()
                + spec.hamiltonian_interaction(&s, &e).unwrap();
            let total = spec.hamiltonian_total(&full).unwrap();
            prop_assert!((split - total).abs() < 1e-12 * (1.0 + total.abs()));
        }

        #[test]
        fn builders_are_exactly_symmetric(n in 3usize..12, j in -3.0f64..3.0, alpha in 0.0f64..4.0) {
            for model in [
                CouplingModel::NearestNeighborRing { j },
                CouplingModel::InfiniteRange { j },
                CouplingModel::PowerLawRing { j, alpha, normalization: PowerLawNormalization::Kac },
            ] {
                let m = build_coupling(&model, n).unwrap();
                for a in 0..n {
                    prop_assert_eq!(m[[a, a]], 0.0);
                    for b in 0..n {
                        prop_assert_eq!(m[[a, b]].to_bits(), m[[b, a]].to_bits());
                    }
                }
            }
        }
    }
}
