// Copyright 2026 The spin-dephasing Contributors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration files.
//!
//! A run configuration is a JSON object:
//!
//! ```json
//! {
//!   "reference_j": 1.0,
//!   "ensemble": { "n_total": 10, "n_system": 2,
//!                 "model": { "kind": "nearest_neighbor_ring", "j": 1.0 },
//!                 "uniform_field": 1.0 },
//!   "env": { "kind": "thermal", "beta": 1.0 },
//!   "system_state": { "kind": "uniform_superposition" },
//!   "grid": { "start": 0.0, "stop": 6.283185307179586, "points": 1000 },
//!   "out": "fig1.csv"
//! }
//! ```
//!
//! `reference_j` is required. Grid times and inverse temperatures are given
//! in units of 1/J with J = `reference_j`, and every time column is written
//! in the same units. Couplings and fields in the ensemble are absolute.
//! `ensemble_file` (resolved against the directory of the configuration) may
//! replace the inline `ensemble`.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize};

use spin_dephasing::env::EnvEnergy;
use spin_dephasing::{
    EnsembleDoc, EnsembleSpec, EnvKind, EnvPopulations, ReducedState, TimeGrid, DEFAULT_ENUMERATION_CAP,
};

/// Inverse temperature in units of 1/J; `"inf"` selects the ground manifold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Beta {
    Finite(f64),
    Infinite,
}

impl Beta {
    /// File-name friendly label: `0`, `1.5`, `inf`.
    pub fn label(self) -> String {
        match self {
            Beta::Finite(b) => format!("{b}"),
            Beta::Infinite => "inf".into(),
        }
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl std::str::FromStr for Beta {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s == "inf" {
            return Ok(Beta::Infinite);
        }
        match s.parse::<f64>() {
            Ok(b) if b.is_finite() && b >= 0.0 => Ok(Beta::Finite(b)),
            _ => Err(format!("invalid beta `{s}`: expected a number >= 0 or `inf`")),
        }
    }
}

impl<'de> Deserialize<'de> for Beta {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(b) => format!("{b}").parse().map_err(serde::de::Error::custom),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl Serialize for Beta {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Beta::Finite(b) => s.serialize_f64(*b),
            Beta::Infinite => s.serialize_str("inf"),
        }
    }
}

/// Initial environment state.
#[derive(Clone, Debug, Default, PartialEq, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvConfig {
    #[default]
    Mixed,
    /// Doubled spin values of one environment configuration.
    Basis { sigma: Vec<i32> },
    Thermal {
        beta: Beta,
        #[serde(default)]
        energy: EnvEnergy,
    },
    /// Diagonal weights, normalized on load.
    Explicit { weights: Vec<f64> },
    /// Equal-amplitude pure state over all configurations.
    UniformSuperposition,
    /// Pure state with amplitudes given as [re, im] pairs.
    Pure { amplitudes: Vec<[f64; 2]> },
}

impl EnvConfig {
    /// Pure-state amplitudes, when the environment starts pure and coherent.
    pub fn pure_amplitudes(&self, spec: &EnsembleSpec) -> Result<Option<Vec<Complex64>>> {
        let dim = spec.levels().pow(spec.n_env() as u32);
        Ok(match self {
            EnvConfig::UniformSuperposition => Some(vec![Complex64::new(1.0, 0.0); dim]),
            EnvConfig::Pure { amplitudes } => {
                if amplitudes.len() != dim {
                    bail!("environment amplitudes: expected {dim}, got {}", amplitudes.len());
                }
                Some(complex(amplitudes))
            }
            _ => None,
        })
    }

    /// Diagonal of the initial environment state; all the reduced dynamics depends on.
    pub fn populations(&self, spec: &EnsembleSpec, reference_j: f64) -> Result<EnvPopulations> {
        let kind = match self {
            EnvConfig::Mixed => EnvKind::Mixed,
            EnvConfig::Basis { sigma } => EnvKind::Basis(sigma.clone()),
            EnvConfig::Thermal { beta, energy } => EnvKind::Thermal {
                beta: match beta {
                    Beta::Finite(b) => Some(b / reference_j),
                    Beta::Infinite => None,
                },
                energy: *energy,
            },
            EnvConfig::Explicit { weights } => EnvKind::Explicit(weights.clone()),
            EnvConfig::UniformSuperposition | EnvConfig::Pure { .. } => {
                let amps = self.pure_amplitudes(spec)?.expect("pure kinds have amplitudes");
                EnvKind::Explicit(amps.iter().map(|z| z.norm_sqr()).collect())
            }
        };
        Ok(kind.populations(spec, DEFAULT_ENUMERATION_CAP)?)
    }
}

/// Initial system state.
#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemStateConfig {
    UniformSuperposition,
    MaximallyMixed,
    /// (|0…0⟩ + |1…1⟩)/√2 on two spin-½ sites.
    Bell,
    Pure { amplitudes: Vec<[f64; 2]> },
    Diagonal { populations: Vec<f64> },
    /// Full matrix, rows of [re, im] pairs.
    Density { matrix: Vec<Vec<[f64; 2]>> },
}

impl SystemStateConfig {
    pub fn pure_amplitudes(&self, dim: usize) -> Option<Vec<Complex64>> {
        match self {
            SystemStateConfig::UniformSuperposition => Some(vec![Complex64::new(1.0, 0.0); dim]),
            SystemStateConfig::Bell if dim == 4 => {
                let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
                Some(vec![one, zero, zero, one])
            }
            SystemStateConfig::Pure { amplitudes } if amplitudes.len() == dim => Some(complex(amplitudes)),
            _ => None,
        }
    }

    pub fn build(&self, dim: usize) -> Result<ReducedState> {
        Ok(match self {
            SystemStateConfig::UniformSuperposition => ReducedState::uniform_superposition(dim)?,
            SystemStateConfig::MaximallyMixed => ReducedState::maximally_mixed(dim),
            SystemStateConfig::Bell => {
                if dim != 4 {
                    bail!("the Bell state needs two spin-1/2 system sites (dimension 4), got {dim}");
                }
                ReducedState::pure(&self.pure_amplitudes(dim).expect("dimension 4"))?
            }
            SystemStateConfig::Pure { amplitudes } => {
                check_dim(amplitudes.len(), dim)?;
                ReducedState::pure(&complex(amplitudes))?
            }
            SystemStateConfig::Diagonal { populations } => {
                check_dim(populations.len(), dim)?;
                ReducedState::diagonal(populations)?
            }
            SystemStateConfig::Density { matrix } => {
                check_dim(matrix.len(), dim)?;
                let mut m = ndarray::Array2::zeros((dim, dim));
                for (a, row) in matrix.iter().enumerate() {
                    check_dim(row.len(), dim)?;
                    for (b, z) in row.iter().enumerate() {
                        m[[a, b]] = Complex64::new(z[0], z[1]);
                    }
                }
                ReducedState::new(m)?
            }
        })
    }
}

fn check_dim(got: usize, dim: usize) -> Result<()> {
    if got != dim {
        bail!("system state: expected dimension {dim}, got {got}");
    }
    Ok(())
}

fn complex(pairs: &[[f64; 2]]) -> Vec<Complex64> {
    pairs.iter().map(|z| Complex64::new(z[0], z[1])).collect()
}

/// Time grid in units of 1/J.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            start: 0.0,
            stop: 2.0 * PI,
            points: 1000,
        }
    }
}

impl GridConfig {
    pub fn grid(&self) -> Result<TimeGrid> {
        Ok(TimeGrid::new(self.start, self.stop, self.points)?)
    }
}

/// `a:b:n`, where `a` and `b` are numbers optionally followed by `pi`
/// (`0:2pi:1000`).
pub fn parse_grid(s: &str) -> std::result::Result<GridConfig, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("grid `{s}` is not of the form start:stop:points"));
    }
    let start = parse_time(parts[0])?;
    let stop = parse_time(parts[1])?;
    let points = parts[2]
        .trim()
        .parse::<usize>()
        .map_err(|_| format!("grid point count `{}` is not an integer", parts[2]))?;
    let g = GridConfig { start, stop, points };
    TimeGrid::new(start, stop, points).map_err(|e| e.to_string())?;
    Ok(g)
}

fn parse_time(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let value = match s.strip_suffix("pi") {
        Some("") => Ok(PI),
        Some("-") => Ok(-PI),
        Some(m) => m.parse::<f64>().map(|m| m * PI),
        None => s.parse::<f64>(),
    };
    value.map_err(|_| format!("`{s}` is not a time"))
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub reference_j: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble_file: Option<PathBuf>,
    #[serde(default)]
    pub env: EnvConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system_state: Option<SystemStateConfig>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// A configuration with its ensemble resolved.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub config: RunConfig,
    pub doc: EnsembleDoc,
    pub spec: EnsembleSpec,
}

impl Loaded {
    /// Physical time of a grid time in units of 1/J.
    pub fn physical(&self, tau: f64) -> f64 {
        tau / self.config.reference_j
    }

    pub fn system_state(&self) -> Result<ReducedState> {
        let dim = self.spec.levels().pow(self.spec.n_system() as u32);
        self.config
            .system_state
            .as_ref()
            .context("this command needs `system_state` in the configuration")?
            .build(dim)
    }
}

pub fn load(path: &Path) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let config: RunConfig =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    resolve(config, path.parent().unwrap_or(Path::new(".")))
}

pub fn resolve(config: RunConfig, base: &Path) -> Result<Loaded> {
    if !(config.reference_j.is_finite() && config.reference_j > 0.0) {
        bail!("reference_j must be a positive number, got {}", config.reference_j);
    }
    let doc = match (&config.ensemble, &config.ensemble_file) {
        (Some(doc), None) => doc.clone(),
        (None, Some(file)) => {
            let path = base.join(file);
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            EnsembleDoc::from_json(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        _ => bail!("exactly one of `ensemble` and `ensemble_file` is required"),
    };
    let spec = doc.build()?;
    Ok(Loaded { config, doc, spec })
}
