// Copyright 2026 The spin-dephasing Contributors
// SPDX-License-Identifier: Apache-2.0

//! Real Bloch coordinates of a D×D density matrix and the evolution matrix
//! acting on them.
//!
//! Layout (length D²):
//! - for each pair a < b in row-major order, (Re ρ_ab, Im ρ_ab);
//! - for l = 1..D−1, √(2/(l(l+1))) (Σ_{k≤l} ρ_kk − l ρ_{l+1,l+1}) (1-based);
//! - the trace.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::dephasing::DephasingEngine;
use crate::density::ReducedState;
use crate::env::EnvPopulations;
use crate::error::{Error, Result};
use crate::spin::{EnsembleSpec, DEFAULT_ENUMERATION_CAP};

/// Bloch coordinates; the last entry is the trace.
#[derive(Clone, Debug, PartialEq)]
pub struct BlochVector {
    pub coords: Array1<f64>,
}

impl BlochVector {
    pub fn dim(&self) -> usize {
        dimension_from_len(self.coords.len()).unwrap_or(0)
    }
}

fn dimension_from_len(len: usize) -> Option<usize> {
    let d = (len as f64).sqrt().round() as usize;
    (d * d == len && d > 0).then_some(d)
}

#[inline]
fn diag_coefficient(l: usize) -> f64 {
    (2.0 / (l * (l + 1)) as f64).sqrt()
}

/// Index of the Re coordinate of the (a, b) coherence, a < b.
#[inline]
pub fn coherence_offset(dim: usize, a: usize, b: usize) -> usize {
    2 * (a * dim - a * (a + 1) / 2 + (b - a - 1))
}

/// Bloch coordinates of any D×D matrix; only the upper triangle and the
/// diagonal (real parts) are read.
pub fn bloch_coords(m: &Array2<Complex64>) -> Array1<f64> {
    let d = m.nrows();
    let mut r = Array1::zeros(d * d);
    for a in 0..d {
        for b in (a + 1)..d {
            let k = coherence_offset(d, a, b);
            r[k] = m[[a, b]].re;
            r[k + 1] = m[[a, b]].im;
        }
    }
    let base = d * (d - 1);
    let mut partial = 0.0;
    for l in 1..d {
        partial += m[[l - 1, l - 1]].re;
        r[base + l - 1] = diag_coefficient(l) * (partial - l as f64 * m[[l, l]].re);
    }
    r[d * d - 1] = partial + m[[d - 1, d - 1]].re;
    r
}

/// Hermitian matrix with the given Bloch coordinates.
pub fn bloch_matrix(coords: &Array1<f64>) -> Result<Array2<Complex64>> {
    let d = dimension_from_len(coords.len()).ok_or_else(|| {
        Error::InvalidState(format!("{} is not a square Bloch length", coords.len()))
    })?;
    let mut m = Array2::zeros((d, d));
    for a in 0..d {
        for b in (a + 1)..d {
            let k = coherence_offset(d, a, b);
            let z = Complex64::new(coords[k], coords[k + 1]);
            m[[a, b]] = z;
            m[[b, a]] = z.conj();
        }
    }
    // unwind the diagonal combinations from the trace downwards
    let base = d * (d - 1);
    let mut partial = coords[d * d - 1];
    for l in (1..d).rev() {
        let y = coords[base + l - 1] / diag_coefficient(l);
        // y = S_{l+1} − (l+1) ρ_{l+1,l+1} with S_{l+1} = partial
        let rho = (partial - y) / (l + 1) as f64;
        m[[l, l]] = Complex64::new(rho, 0.0);
        partial -= rho;
    }
    m[[0, 0]] = Complex64::new(partial, 0.0);
    Ok(m)
}

pub fn bloch_vector(rho: &ReducedState) -> BlochVector {
    BlochVector {
        coords: bloch_coords(rho.matrix()),
    }
}

pub fn bloch_to_density(v: &BlochVector) -> Result<ReducedState> {
    ReducedState::new(bloch_matrix(&v.coords)?)
}

impl DephasingEngine {
    /// M_S(t): block diagonal, with a 2×2 block [[Re z, −Im z], [Im z, Re z]]
    /// for each coherence multiplier z = A e^{iθt} and identity on the
    /// diagonal sector.
    pub fn bloch_evolution_matrix(&self, t: f64) -> Array2<f64> {
        let d = self.dim();
        let n = d * d;
        let mut m = Array2::zeros((n, n));
        for a in 0..d {
            for b in (a + 1)..d {
                let k = coherence_offset(d, a, b);
                let z = self.coherence_multiplier(a, b, t);
                m[[k, k]] = z.re;
                m[[k, k + 1]] = -z.im;
                m[[k + 1, k]] = z.im;
                m[[k + 1, k + 1]] = z.re;
            }
        }
        for k in d * (d - 1)..n {
            m[[k, k]] = 1.0;
        }
        m
    }
}

pub fn bloch_evolution_matrix(
    spec: &EnsembleSpec,
    env: &EnvPopulations,
    t: f64,
) -> Result<Array2<f64>> {
    let engine = DephasingEngine::new(spec, env)?;
    let n = (engine.dim() as u128).pow(2);
    if n > DEFAULT_ENUMERATION_CAP {
        return Err(Error::CapExceeded {
            required: n,
            cap: DEFAULT_ENUMERATION_CAP,
        });
    }
    Ok(engine.bloch_evolution_matrix(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::max_abs_diff;
    use proptest::prelude::*;

    #[test]
    fn qubit_examples() {
        let mixed = bloch_vector(&ReducedState::maximally_mixed(2));
        assert_eq!(mixed.coords.to_vec(), vec![0.0, 0.0, 0.0, 1.0]);
        let up = ReducedState::diagonal(&[1.0, 0.0]).unwrap();
        assert_eq!(bloch_vector(&up).coords.to_vec(), vec![0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn coherence_layout() {
        let d = 4;
        let mut seen = Vec::new();
        for a in 0..d {
            for b in (a + 1)..d {
                seen.push(coherence_offset(d, a, b));
            }
        }
        assert_eq!(seen, (0..6).map(|k| 2 * k).collect::<Vec<_>>());
    }

    fn random_density(d: usize, raw: &[f64]) -> ReducedState {
        // G G† / tr for a complex G
        let g = Array2::from_shape_fn((d, d), |(i, j)| {
            Complex64::new(raw[2 * (i * d + j)], raw[2 * (i * d + j) + 1])
        });
        let mut m = g.dot(&g.t().mapv(|z| z.conj()));
        let tr: f64 = m.diag().iter().map(|z| z.re).sum();
        m.mapv_inplace(|z| z / tr);
        for i in 0..d {
            for j in 0..i {
                m[[i, j]] = m[[j, i]].conj();
            }
            m[[i, i]] = Complex64::new(m[[i, i]].re, 0.0);
        }
        ReducedState::new(m).unwrap()
    }

    proptest! {
        #[test]
        fn round_trip(raw in proptest::collection::vec(-1.0f64..1.0, 32), d in 2usize..=4) {
            let rho = random_density(d, &raw[..2 * d * d]);
            let back = bloch_matrix(&bloch_vector(&rho).coords).unwrap();
            prop_assert!(max_abs_diff(&back, rho.matrix()) < 1e-14);
            prop_assert!((bloch_vector(&rho).coords[d * d - 1] - 1.0).abs() < 1e-14);
        }
    }
}
