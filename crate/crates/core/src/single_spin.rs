// Copyright 2026 The spin-dephasing Contributors
// SPDX-License-Identifier: Apache-2.0

//! A single system spin (p = 1) in a maximally mixed spin-½ environment.
//!
//! The coherence is multiplied by A(t) e^{−i h₁ t} with A(t) = Π_j cos(J_1j t),
//! which gives the pure-dephasing master equation with rate Γ_z = −A'/(2A).
//! Three non-Markovianity criteria are compared point by point: growth of the
//! determinant witness, a negative rate, and growth of the trace distance of
//! the optimal pair.

use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;

use crate::dephasing::DephasingEngine;
use crate::env::maximally_mixed;
use crate::error::{Error, Result};
use crate::spin::{EnsembleSpec, DEFAULT_ENUMERATION_CAP};

const STATE_TOL: f64 = 1e-12;

/// 2×2 qubit density matrix [[ρ11, ρ12], [ρ12*, ρ22]].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitState {
    pub rho11: f64,
    pub rho22: f64,
    pub rho12: Complex64,
}

impl QubitState {
    pub fn new(rho11: f64, rho12: Complex64) -> Result<Self> {
        let rho22 = 1.0 - rho11;
        if !(-STATE_TOL..=1.0 + STATE_TOL).contains(&rho11)
            || rho12.norm_sqr() > rho11 * rho22 + STATE_TOL
        {
            return Err(Error::InvalidState(format!(
                "ρ11 = {rho11}, |ρ12| = {} is not a qubit state",
                rho12.norm()
            )));
        }
        Ok(Self {
            rho11,
            rho22,
            rho12,
        })
    }

    pub fn matrix(&self) -> Array2<Complex64> {
        Array2::from_shape_vec(
            (2, 2),
            vec![
                Complex64::new(self.rho11, 0.0),
                self.rho12,
                self.rho12.conj(),
                Complex64::new(self.rho22, 0.0),
            ],
        )
        .expect("2×2 shape")
    }
}

/// A(t) = Π_j cos(J_j t).
pub fn amplitude(j_row: &[f64], t: f64) -> f64 {
    j_row.iter().map(|j| (j * t).cos()).product()
}

/// A'(t) = −Σ_k J_k sin(J_k t) Π_{l≠k} cos(J_l t).
pub fn amplitude_derivative(j_row: &[f64], t: f64) -> f64 {
    (0..j_row.len())
        .map(|k| {
            let rest: f64 = j_row
                .iter()
                .enumerate()
                .filter(|(l, _)| *l != k)
                .map(|(_, j)| (j * t).cos())
                .product();
            -j_row[k] * (j_row[k] * t).sin() * rest
        })
        .sum()
}

/// ρ(t): populations fixed, ρ12 ↦ ρ12 A(t) e^{−i h₁ t}.
pub fn qubit_state(rho0: &QubitState, h1: f64, j_row: &[f64], t: f64) -> QubitState {
    let phase = Complex64::from_polar(1.0, -h1 * t);
    QubitState {
        rho12: rho0.rho12 * amplitude(j_row, t) * phase,
        ..*rho0
    }
}

/// Γ_z(t), or a pole where A(t) vanishes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Rate {
    Finite(f64),
    Pole,
}

impl Rate {
    pub fn value(self) -> Option<f64> {
        match self {
            Rate::Finite(g) => Some(g),
            Rate::Pole => None,
        }
    }
}

/// Γ_z(t) = −A'(t) / (2A(t)).
pub fn dephasing_rate(j_row: &[f64], t: f64) -> Rate {
    let a = amplitude(j_row, t);
    if a == 0.0 {
        Rate::Pole
    } else {
        Rate::Finite(-amplitude_derivative(j_row, t) / (2.0 * a))
    }
}

/// Zeros of A(t) in [start, stop], located from sign changes on `samples`
/// uniform points and refined by bisection to `rel_tol`.
pub fn amplitude_zeros(j_row: &[f64], start: f64, stop: f64, samples: usize, rel_tol: f64) -> Vec<f64> {
    let h = (stop - start) / (samples - 1) as f64;
    let mut zeros = Vec::new();
    let mut prev_t = start;
    let mut prev = amplitude(j_row, start);
    for k in 1..samples {
        let t = start + k as f64 * h;
        let a = amplitude(j_row, t);
        if a == 0.0 {
            zeros.push(t);
        } else if prev != 0.0 && (a > 0.0) != (prev > 0.0) {
            let (mut lo, mut hi) = (prev_t, t);
            let scale = hi.abs().max(f64::MIN_POSITIVE);
            while hi - lo > rel_tol * scale {
                let mid = 0.5 * (lo + hi);
                if (amplitude(j_row, mid) > 0.0) == (prev > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            zeros.push(0.5 * (lo + hi));
        }
        prev_t = t;
        prev = a;
    }
    zeros
}

/// Trace distance √((ρ11ᵃ − ρ11ᵇ)² + A(t)² |ρ12ᵃ − ρ12ᵇ|²) of the evolved pair.
pub fn blp_trace_distance(a: &QubitState, b: &QubitState, j_row: &[f64], t: f64) -> f64 {
    let d11 = a.rho11 - b.rho11;
    let amp = amplitude(j_row, t);
    (d11 * d11 + amp * amp * (a.rho12 - b.rho12).norm_sqr()).sqrt()
}

/// ρ11 equal, ρ12 = ±½: the pair maximizing the trace distance, D = |A|.
pub fn optimal_pair() -> (QubitState, QubitState) {
    (
        QubitState::new(0.5, Complex64::new(0.5, 0.0)).expect("pure state"),
        QubitState::new(0.5, Complex64::new(-0.5, 0.0)).expect("pure state"),
    )
}

/// One grid point of the three-way comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AgreementRow {
    pub t: f64,
    pub a: f64,
    pub a_prime: f64,
    pub gamma_z: Rate,
    pub d_opt: f64,
    /// d/dt det M_S > 0, from the dephasing engine.
    pub flag_geo: bool,
    /// Γ_z < 0.
    pub flag_rhp: bool,
    /// d/dt D(optimal pair) > 0.
    pub flag_blp: bool,
    /// A(t) = 0: rate and witness derivative undefined.
    pub singular: bool,
}

impl AgreementRow {
    pub fn agrees(&self) -> bool {
        self.singular || (self.flag_geo == self.flag_rhp && self.flag_rhp == self.flag_blp)
    }
}

/// Ensemble of one system spin coupled to `j_row.len()` environment spins,
/// with no environment-environment couplings and no fields.
pub fn star_ensemble(j_row: &[f64]) -> Result<EnsembleSpec> {
    let n = j_row.len() + 1;
    let mut couplings = Array2::zeros((n, n));
    for (k, &j) in j_row.iter().enumerate() {
        couplings[[0, k + 1]] = j;
        couplings[[k + 1, 0]] = j;
    }
    EnsembleSpec::new(1, 1, couplings, vec![0.0; n])
}

/// Flags of the three criteria at each time.
pub fn measures_agreement_report(j_row: &[f64], times: &[f64]) -> Result<Vec<AgreementRow>> {
    if j_row.is_empty() {
        return Err(Error::InvalidModel("need at least one coupling".into()));
    }
    let spec = star_ensemble(j_row)?;
    let env = maximally_mixed(spec.n_env(), 1, DEFAULT_ENUMERATION_CAP)?;
    let engine = DephasingEngine::new(&spec, &env)?;
    let (pa, pb) = optimal_pair();
    Ok(times
        .iter()
        .map(|&t| {
            let a = amplitude(j_row, t);
            let a_prime = amplitude_derivative(j_row, t);
            let gamma_z = dephasing_rate(j_row, t);
            let d_opt = blp_trace_distance(&pa, &pb, j_row, t);
            let witness = engine.witness(t);
            let singular = a == 0.0 || witness.dlogdet_dt.is_none();
            // D = |A| so dD/dt = sign(A) A'
            let d_opt_rate = if a == 0.0 { 0.0 } else { a.signum() * a_prime };
            AgreementRow {
                t,
                a,
                a_prime,
                gamma_z,
                d_opt,
                flag_geo: witness.dlogdet_dt.is_some_and(|d| d > 0.0),
                flag_rhp: gamma_z.value().is_some_and(|g| g < 0.0),
                flag_blp: d_opt_rate > 0.0,
                singular,
            }
        })
        .collect())
}
