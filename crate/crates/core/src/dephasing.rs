// Copyright 2026 The spin-dephasing Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dephasing factors and the exact reduced dynamics of the system.
//!
//! With the whole ensemble diagonal in the computational basis, the system
//! coherence between configurations s and s' evolves as
//!
//!   ρ_ss'(t) = e^{iθt} ρ_ss'(0) A_ss'(t),   θ = H_S(s') − H_S(s),
//!
//! where A_ss'(t) = Σ_σ a_σσ e^{iω_σ t} and ω_σ = 2 Σ_j σ_j Σ_i J_ij (s_i − s'_i).
//! Populations never change.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::density::ReducedState;
use crate::env::EnvPopulations;
use crate::error::{Error, Result};
use crate::spin::{advance_odometer, EnsembleSpec, SpinConfig, DEFAULT_ENUMERATION_CAP};

/// Relative tolerance under which two frequencies are merged.
pub const MERGE_REL_TOL: f64 = 1e-12;

/// One term w·e^{iωt} of a dephasing factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralTerm {
    pub weight: f64,
    pub omega: f64,
}

/// Weighted frequency list defining A_{s,s'}(t).
#[derive(Clone, Debug, PartialEq)]
pub struct DephasingSpectrum {
    pub pair: (SpinConfig, SpinConfig),
    pub terms: Vec<SpectralTerm>,
}

impl DephasingSpectrum {
    /// A(t) = Σ w e^{iωt}.
    pub fn factor(&self, t: f64) -> Complex64 {
        factor(&self.terms, t)
    }

    /// A'(t) = Σ w iω e^{iωt}.
    pub fn derivative(&self, t: f64) -> Complex64 {
        derivative(&self.terms, t)
    }

    /// Spectrum of the reversed pair (s', s).
    pub fn reversed(&self) -> Self {
        Self {
            pair: (self.pair.1.clone(), self.pair.0.clone()),
            terms: negate(&self.terms),
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).sum()
    }
}

// Both sums are divided by the total weight, which is 1 up to rounding; this
// makes A(0) = 1 exactly.
#[inline]
fn factor(terms: &[SpectralTerm], t: f64) -> Complex64 {
    let (sum, total) = terms.iter().fold((Complex64::new(0.0, 0.0), 0.0), |(acc, w), term| {
        let (s, c) = (term.omega * t).sin_cos();
        (acc + Complex64::new(term.weight * c, term.weight * s), w + term.weight)
    });
    sum / total
}

#[inline]
fn derivative(terms: &[SpectralTerm], t: f64) -> Complex64 {
    let (sum, total) = terms.iter().fold((Complex64::new(0.0, 0.0), 0.0), |(acc, w), term| {
        let (s, c) = (term.omega * t).sin_cos();
        let wo = term.weight * term.omega;
        (acc + Complex64::new(-wo * s, wo * c), w + term.weight)
    });
    sum / total
}

fn negate(terms: &[SpectralTerm]) -> Vec<SpectralTerm> {
    terms
        .iter()
        .rev()
        .map(|t| SpectralTerm {
            weight: t.weight,
            omega: -t.omega,
        })
        .collect()
}

/// Sort by frequency and merge terms whose frequencies agree within
/// `MERGE_REL_TOL` of the largest |ω|.
fn merge_terms(mut terms: Vec<SpectralTerm>) -> Vec<SpectralTerm> {
    terms.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.omega.abs()));
    let tol = MERGE_REL_TOL * scale;
    let mut out: Vec<SpectralTerm> = Vec::with_capacity(terms.len());
    let mut anchor = f64::NAN;
    for term in terms {
        match out.last_mut() {
            Some(last) if (term.omega - anchor).abs() <= tol => last.weight += term.weight,
            _ => {
                anchor = term.omega;
                out.push(term);
            }
        }
    }
    // a zero frequency stays exactly zero after merging
    for t in &mut out {
        if t.omega.abs() <= tol {
            t.omega = 0.0;
        }
    }
    out
}

/// Per-environment-site coupling c_j = Σ_i J_ij (s_i − s'_i), in doubled units
/// (the factor ½ from the doubled spins is applied by the caller).
fn coupling_vector(spec: &EnsembleSpec, s: &[i32], sp: &[i32]) -> Vec<f64> {
    let p = spec.n_system();
    let j = spec.couplings();
    (0..spec.n_env())
        .map(|e| {
            s.iter()
                .zip(sp)
                .enumerate()
                .map(|(i, (a, b))| j[[i, p + e]] * f64::from(a - b))
                .sum()
        })
        .collect()
}

fn raw_spectrum(spec: &EnsembleSpec, env: &EnvPopulations, s: &[i32], sp: &[i32]) -> Vec<SpectralTerm> {
    if s == sp {
        return vec![SpectralTerm {
            weight: 1.0,
            omega: 0.0,
        }];
    }
    let c = coupling_vector(spec, s, sp);
    let ts = spec.twice_spin() as i32;
    let mut sigma = vec![ts; spec.n_env()];
    let mut terms = Vec::new();
    for &w in env.weights() {
        if w > 0.0 {
            // ω = 2 Σ_j σ_j c_j / 2 with σ doubled and c from doubled s
            let omega: f64 = sigma
                .iter()
                .zip(&c)
                .map(|(&sj, &cj)| f64::from(sj) * cj)
                .sum::<f64>()
                * 0.5;
            terms.push(SpectralTerm { weight: w, omega });
        }
        advance_odometer(&mut sigma, ts);
    }
    merge_terms(terms)
}

/// Per-site factors of A_{s,s'} for a product environment. Sites that do not
/// couple to the pair are dropped.
fn site_factor_spectra(
    spec: &EnsembleSpec,
    marginals: &[Vec<f64>],
    s: &[i32],
    sp: &[i32],
) -> Vec<Vec<SpectralTerm>> {
    let ts = spec.twice_spin() as i32;
    coupling_vector(spec, s, sp)
        .into_iter()
        .zip(marginals)
        .filter(|(c, _)| *c != 0.0)
        .map(|(c, m)| {
            m.iter()
                .enumerate()
                .filter(|(_, w)| **w > 0.0)
                .map(|(level, &w)| SpectralTerm {
                    weight: w,
                    omega: 0.5 * f64::from(ts - 2 * level as i32) * c,
                })
                .collect()
        })
        .collect()
}

/// Spectrum of A_{s,s'} for the given environment populations.
pub fn dephasing_spectrum(
    spec: &EnsembleSpec,
    env: &EnvPopulations,
    s: &SpinConfig,
    s_prime: &SpinConfig,
) -> Result<DephasingSpectrum> {
    env.check_matches(spec)?;
    let ts = spec.twice_spin();
    for c in [s, s_prime] {
        if c.site_count() != spec.n_system() {
            return Err(Error::LengthMismatch {
                expected: spec.n_system(),
                got: c.site_count(),
            });
        }
        SpinConfig::from_twice(&c.twice_values().collect::<Vec<_>>(), ts)?;
    }
    let a: Vec<i32> = s.twice_values().collect();
    let b: Vec<i32> = s_prime.twice_values().collect();
    // compute in canonical order so reversed pairs are exact negations
    let terms = if s.index(ts) <= s_prime.index(ts) {
        raw_spectrum(spec, env, &a, &b)
    } else {
        negate(&raw_spectrum(spec, env, &b, &a))
    };
    Ok(DephasingSpectrum {
        pair: (s.clone(), s_prime.clone()),
        terms,
    })
}

/// Value of the witness at one time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WitnessPoint {
    /// ln det M_S(t); −∞ when some dephasing factor vanishes.
    pub log_det: f64,
    /// d/dt ln det M_S(t); `None` where the determinant vanishes.
    pub dlogdet_dt: Option<f64>,
}

impl WitnessPoint {
    /// det M_S, reported as 0 once it drops below 1e−300.
    pub fn det(&self) -> f64 {
        if self.log_det > (1e-300f64).ln() {
            self.log_det.exp()
        } else {
            0.0
        }
    }
}

/// Precomputed spectra for every unordered pair of system configurations.
///
/// Building the engine is the expensive step; evaluation at a time point is a
/// sum over the merged spectra.
#[derive(Clone, Debug)]
pub struct DephasingEngine {
    dim: usize,
    /// H_S for each system configuration in basis order.
    system_energies: Vec<f64>,
    /// Spectra for pairs a < b, row-major over the strict upper triangle.
    spectra: Vec<Vec<SpectralTerm>>,
    /// Same pairs as per-site factors, present when the environment
    /// populations factorize. Evaluating the product keeps full relative
    /// precision near zeros of A, where the flat sum cancels.
    site_factors: Option<Vec<Vec<Vec<SpectralTerm>>>>,
}

impl DephasingEngine {
    pub fn new(spec: &EnsembleSpec, env: &EnvPopulations) -> Result<Self> {
        Self::with_cap(spec, env, DEFAULT_ENUMERATION_CAP)
    }

    pub fn with_cap(spec: &EnsembleSpec, env: &EnvPopulations, cap: u128) -> Result<Self> {
        env.check_matches(spec)?;
        let dim = spec.system_dim(cap)?;
        let pair_count = (dim as u128) * (dim as u128);
        if pair_count > cap {
            return Err(Error::CapExceeded {
                required: pair_count,
                cap,
            });
        }
        let ts = spec.twice_spin();
        let configs: Vec<Vec<i32>> = (0..dim)
            .map(|k| SpinConfig::from_index(k, spec.n_system(), ts).twice_values().collect())
            .collect();
        let system_energies = (0..dim)
            .map(|k| spec.hamiltonian_system(&SpinConfig::from_index(k, spec.n_system(), ts)))
            .collect::<Result<Vec<_>>>()?;
        let pairs: Vec<(usize, usize)> = (0..dim)
            .flat_map(|a| ((a + 1)..dim).map(move |b| (a, b)))
            .collect();
        let spectra = pairs
            .par_iter()
            .map(|&(a, b)| raw_spectrum(spec, env, &configs[a], &configs[b]))
            .collect();
        let site_factors = env.product_marginals().map(|m| {
            pairs
                .iter()
                .map(|&(a, b)| site_factor_spectra(spec, &m, &configs[a], &configs[b]))
                .collect()
        });
        Ok(Self {
            dim,
            system_energies,
            spectra,
            site_factors,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn pair_index(&self, a: usize, b: usize) -> usize {
        debug_assert!(a < b);
        a * self.dim - a * (a + 1) / 2 + (b - a - 1)
    }

    /// A(t) of the k-th upper-triangle pair.
    fn pair_factor(&self, k: usize, t: f64) -> Complex64 {
        match &self.site_factors {
            Some(f) => f[k]
                .iter()
                .fold(Complex64::new(1.0, 0.0), |acc, site| acc * factor(site, t)),
            None => factor(&self.spectra[k], t),
        }
    }

    /// (ln |A|², d/dt ln |A|²) of the k-th pair, `None` at an exact zero.
    fn pair_log_modulus(&self, k: usize, t: f64) -> Option<(f64, f64)> {
        let single = |terms: &[SpectralTerm]| {
            if terms.len() == 1 {
                // a pure phase has unit modulus exactly
                return Some((0.0, 0.0));
            }
            let a = factor(terms, t);
            let n2 = a.norm_sqr();
            (n2 != 0.0).then(|| (n2.ln(), 2.0 * (a.conj() * derivative(terms, t)).re / n2))
        };
        match &self.site_factors {
            Some(f) => f[k].iter().try_fold((0.0, 0.0), |(l, d), site| {
                single(site).map(|(ls, ds)| (l + ls, d + ds))
            }),
            None => single(&self.spectra[k]),
        }
    }

    /// Spectral terms of A_{a,b} for basis indices a, b.
    pub fn terms(&self, a: usize, b: usize) -> Vec<SpectralTerm> {
        use std::cmp::Ordering;
        match a.cmp(&b) {
            Ordering::Equal => vec![SpectralTerm {
                weight: 1.0,
                omega: 0.0,
            }],
            Ordering::Less => self.spectra[self.pair_index(a, b)].clone(),
            Ordering::Greater => negate(&self.spectra[self.pair_index(b, a)]),
        }
    }

    /// A_{a,b}(t) for basis indices.
    pub fn factor(&self, a: usize, b: usize, t: f64) -> Complex64 {
        use std::cmp::Ordering;
        match a.cmp(&b) {
            Ordering::Equal => Complex64::new(1.0, 0.0),
            Ordering::Less => self.pair_factor(self.pair_index(a, b), t),
            Ordering::Greater => self.pair_factor(self.pair_index(b, a), t).conj(),
        }
    }

    /// θ_{a,b} = H_S(b) − H_S(a).
    pub fn theta(&self, a: usize, b: usize) -> f64 {
        self.system_energies[b] - self.system_energies[a]
    }

    /// Multiplier e^{iθt} A(t) applied to the (a, b) coherence, a < b.
    pub(crate) fn coherence_multiplier(&self, a: usize, b: usize, t: f64) -> Complex64 {
        let (s, c) = (self.theta(a, b) * t).sin_cos();
        Complex64::new(c, s) * self.pair_factor(self.pair_index(a, b), t)
    }

    /// ρ_S(t) for the initial system state `rho0`.
    pub fn reduced_state(&self, rho0: &ReducedState, t: f64) -> Result<ReducedState> {
        if rho0.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: rho0.dim(),
            });
        }
        Ok(ReducedState::from_matrix_unchecked(
            self.evolve_matrix(rho0.matrix(), t),
        ))
    }

    /// Apply the dynamical map to an arbitrary D×D matrix (linear extension).
    pub fn evolve_matrix(&self, m0: &Array2<Complex64>, t: f64) -> Array2<Complex64> {
        let mut out = m0.clone();
        for a in 0..self.dim {
            for b in (a + 1)..self.dim {
                let z = self.coherence_multiplier(a, b, t);
                out[[a, b]] = m0[[a, b]] * z;
                out[[b, a]] = m0[[b, a]] * z.conj();
            }
        }
        out
    }

    /// ln det M_S(t) and its time derivative.
    ///
    /// Each unordered pair contributes |A|² (the conjugate pair A_{s',s}
    /// supplies the second factor); diagonal pairs contribute 1.
    pub fn witness(&self, t: f64) -> WitnessPoint {
        let mut log_det = 0.0;
        let mut dlog = 0.0;
        for k in 0..self.spectra.len() {
            match self.pair_log_modulus(k, t) {
                Some((l, d)) => {
                    log_det += l;
                    dlog += d;
                }
                None => {
                    return WitnessPoint {
                        log_det: f64::NEG_INFINITY,
                        dlogdet_dt: None,
                    }
                }
            }
        }
        WitnessPoint {
            log_det,
            dlogdet_dt: Some(dlog),
        }
    }

    /// Merged spectra of the pairs a < b.
    pub fn spectra(&self) -> impl Iterator<Item = ((usize, usize), &[SpectralTerm])> + '_ {
        let d = self.dim;
        (0..d)
            .flat_map(move |a| ((a + 1)..d).map(move |b| (a, b)))
            .zip(self.spectra.iter().map(|v| v.as_slice()))
    }
}

/// A_{s,s'}(t).
pub fn dephasing_factor(spectrum: &DephasingSpectrum, t: f64) -> Complex64 {
    spectrum.factor(t)
}

/// d/dt A_{s,s'}(t), evaluated analytically.
pub fn dephasing_factor_derivative(spectrum: &DephasingSpectrum, t: f64) -> Complex64 {
    spectrum.derivative(t)
}

/// ρ_S(t) from the exact element-wise map.
pub fn reduced_state(
    spec: &EnsembleSpec,
    rho0: &ReducedState,
    env: &EnvPopulations,
    t: f64,
) -> Result<ReducedState> {
    DephasingEngine::new(spec, env)?.reduced_state(rho0, t)
}

/// (ln det M_S(t), d/dt ln det M_S(t)).
pub fn witness_log_det(spec: &EnsembleSpec, env: &EnvPopulations, t: f64) -> Result<WitnessPoint> {
    Ok(DephasingEngine::new(spec, env)?.witness(t))
}
