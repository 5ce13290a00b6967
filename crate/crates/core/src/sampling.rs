// Copyright 2026 The spin-dephasing Contributors
// SPDX-License-Identifier: Apache-2.0

//! Seeded random ensembles and states for property checks.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;

use crate::density::ReducedState;
use crate::env::EnvPopulations;
use crate::error::Result;
use crate::spin::{EnsembleSpec, DEFAULT_ENUMERATION_CAP};

/// Symmetric couplings and fields drawn uniformly from [−1, 1], spin ½.
pub fn random_spec<R: Rng>(rng: &mut R, n_total: usize, n_system: usize) -> Result<EnsembleSpec> {
    let mut j = Array2::zeros((n_total, n_total));
    for a in 0..n_total {
        for b in (a + 1)..n_total {
            let v = rng.gen_range(-1.0..1.0);
            j[[a, b]] = v;
            j[[b, a]] = v;
        }
    }
    let h = (0..n_total).map(|_| rng.gen_range(-1.0..1.0)).collect();
    EnsembleSpec::new(n_system, 1, j, h)
}

/// Positive weights, normalized, over `(2S+1)^n_env` configurations.
pub fn random_populations<R: Rng>(rng: &mut R, n_env: usize, twice_spin: u32) -> Result<EnvPopulations> {
    let dim = (twice_spin as usize + 1).pow(n_env as u32);
    let raw: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    EnvPopulations::new(
        n_env,
        twice_spin,
        raw.into_iter().map(|w| w / total).collect(),
        DEFAULT_ENUMERATION_CAP,
    )
}

fn random_complex<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// G G† / tr(G G†) for a random complex G: full rank with probability one.
pub fn random_density<R: Rng>(rng: &mut R, dim: usize) -> Result<ReducedState> {
    let g = Array2::from_shape_fn((dim, dim), |_| random_complex(rng));
    let mut m = g.dot(&g.t().mapv(|z| z.conj()));
    let trace: f64 = m.diag().iter().map(|z| z.re).sum();
    m.mapv_inplace(|z| z / trace);
    for i in 0..dim {
        for k in 0..i {
            m[[i, k]] = m[[k, i]].conj();
        }
        m[[i, i]] = Complex64::new(m[[i, i]].re, 0.0);
    }
    ReducedState::new(m)
}

/// A full environment density matrix with the given diagonal and random
/// coherences: (1 − ε) diag(w) + ε |ψ⟩⟨ψ| with ψ_σ = √w_σ e^{iφ_σ}.
pub fn random_coherent_env<R: Rng>(rng: &mut R, pops: &EnvPopulations) -> Array2<Complex64> {
    let eps = rng.gen_range(0.2..1.0);
    let psi: Vec<Complex64> = pops
        .weights()
        .iter()
        .map(|w| Complex64::from_polar(w.sqrt(), rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    let n = psi.len();
    Array2::from_shape_fn((n, n), |(a, b)| {
        if a == b {
            Complex64::new(pops.weights()[a], 0.0)
        } else {
            psi[a] * psi[b].conj() * eps
        }
    })
}

/// One randomly drawn test case.
#[derive(Clone, Debug)]
pub struct RandomInstance {
    pub spec: EnsembleSpec,
    pub env: EnvPopulations,
    pub rho_s0: ReducedState,
}

/// Spin-½ instance with 2 ≤ N ≤ `max_total` and 2^p ≤ `max_sys_dim`.
pub fn random_instance<R: Rng>(rng: &mut R, max_total: usize, max_sys_dim: usize) -> Result<RandomInstance> {
    let n = rng.gen_range(2..=max_total);
    let max_p = ((max_sys_dim as f64).log2().floor() as usize).min(n - 1).max(1);
    let p = rng.gen_range(1..=max_p);
    let spec = random_spec(rng, n, p)?;
    let env = random_populations(rng, n - p, 1)?;
    let rho_s0 = random_density(rng, 1 << p)?;
    Ok(RandomInstance { spec, env, rho_s0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::ReducedState;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn instances_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let inst = random_instance(&mut rng, 8, 16).unwrap();
            assert!(inst.spec.n_total() <= 8);
            assert!(inst.rho_s0.dim() <= 16);
            let full = random_coherent_env(&mut rng, &inst.env);
            ReducedState::new(full).unwrap();
        }
    }
}
