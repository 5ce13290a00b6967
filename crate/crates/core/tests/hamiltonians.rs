// Copyright 2026 The spin-dephasing Contributors
// SPDX-License-Identifier: Apache-2.0

//! Scalar Hamiltonians against operator matrices assembled from Kronecker
//! products of single-site S^z.

use ndarray::Array2;
use proptest::prelude::*;
use spin_dephasing::spin::level_count;
use spin_dephasing::{enumerate_configs, EnsembleSpec, SpinConfig, DEFAULT_ENUMERATION_CAP as CAP};

/// Diagonal of S^z on one site: +S first, descending.
fn sz(twice_spin: u32) -> Vec<f64> {
    (0..level_count(twice_spin))
        .map(|k| 0.5 * (twice_spin as f64 - 2.0 * k as f64))
        .collect()
}

fn kron_diag(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Diagonal of the operator S^z_site ⊗ identity elsewhere on `n` sites.
fn site_operator(site: usize, n: usize, twice_spin: u32) -> Vec<f64> {
    let ones = vec![1.0; level_count(twice_spin)];
    let z = sz(twice_spin);
    (0..n).fold(vec![1.0], |acc, k| kron_diag(&acc, if k == site { &z } else { &ones }))
}

/// Diagonal of −Σ_i Σ_j J_ij S_i S_j + Σ_i h_i S_i built from operators.
fn operator_hamiltonian(j: &Array2<f64>, h: &[f64], twice_spin: u32) -> Vec<f64> {
    let n = h.len();
    let ops: Vec<Vec<f64>> = (0..n).map(|i| site_operator(i, n, twice_spin)).collect();
    let dim = ops[0].len();
    let mut out = vec![0.0; dim];
    for a in 0..n {
        for b in 0..n {
            for x in 0..dim {
                out[x] -= j[[a, b]] * ops[a][x] * ops[b][x];
            }
        }
        for x in 0..dim {
            out[x] += h[a] * ops[a][x];
        }
    }
    out
}

fn spec_strategy() -> impl Strategy<Value = EnsembleSpec> {
    (2usize..=6, 1u32..=2)
        .prop_flat_map(|(n, ts)| {
            let pairs = n * (n - 1) / 2;
            (
                Just(n),
                1..n,
                Just(ts),
                prop::collection::vec(-2.0f64..2.0, pairs),
                prop::collection::vec(-2.0f64..2.0, n),
            )
        })
        .prop_filter("keep enumeration small", |(n, _, ts, _, _)| (*ts as usize + 1).pow(*n as u32) <= 729)
        .prop_map(|(n, p, ts, upper, h)| {
            let mut j = Array2::zeros((n, n));
            let mut k = 0;
            for a in 0..n {
                for b in (a + 1)..n {
                    j[[a, b]] = upper[k];
                    j[[b, a]] = upper[k];
                    k += 1;
                }
            }
            EnsembleSpec::new(p, ts, j, h).unwrap()
        })
}

fn split(config: &SpinConfig, p: usize) -> (SpinConfig, SpinConfig) {
    let v = config.values();
    (SpinConfig::new(v[..p].to_vec()), SpinConfig::new(v[p..].to_vec()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn total_energy_matches_operator_matrix(spec in spec_strategy()) {
        let ts = spec.twice_spin();
        let reference = operator_hamiltonian(spec.couplings(), spec.fields(), ts);
        let configs: Vec<SpinConfig> = enumerate_configs(spec.n_total(), ts, CAP).unwrap().collect();
        prop_assert_eq!(configs.len(), reference.len());
        for (x, c) in configs.iter().enumerate() {
            let e = spec.hamiltonian_total(c).unwrap();
            prop_assert!((e - reference[x]).abs() < 1e-12, "config {x}: {e} vs {}", reference[x]);
        }
    }

    #[test]
    fn pieces_sum_to_total(spec in spec_strategy()) {
        let p = spec.n_system();
        for c in enumerate_configs(spec.n_total(), spec.twice_spin(), CAP).unwrap() {
            let (s, sigma) = split(&c, p);
            let parts = spec.hamiltonian_system(&s).unwrap()
                + spec.hamiltonian_env(&sigma).unwrap()
                + spec.hamiltonian_interaction(&s, &sigma).unwrap();
            prop_assert!((parts - spec.hamiltonian_total(&c).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn bond_convention_halves_env_couplings(spec in spec_strategy()) {
        // the double sum counts each environment bond twice
        let p = spec.n_system();
        let zero_h = spec.with_fields(vec![0.0; spec.n_total()]).unwrap();
        for sigma in enumerate_configs(spec.n_env(), spec.twice_spin(), CAP).unwrap() {
            let bonds = zero_h.hamiltonian_env_bonds(&sigma).unwrap();
            let double = zero_h.hamiltonian_env(&sigma).unwrap();
            prop_assert!((double - 2.0 * bonds).abs() < 1e-12, "p = {p}");
        }
    }
}

#[test]
fn basis_order_is_descending_most_significant_first() {
    let configs: Vec<Vec<i32>> = enumerate_configs(2, 2, CAP)
        .unwrap()
        .map(|c| c.twice_values().collect())
        .collect();
    assert_eq!(configs[0], vec![2, 2]);
    assert_eq!(configs[1], vec![2, 0]);
    assert_eq!(configs[3], vec![0, 2]);
    assert_eq!(configs[8], vec![-2, -2]);
    for (k, c) in enumerate_configs(5, 1, CAP).unwrap().enumerate() {
        assert_eq!(c.index(1), k);
    }
}

#[test]
fn relabeling_sites_preserves_energies() {
    // swap two environment sites in both the couplings and the configuration
    let j = Array2::from_shape_fn((4, 4), |(a, b)| if a == b { 0.0 } else { 0.1 * (a + b) as f64 + 0.05 });
    let spec = EnsembleSpec::new(1, 1, j.clone(), vec![0.3, -0.2, 0.7, 0.1]).unwrap();
    let swap = [0usize, 1, 3, 2];
    let jp = Array2::from_shape_fn((4, 4), |(a, b)| j[[swap[a], swap[b]]]);
    let hp = swap.iter().map(|&s| spec.fields()[s]).collect();
    let swapped = EnsembleSpec::new(1, 1, jp, hp).unwrap();
    for c in enumerate_configs(4, 1, CAP).unwrap() {
        let v = c.values();
        let permuted = SpinConfig::new(swap.iter().map(|&s| v[s]).collect());
        let a = spec.hamiltonian_total(&c).unwrap();
        let b = swapped.hamiltonian_total(&permuted).unwrap();
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn enumeration_cap_is_enforced() {
    assert!(enumerate_configs(21, 1, CAP).is_err());
    assert!(enumerate_configs(20, 1, CAP).is_ok());
}
