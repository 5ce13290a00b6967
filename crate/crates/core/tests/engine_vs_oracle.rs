// Copyright 2026 The spin-dephasing Contributors
// SPDX-License-Identifier: Apache-2.0

//! The dephasing engine against brute-force evolution of the whole ensemble.

use ndarray::Array2;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spin_dephasing::bloch::bloch_coords;
use spin_dephasing::density::max_abs_diff;
use spin_dephasing::oracle::{oracle_reduced_state, oracle_superoperator};
use spin_dephasing::sampling::{random_coherent_env, random_density, random_instance, random_populations};
use spin_dephasing::{DephasingEngine, EnsembleSpec, DEFAULT_ENUMERATION_CAP as CAP};

fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn reduced_state_matches_global_evolution(seed in any::<u64>(), t in 0.0f64..12.0) {
        let mut rng = seeded(seed);
        let inst = random_instance(&mut rng, 8, 16).unwrap();
        let engine = DephasingEngine::new(&inst.spec, &inst.env).unwrap();
        let ours = engine.reduced_state(&inst.rho_s0, t).unwrap();
        let theirs = oracle_reduced_state(&inst.spec, &inst.rho_s0, &inst.env.to_density_matrix(), t).unwrap();
        prop_assert!(ours.max_abs_diff(&theirs) < 1e-12);
    }

    #[test]
    fn environment_coherences_do_not_reach_the_system(seed in any::<u64>(), t in 0.0f64..8.0) {
        let mut rng = seeded(seed);
        let inst = random_instance(&mut rng, 7, 8).unwrap();
        let coherent = random_coherent_env(&mut rng, &inst.env);
        let engine = DephasingEngine::new(&inst.spec, &inst.env).unwrap();
        let ours = engine.reduced_state(&inst.rho_s0, t).unwrap();
        let theirs = oracle_reduced_state(&inst.spec, &inst.rho_s0, &coherent, t).unwrap();
        prop_assert!(ours.max_abs_diff(&theirs) < 1e-12);
    }

    #[test]
    fn bloch_map_matches_superoperator(seed in any::<u64>(), t in 0.0f64..6.0) {
        let mut rng = seeded(seed);
        let inst = random_instance(&mut rng, 6, 8).unwrap();
        let engine = DephasingEngine::new(&inst.spec, &inst.env).unwrap();
        let sup = oracle_superoperator(&inst.spec, &inst.env, t).unwrap();
        let ours = engine.bloch_evolution_matrix(t);
        let dev = ours.iter().zip(sup.matrix.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(dev < 1e-12, "max entry deviation {dev}");

        let det = engine.witness(t).log_det.exp();
        prop_assert!((det - sup.det).abs() <= 1e-10 * sup.det.abs(), "{det} vs {}", sup.det);

        let r0 = bloch_coords(inst.rho_s0.matrix());
        let rt = bloch_coords(engine.reduced_state(&inst.rho_s0, t).unwrap().matrix());
        let mapped = sup.matrix.dot(&r0);
        let dev = mapped.iter().zip(rt.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(dev < 1e-12);
    }
}

/// Entries outside the 2×2 coherence blocks and the diagonal sector vanish.
#[test]
fn superoperator_is_block_diagonal() {
    let mut rng = seeded(11);
    for _ in 0..6 {
        let inst = random_instance(&mut rng, 6, 8).unwrap();
        let d = inst.rho_s0.dim();
        let sup = oracle_superoperator(&inst.spec, &inst.env, rng.gen_range(0.5..4.0)).unwrap();
        let coherent = d * (d - 1);
        for ((r, c), v) in sup.matrix.indexed_iter() {
            let same_block = if r < coherent && c < coherent { r / 2 == c / 2 } else { r == c };
            if !same_block {
                assert!(v.abs() < 1e-12, "entry ({r}, {c}) = {v}");
            }
        }
        for k in coherent..d * d {
            assert!((sup.matrix[[k, k]] - 1.0).abs() < 1e-12);
        }
    }
}

fn spin_one_spec(rng: &mut ChaCha8Rng, n: usize, p: usize) -> EnsembleSpec {
    let mut j = Array2::zeros((n, n));
    for a in 0..n {
        for b in (a + 1)..n {
            let v = rng.gen_range(-1.0..1.0);
            j[[a, b]] = v;
            j[[b, a]] = v;
        }
    }
    let h = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    EnsembleSpec::new(p, 2, j, h).unwrap()
}

#[test]
fn spin_one_ensembles_match_oracle() {
    let mut rng = seeded(21);
    for (n, p) in [(3, 1), (4, 1), (4, 2), (5, 2)] {
        let spec = spin_one_spec(&mut rng, n, p);
        let env = random_populations(&mut rng, n - p, 2).unwrap();
        let rho_s0 = random_density(&mut rng, 3usize.pow(p as u32)).unwrap();
        let engine = DephasingEngine::new(&spec, &env).unwrap();
        for t in [0.0, 0.4, 1.7, 5.3] {
            let ours = engine.reduced_state(&rho_s0, t).unwrap();
            let theirs = oracle_reduced_state(&spec, &rho_s0, &env.to_density_matrix(), t).unwrap();
            assert!(ours.max_abs_diff(&theirs) < 1e-12, "n = {n}, p = {p}, t = {t}");
        }
        if 3usize.pow(p as u32) <= 16 {
            let t = 0.9;
            let sup = oracle_superoperator(&spec, &env, t).unwrap();
            let det = engine.witness(t).log_det.exp();
            assert!((det - sup.det).abs() <= 1e-10 * sup.det.abs());
        }
    }
}

#[test]
fn initial_state_is_returned_at_zero() {
    let mut rng = seeded(5);
    for _ in 0..10 {
        let inst = random_instance(&mut rng, 8, 16).unwrap();
        let engine = DephasingEngine::new(&inst.spec, &inst.env).unwrap();
        let at_zero = engine.reduced_state(&inst.rho_s0, 0.0).unwrap();
        assert!(at_zero.max_abs_diff(&inst.rho_s0) < 1e-15);
        assert_eq!(engine.witness(0.0).log_det, 0.0);
    }
}

#[test]
fn populations_are_conserved() {
    let mut rng = seeded(8);
    for _ in 0..10 {
        let inst = random_instance(&mut rng, 8, 16).unwrap();
        let engine = DephasingEngine::new(&inst.spec, &inst.env).unwrap();
        let rho = engine.reduced_state(&inst.rho_s0, rng.gen_range(0.0..10.0)).unwrap();
        for k in 0..rho.dim() {
            assert!((rho.matrix()[[k, k]] - inst.rho_s0.matrix()[[k, k]]).norm() < 1e-15);
        }
    }
}

#[test]
fn factors_are_hermitian_conjugate_pairs() {
    // A_{s',s}(t) is the conjugate of A_{s,s'}(t)
    let mut rng = seeded(13);
    let inst = random_instance(&mut rng, 7, 8).unwrap();
    let engine = DephasingEngine::new(&inst.spec, &inst.env).unwrap();
    let d = engine.dim();
    for t in [0.3, 2.1, 7.7] {
        let m = Array2::from_shape_fn((d, d), |(a, b)| engine.factor(a, b, t));
        let mt = m.t().mapv(|z: Complex64| z.conj());
        assert!(max_abs_diff(&m, &mt) < 1e-15);
        for a in 0..d {
            assert!((engine.factor(a, a, t) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
            for b in 0..d {
                assert!(engine.factor(a, b, t).norm() <= 1.0 + 1e-14);
            }
        }
    }
}

#[test]
fn engine_respects_enumeration_cap() {
    let mut rng = seeded(3);
    let inst = random_instance(&mut rng, 6, 4).unwrap();
    assert!(DephasingEngine::with_cap(&inst.spec, &inst.env, 2).is_err());
    assert!(DephasingEngine::with_cap(&inst.spec, &inst.env, CAP).is_ok());
}
