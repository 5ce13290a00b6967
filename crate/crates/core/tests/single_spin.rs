// Copyright 2026 The spin-dephasing Contributors
// SPDX-License-Identifier: Apache-2.0

//! One system spin: amplitude, master-equation rate, trace distance.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use proptest::prelude::*;

use spin_dephasing::linalg::trace_norm_hermitian;
use spin_dephasing::single_spin::{
    amplitude, amplitude_derivative, amplitude_zeros, blp_trace_distance, dephasing_rate, measures_agreement_report,
    optimal_pair, qubit_state, star_ensemble, QubitState, Rate,
};
use spin_dephasing::{maximally_mixed, DephasingEngine, ReducedState, DEFAULT_ENUMERATION_CAP as CAP};

fn row_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![-2.0f64..-0.05, 0.05f64..2.0], 1..=7)
}

fn qubit_strategy() -> impl Strategy<Value = QubitState> {
    (0.0f64..1.0, 0.0f64..1.0, 0.0f64..(2.0 * PI)).prop_map(|(p, r, phi)| {
        let max = (p * (1.0 - p)).sqrt();
        QubitState::new(p, Complex64::from_polar(r * max, phi)).unwrap()
    })
}

/// Classical RK4 for c' = (−i h₁ + A'/A) c from 0 to `t`.
fn integrate_coherence(row: &[f64], h1: f64, c0: Complex64, t: f64, steps: usize) -> Complex64 {
    let rhs = |s: f64, c: Complex64| {
        let gamma = dephasing_rate(row, s).value().expect("no pole on the path");
        (Complex64::new(0.0, -h1) - 2.0 * gamma) * c
    };
    let h = t / steps as f64;
    let mut c = c0;
    for k in 0..steps {
        let s = k as f64 * h;
        let k1 = rhs(s, c);
        let k2 = rhs(s + 0.5 * h, c + k1 * (0.5 * h));
        let k3 = rhs(s + 0.5 * h, c + k2 * (0.5 * h));
        let k4 = rhs(s + h, c + k3 * h);
        c += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
    }
    c
}

fn difference(a: &QubitState, b: &QubitState) -> Array2<Complex64> {
    a.matrix() - b.matrix()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn master_equation_reproduces_closed_form(row in row_strategy(), h1 in -2.0f64..2.0, rho in qubit_strategy()) {
        // stay before the first zero of A so the rate has no pole on the path
        let jmax = row.iter().fold(0.0f64, |m, j| m.max(j.abs()));
        let t = 0.9 * PI / (2.0 * jmax);
        let expected = qubit_state(&rho, h1, &row, t).rho12;
        let got = integrate_coherence(&row, h1, rho.rho12, t, 4000);
        prop_assert!((got - expected).norm() < 1e-8, "{got} vs {expected}");
    }

    #[test]
    fn closed_form_matches_engine(row in row_strategy(), h1 in -2.0f64..2.0, rho in qubit_strategy(), t in 0.0f64..8.0) {
        let mut fields = vec![0.0; row.len() + 1];
        fields[0] = h1;
        let spec = star_ensemble(&row).unwrap().with_fields(fields).unwrap();
        let engine = DephasingEngine::new(&spec, &maximally_mixed(row.len(), 1, CAP).unwrap()).unwrap();
        let ours = engine.reduced_state(&ReducedState::new(rho.matrix()).unwrap(), t).unwrap();
        let closed = qubit_state(&rho, h1, &row, t).matrix();
        let dev = ours.matrix().iter().zip(closed.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(dev < 1e-12);
        let a = amplitude(&row, t);
        prop_assert!((engine.witness(t).det() - a * a).abs() < 1e-12);
    }

    #[test]
    fn trace_distance_is_half_the_trace_norm(row in row_strategy(), a in qubit_strategy(), b in qubit_strategy(), t in 0.0f64..8.0) {
        let at = qubit_state(&a, 0.0, &row, t);
        let bt = qubit_state(&b, 0.0, &row, t);
        let reference = 0.5 * trace_norm_hermitian(&difference(&at, &bt)).unwrap();
        prop_assert!((blp_trace_distance(&a, &b, &row, t) - reference).abs() < 1e-12);
    }

    #[test]
    fn optimal_pair_saturates_the_bound(row in row_strategy(), a in qubit_strategy(), b in qubit_strategy(), t in 0.0f64..8.0) {
        let (pa, pb) = optimal_pair();
        let best = blp_trace_distance(&pa, &pb, &row, t);
        prop_assert!((best - amplitude(&row, t).abs()).abs() < 1e-12);
        // no pair starting at most 1 apart beats |A| once populations are equal
        if (a.rho11 - b.rho11).abs() < 1e-12 {
            prop_assert!(blp_trace_distance(&a, &b, &row, t) <= best + 1e-12);
        }
    }

    #[test]
    fn derivative_matches_finite_difference(row in row_strategy(), t in 0.0f64..8.0) {
        let h = 1e-6;
        let fd = (amplitude(&row, t + h) - amplitude(&row, t - h)) / (2.0 * h);
        prop_assert!((fd - amplitude_derivative(&row, t)).abs() < 1e-7);
    }

    #[test]
    fn flags_agree_away_from_zeros(row in row_strategy()) {
        let times: Vec<f64> = (0..400).map(|k| 4.0 * PI * k as f64 / 399.0).collect();
        for r in measures_agreement_report(&row, &times).unwrap() {
            prop_assert!(r.agrees(), "{r:?}");
        }
    }
}

#[test]
fn single_coupling_flags_between_quarter_and_half_period() {
    let j = 1.0;
    let times: Vec<f64> = (1..200).map(|k| PI * k as f64 / 200.0).collect();
    for r in measures_agreement_report(&[j], &times).unwrap() {
        let inside = r.t > PI / 2.0 && r.t < PI;
        assert_eq!(r.flag_geo, inside, "t = {}", r.t);
        assert_eq!(r.flag_rhp, inside);
        assert_eq!(r.flag_blp, inside);
    }
    let early = measures_agreement_report(&[0.7, 1.3], &[1e-4, 1e-3]).unwrap();
    assert!(early.iter().all(|r| !r.flag_geo && !r.flag_rhp && !r.flag_blp));
}

#[test]
fn rate_vanishes_at_the_origin_and_poles_sit_on_zeros() {
    let row = [0.6, 1.1, 1.7];
    assert_eq!(dephasing_rate(&row, 0.0), Rate::Finite(0.0));
    let zeros = amplitude_zeros(&row, 0.0, 10.0, 2000, 1e-9);
    // cos(J t) vanishes at (k + ½)π/J
    let mut expected: Vec<f64> = row
        .iter()
        .flat_map(|j| (0..10).map(move |k| (k as f64 + 0.5) * PI / j))
        .filter(|&t| t <= 10.0)
        .collect();
    expected.sort_by(f64::total_cmp);
    assert_eq!(zeros.len(), expected.len());
    for (z, e) in zeros.iter().zip(&expected) {
        assert!((z - e).abs() <= 1e-9 * e.abs() * 2.0, "{z} vs {e}");
        // the rate blows up on approach
        let g = dephasing_rate(&row, z - 1e-7).value().unwrap().abs();
        assert!(g > 1e5);
    }
}

#[test]
fn identical_states_stay_at_zero_distance() {
    let rho = QubitState::new(0.3, Complex64::new(0.1, -0.2)).unwrap();
    for t in [0.0, 1.0, 3.3] {
        assert_eq!(blp_trace_distance(&rho, &rho, &[0.4, 0.9], t), 0.0);
    }
}

#[test]
fn unphysical_qubit_is_rejected() {
    assert!(QubitState::new(0.5, Complex64::new(0.6, 0.0)).is_err());
    assert!(QubitState::new(1.2, Complex64::new(0.0, 0.0)).is_err());
}
