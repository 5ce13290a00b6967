// Copyright 2026 The spin-dephasing Contributors
// SPDX-License-Identifier: Apache-2.0

//! Self-check suite: the dephasing engine against the global-evolution
//! oracle, the closed forms, and the structural invariants.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bloch::bloch_coords;
use crate::closed_form::{log_det_2d_nn, log_det_infinite_range, log_det_nn_1d};
use crate::dephasing::DephasingEngine;
use crate::entanglement::{evolve_global, negativity};
use crate::env::{maximally_mixed, EnvPopulations};
use crate::error::Result;
use crate::oracle::{oracle_reduced_state, oracle_superoperator};
use crate::sampling::{random_coherent_env, random_density, random_instance, random_populations, random_spec};
use crate::single_spin::measures_agreement_report;
use crate::spin::{torus_corner_block, CouplingModel, EnsembleDoc, EnsembleSpec, DEFAULT_ENUMERATION_CAP};

/// Deliberate corruption of the model fed to the engine, for checking that
/// the suite notices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Fault {
    #[default]
    None,
    /// Negate every system–environment coupling.
    FlipInteractionSign,
}

impl Fault {
    fn apply(self, spec: &EnsembleSpec) -> EnsembleSpec {
        match self {
            Fault::None => spec.clone(),
            Fault::FlipInteractionSign => spec.with_flipped_interaction(),
        }
    }
}

impl std::str::FromStr for Fault {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(Fault::None),
            "flip-hse-sign" => Ok(Fault::FlipInteractionSign),
            _ => Err(format!("unknown fault `{s}`")),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub cases: usize,
}

impl CheckOutcome {
    fn new(name: &str, max_deviation: f64, tolerance: f64, cases: usize) -> Self {
        Self {
            name: name.to_string(),
            max_deviation,
            tolerance,
            passed: max_deviation <= tolerance,
            cases,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

fn engine(spec: &EnsembleSpec, env: &EnvPopulations, fault: Fault) -> Result<DephasingEngine> {
    DephasingEngine::new(&fault.apply(spec), env)
}

fn times(stop: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| stop * k as f64 / (n - 1) as f64).collect()
}

fn ring(n: usize, p: usize) -> Result<EnsembleSpec> {
    EnsembleSpec::from_model(&CouplingModel::NearestNeighborRing { j: 1.0 }, n, p, 1, 0.0)
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn check_reduced_states(rng: &mut ChaCha8Rng, fault: Fault) -> Result<Vec<CheckOutcome>> {
    let (mut dev, mut coh_dev, mut herm, mut trace, mut neg_eig) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let cases = 12;
    for _ in 0..cases {
        let inst = random_instance(rng, 7, 16)?;
        let eng = engine(&inst.spec, &inst.env, fault)?;
        let coherent = random_coherent_env(rng, &inst.env);
        for t in times(3.0, 5) {
            let ours = eng.reduced_state(&inst.rho_s0, t)?;
            let theirs = oracle_reduced_state(&inst.spec, &inst.rho_s0, &inst.env.to_density_matrix(), t)?;
            dev = dev.max(ours.max_abs_diff(&theirs));
            let with_coh = oracle_reduced_state(&inst.spec, &inst.rho_s0, &coherent, t)?;
            coh_dev = coh_dev.max(ours.max_abs_diff(&with_coh));
            let phys = ours.physicality()?;
            herm = herm.max(phys.hermiticity);
            trace = trace.max(phys.trace_error);
            neg_eig = neg_eig.max(-phys.min_eigenvalue);
        }
    }
    Ok(vec![
        CheckOutcome::new("reduced_state_vs_oracle", dev, 1e-12, cases),
        CheckOutcome::new("reduced_state_ignores_env_coherences", coh_dev, 1e-12, cases),
        CheckOutcome::new("reduced_state_hermitian", herm, 1e-12, cases),
        CheckOutcome::new("reduced_state_trace", trace, 1e-12, cases),
        CheckOutcome::new("reduced_state_positive", neg_eig, 1e-10, cases),
    ])
}

fn check_superoperator(rng: &mut ChaCha8Rng, fault: Fault) -> Result<Vec<CheckOutcome>> {
    let (mut det_dev, mut map_dev) = (0.0f64, 0.0f64);
    let cases = 8;
    for _ in 0..cases {
        let inst = random_instance(rng, 6, 8)?;
        let eng = engine(&inst.spec, &inst.env, fault)?;
        let t = rng.gen_range(0.1..3.0);
        let sup = oracle_superoperator(&inst.spec, &inst.env, t)?;
        let ours = eng.bloch_evolution_matrix(t);
        for (a, b) in ours.iter().zip(sup.matrix.iter()) {
            map_dev = map_dev.max((a - b).abs());
        }
        det_dev = det_dev.max(relative(eng.witness(t).log_det.exp(), sup.det));
        let r0 = bloch_coords(inst.rho_s0.matrix());
        let rt = bloch_coords(eng.reduced_state(&inst.rho_s0, t)?.matrix());
        let mapped = ours.dot(&r0);
        for (a, b) in mapped.iter().zip(rt.iter()) {
            map_dev = map_dev.max((a - b).abs());
        }
    }
    Ok(vec![
        CheckOutcome::new("bloch_map_vs_oracle", map_dev, 1e-12, cases),
        CheckOutcome::new("determinant_dual_path", det_dev, 1e-10, cases),
    ])
}

fn check_closed_forms(fault: Fault) -> Result<Vec<CheckOutcome>> {
    let grid = times(2.0 * PI, 400);
    let mut out = Vec::new();

    let mut dev = 0.0f64;
    for (n, p) in [(5, 1), (6, 2), (7, 2)] {
        let spec = ring(n, p)?;
        let eng = engine(&spec, &maximally_mixed(n - p, 1, DEFAULT_ENUMERATION_CAP)?, fault)?;
        for &t in &grid {
            let a = eng.witness(t).log_det;
            let b = log_det_nn_1d(p as u32, 1.0, t);
            dev = dev.max(if a == b { 0.0 } else { (a - b).abs() });
        }
    }
    out.push(CheckOutcome::new("nearest_neighbor_closed_form", dev, 1e-12, 3));

    let mut dev = 0.0f64;
    for (n, p) in [(4, 1), (6, 2), (7, 3)] {
        let spec = EnsembleSpec::from_model(&CouplingModel::InfiniteRange { j: 1.0 }, n, p, 1, 0.0)?;
        let eng = engine(&spec, &maximally_mixed(n - p, 1, DEFAULT_ENUMERATION_CAP)?, fault)?;
        for &t in &grid {
            // relative once |log det| exceeds one: near zeros of cos the value is ill-conditioned
            let exact = log_det_infinite_range(n, p, 1.0, t);
            let a = eng.witness(t).log_det;
            let d = if a == exact { 0.0 } else { (a - exact).abs() };
            dev = dev.max(d / exact.abs().max(1.0));
        }
    }
    out.push(CheckOutcome::new("infinite_range_closed_form", dev, 1e-12, 3));

    let doc = EnsembleDoc {
        n_total: 9,
        n_system: 1,
        twice_spin: 1,
        model: Some(CouplingModel::NearestNeighborTorus { side: 3, j: 1.0 }),
        system_sites: Some(torus_corner_block(3, 1)),
        ..Default::default()
    };
    let spec = doc.build()?;
    let eng = engine(&spec, &maximally_mixed(8, 1, DEFAULT_ENUMERATION_CAP)?, fault)?;
    let dev = grid
        .iter()
        .map(|&t| (eng.witness(t).log_det - log_det_2d_nn(1, 1.0, t)).abs())
        .fold(0.0, f64::max);
    out.push(CheckOutcome::new("square_lattice_closed_form", dev, 1e-10, 1));
    Ok(out)
}

fn check_independence(rng: &mut ChaCha8Rng, fault: Fault) -> Result<CheckOutcome> {
    let cases = 10;
    let mut mismatches = 0usize;
    for _ in 0..cases {
        let n = rng.gen_range(3..=7);
        let p = rng.gen_range(1..n).min(3);
        let spec = random_spec(rng, n, p)?;
        let env = random_populations(rng, n - p, 1)?;
        let base = engine(&spec, &env, fault)?;
        let fields = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let moved = engine(&spec.with_fields(fields)?, &env, fault)?;
        let mut j = spec.couplings().clone();
        for a in 0..n {
            for b in (a + 1)..n {
                if (a < p) == (b < p) {
                    let v = rng.gen_range(-2.0..2.0);
                    j[[a, b]] = v;
                    j[[b, a]] = v;
                }
            }
        }
        let rewired = engine(&spec.with_couplings(j)?, &env, fault)?;
        for t in times(4.0, 9) {
            let w = base.witness(t);
            if moved.witness(t) != w || rewired.witness(t) != w {
                mismatches += 1;
            }
        }
    }
    Ok(CheckOutcome::new("witness_bitwise_independence", mismatches as f64, 0.0, cases))
}

fn check_single_spin(rng: &mut ChaCha8Rng) -> Result<CheckOutcome> {
    let cases = 10;
    let mut disagreements = 0usize;
    for _ in 0..cases {
        let k = rng.gen_range(1..=6);
        let row: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..2.0)).collect();
        let rows = measures_agreement_report(&row, &times(2.0 * PI, 300))?;
        disagreements += rows.iter().filter(|r| !r.agrees()).count();
    }
    Ok(CheckOutcome::new("single_spin_flag_agreement", disagreements as f64, 0.0, cases))
}

fn check_separability(rng: &mut ChaCha8Rng) -> Result<CheckOutcome> {
    let cases = 5;
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let n = rng.gen_range(3..=6);
        let p = rng.gen_range(1..n).min(2);
        let spec = random_spec(rng, n, p)?;
        let env = random_populations(rng, n - p, 1)?;
        let rho_s0 = random_density(rng, 1 << p)?;
        for t in times(3.0, 4) {
            let g = evolve_global(&spec, &rho_s0, &env.to_density_matrix(), t)?;
            worst = worst.max(negativity(&g)?.raw.abs());
        }
    }
    Ok(CheckOutcome::new("diagonal_env_negativity_zero", worst, 1e-10, cases))
}

/// Run every check with the given seed; `fault` corrupts the model seen by
/// the engine but not by the oracle.
pub fn run_suite(seed: u64, fault: Fault) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = check_reduced_states(&mut rng, fault)?;
    checks.extend(check_superoperator(&mut rng, fault)?);
    checks.extend(check_closed_forms(fault)?);
    checks.push(check_independence(&mut rng, fault)?);
    checks.push(check_single_spin(&mut rng)?);
    checks.push(check_separability(&mut rng)?);
    Ok(VerifyReport {
        seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}
