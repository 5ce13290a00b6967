// Copyright 2026 The spin-dephasing Contributors
// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use spin_dephasing::closed_form::{log_det_infinite_fraction_asymptotic, log_det_infinite_range, ClosedForm};
use spin_dephasing::entanglement::{
    bipartite_negativity, global_energies, negativity, Cut, GlobalEvolution, GlobalState, NegativityReport,
    PureGlobalState, GLOBAL_CAP,
};
use spin_dephasing::single_spin::{measures_agreement_report, Rate};
use spin_dephasing::verify::{run_suite, Fault};
use spin_dephasing::witness::{fmt_f64, CSV_FORMAT_LINE};
use spin_dephasing::{DephasingEngine, EnvPopulations, TimeGrid, WitnessSeries};

use crate::config::{Beta, EnvConfig, Loaded};

/// Outcome of a command that ran to completion.
#[derive(Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Results were produced but a check on them failed.
    CheckFailed,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// `fig.csv` → `fig.episodes.json`.
fn episodes_path(csv: &Path) -> PathBuf {
    csv.with_extension("episodes.json")
}

/// Witness series on a grid in units of 1/J, reported in the same units.
fn witness_series(loaded: &Loaded, env: &EnvPopulations, grid: &TimeGrid) -> Result<WitnessSeries> {
    let engine = DephasingEngine::new(&loaded.spec, env)?;
    let taus = grid.times();
    let physical: Vec<f64> = taus.iter().map(|&tau| loaded.physical(tau)).collect();
    let mut series = WitnessSeries::on_times(&engine, &physical);
    let j = loaded.config.reference_j;
    for e in &mut series.episodes {
        e.start *= j;
        e.end *= j;
    }
    series.times = taus;
    Ok(series)
}

pub fn witness(loaded: &Loaded, grid: &TimeGrid, closed_form: Option<ClosedForm>, out: Option<&Path>) -> Result<Status> {
    let env = loaded.config.env.populations(&loaded.spec, loaded.config.reference_j)?;
    let series = witness_series(loaded, &env, grid)?;
    let csv = match closed_form {
        None => series.to_csv(),
        Some(form) => {
            let model = loaded
                .doc
                .model
                .as_ref()
                .context("--closed-form needs an ensemble given by `model`")?;
            let bound = form.bind(model, loaded.spec.n_total(), loaded.spec.n_system())?;
            let mut text = String::new();
            let mut worst = 0.0f64;
            for (k, line) in series.to_csv().lines().enumerate() {
                match k {
                    0 => text.push_str(line),
                    1 => write!(text, "{line},closed_form_log_det,abs_deviation")?,
                    _ => {
                        let i = k - 2;
                        let exact = bound.log_det(loaded.physical(series.times[i]))?;
                        let ours = series.log_det[i];
                        let dev = if ours == exact { 0.0 } else { (ours - exact).abs() };
                        worst = worst.max(dev);
                        write!(text, "{line},{},{}", fmt_f64(exact), fmt_f64(dev))?;
                    }
                }
                text.push('\n');
            }
            eprintln!("closed form {}: max abs deviation {}", form.name(), fmt_f64(worst));
            text
        }
    };
    emit(out, &csv)?;
    if let Some(path) = out {
        emit(Some(&episodes_path(path)), &series.episodes_json())?;
    }
    Ok(Status::Ok)
}

pub fn thermal_sweep(loaded: &Loaded, grid: &TimeGrid, betas: &[Beta], out: &Path) -> Result<Status> {
    if betas.is_empty() {
        bail!("--betas needs at least one value");
    }
    let energy = match &loaded.config.env {
        EnvConfig::Thermal { energy, .. } => *energy,
        _ => Default::default(),
    };
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for &beta in betas {
        let env = EnvConfig::Thermal { beta, energy }.populations(&loaded.spec, loaded.config.reference_j)?;
        let series = witness_series(loaded, &env, grid)?;
        let csv = out.join(format!("beta_{}.csv", beta.label()));
        emit(Some(&csv), &series.to_csv())?;
        emit(Some(&episodes_path(&csv)), &series.episodes_json())?;
    }
    Ok(Status::Ok)
}

fn rate_field(rate: Rate, j: f64) -> String {
    match rate {
        Rate::Finite(g) => fmt_f64(g / j),
        Rate::Pole => "nan".into(),
    }
}

pub fn compare_measures(loaded: &Loaded, grid: &TimeGrid, out: Option<&Path>) -> Result<Status> {
    let spec = &loaded.spec;
    if spec.n_system() != 1 {
        bail!("compare-measures needs exactly one system spin, got {}", spec.n_system());
    }
    if spec.twice_spin() != 1 {
        bail!("compare-measures needs spin 1/2");
    }
    if loaded.config.env != EnvConfig::Mixed {
        bail!("compare-measures needs the maximally mixed environment");
    }
    let row: Vec<f64> = (1..spec.n_total()).map(|k| spec.couplings()[[0, k]]).collect();
    let j = loaded.config.reference_j;
    let taus = grid.times();
    let physical: Vec<f64> = taus.iter().map(|&tau| loaded.physical(tau)).collect();
    let rows = measures_agreement_report(&row, &physical)?;
    let mut text = format!("{CSV_FORMAT_LINE}\nt,A,Aprime,gamma_z,D_opt,flag_geo,flag_rhp,flag_blp,singular\n");
    let mut disagreements = 0;
    for (tau, r) in taus.iter().zip(&rows) {
        if !r.agrees() {
            disagreements += 1;
        }
        writeln!(
            text,
            "{},{},{},{},{},{},{},{},{}",
            fmt_f64(*tau),
            fmt_f64(r.a),
            fmt_f64(r.a_prime / j),
            rate_field(r.gamma_z, j),
            fmt_f64(r.d_opt),
            u8::from(r.flag_geo),
            u8::from(r.flag_rhp),
            u8::from(r.flag_blp),
            u8::from(r.singular)
        )?;
    }
    emit(out, &text)?;
    if disagreements > 0 {
        eprintln!("measures disagree at {disagreements} non-singular grid points");
        return Ok(Status::CheckFailed);
    }
    Ok(Status::Ok)
}

/// |ψ⟩⟨ψ| / ⟨ψ|ψ⟩.
fn projector(amps: &[Complex64]) -> Array2<Complex64> {
    let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    Array2::from_shape_fn((amps.len(), amps.len()), |(a, b)| amps[a] * amps[b].conj() / norm)
}

pub fn negativity_series(loaded: &Loaded, grid: &TimeGrid, cut: Cut) -> Result<Vec<(f64, NegativityReport)>> {
    let spec = &loaded.spec;
    let rho_s0 = loaded.system_state()?;
    let taus = grid.times();
    let reports: Vec<NegativityReport> = match cut {
        Cut::WithinSystem(k) => {
            if k == 0 || k >= spec.n_system() {
                bail!("cut system:{k} does not split {} system sites", spec.n_system());
            }
            // the reduced state only sees the environment populations
            let env = loaded.config.env.populations(spec, loaded.config.reference_j)?;
            let engine = DephasingEngine::new(spec, &env)?;
            let left = spec.levels().pow(k as u32);
            taus.par_iter()
                .map(|&tau| {
                    let rho = engine.reduced_state(&rho_s0, loaded.physical(tau))?;
                    Ok(bipartite_negativity(&rho, left)?)
                })
                .collect::<Result<_>>()?
        }
        Cut::SystemEnvironment => {
            let psi_e = loaded.config.env.pure_amplitudes(spec)?;
            let psi_s = loaded.config.system_state.as_ref().and_then(|s| s.pure_amplitudes(rho_s0.dim()));
            match (psi_s, psi_e) {
                (Some(psi_s), Some(psi_e)) => {
                    let energies = global_energies(spec, GLOBAL_CAP)?;
                    let psi = PureGlobalState::product(&psi_s, &psi_e)?;
                    taus.par_iter()
                        .map(|&tau| Ok(psi.evolved(&energies, loaded.physical(tau)).negativity()?))
                        .collect::<Result<_>>()?
                }
                (_, psi_e) => {
                    let rho_e = match psi_e {
                        Some(amps) => projector(&amps),
                        None => loaded.config.env.populations(spec, loaded.config.reference_j)?.to_density_matrix(),
                    };
                    let evolution = GlobalEvolution::new(spec, GlobalState::product(rho_s0.matrix(), &rho_e)?)?;
                    taus.par_iter()
                        .map(|&tau| Ok(negativity(&evolution.at(loaded.physical(tau)))?))
                        .collect::<Result<_>>()?
                }
            }
        }
    };
    Ok(taus.into_iter().zip(reports).collect())
}

pub fn negativity_cmd(loaded: &Loaded, grid: &TimeGrid, cut: Cut, out: Option<&Path>) -> Result<Status> {
    let series = negativity_series(loaded, grid, cut)?;
    let mut text = format!("{CSV_FORMAT_LINE}\nt,negativity,min_eigenvalue,trace_norm,raw\n");
    for (tau, r) in series {
        writeln!(
            text,
            "{},{},{},{},{}",
            fmt_f64(tau),
            fmt_f64(r.negativity()),
            fmt_f64(r.min_eigenvalue),
            fmt_f64(r.trace_norm),
            fmt_f64(r.raw)
        )?;
    }
    emit(out, &text)?;
    Ok(Status::Ok)
}

/// Infinite-range family followed towards the thermodynamic limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    /// Fixed number of system spins.
    FixedP(usize),
    /// System a fixed fraction of the ensemble.
    Fraction(f64),
}

impl std::str::FromStr for Family {
    type Err = String;

    /// `fixed-p:<p>` or `fraction:<r>`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if let Some(p) = s.strip_prefix("fixed-p:") {
            return match p.parse::<usize>() {
                Ok(p) if p > 0 => Ok(Family::FixedP(p)),
                _ => Err(format!("`{p}` is not a positive system size")),
            };
        }
        if let Some(r) = s.strip_prefix("fraction:") {
            return match r.parse::<f64>() {
                Ok(r) if r > 0.0 && r < 1.0 => Ok(Family::Fraction(r)),
                _ => Err(format!("`{r}` is not a fraction in (0, 1)")),
            };
        }
        Err(format!("unknown family `{s}`, expected fixed-p:<p> or fraction:<r>"))
    }
}

pub fn thermo_limit(family: Family, sizes: &[usize], jt: f64, out: Option<&Path>) -> Result<Status> {
    if sizes.is_empty() {
        bail!("--sizes needs at least one ensemble size");
    }
    let mut text = String::from(CSV_FORMAT_LINE);
    text.push('\n');
    match family {
        Family::FixedP(p) => {
            text.push_str("N,p,log_det\n");
            for &n in sizes {
                if n <= p {
                    bail!("N = {n} leaves no environment for p = {p}");
                }
                writeln!(text, "{n},{p},{}", fmt_f64(log_det_infinite_range(n, p, 1.0, jt)))?;
            }
        }
        Family::Fraction(r) => {
            text.push_str("N,p,log_det,asymptotic\n");
            for &n in sizes {
                let p = (r * n as f64).round() as usize;
                if (p as f64 - r * n as f64).abs() > 1e-9 || p == 0 || p >= n {
                    bail!("r N = {} is not a valid system size for N = {n}", r * n as f64);
                }
                let asym = log_det_infinite_fraction_asymptotic(n, r, 1.0, jt).map_or_else(|_| "nan".into(), fmt_f64);
                writeln!(text, "{n},{p},{},{asym}", fmt_f64(log_det_infinite_range(n, p, 1.0, jt)))?;
            }
        }
    }
    emit(out, &text)?;
    Ok(Status::Ok)
}

pub fn verify(seed: u64, fault: Fault, out: Option<&Path>) -> Result<Status> {
    let report = run_suite(seed, fault)?;
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    emit(out, &json)?;
    for check in report.checks.iter().filter(|c| !c.passed) {
        eprintln!(
            "check {} failed: deviation {} above tolerance {}",
            check.name,
            fmt_f64(check.max_deviation),
            fmt_f64(check.tolerance)
        );
    }
    Ok(if report.passed { Status::Ok } else { Status::CheckFailed })
}
