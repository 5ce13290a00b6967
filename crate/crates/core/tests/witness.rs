// Copyright 2026 The spin-dephasing Contributors
// SPDX-License-Identifier: Apache-2.0

//! Witness series, episode detection, CSV output and the self-check suite.

use std::f64::consts::PI;

use spin_dephasing::single_spin::star_ensemble;
use spin_dephasing::verify::{run_suite, Fault};
use spin_dephasing::witness::{fmt_f64, CSV_FORMAT_LINE};
use spin_dephasing::{
    maximally_mixed, CouplingModel, DephasingEngine, EnsembleSpec, TimeGrid, WitnessSeries,
    DEFAULT_ENUMERATION_CAP as CAP,
};

fn single_coupling() -> DephasingEngine {
    let spec = star_ensemble(&[1.0]).unwrap();
    DephasingEngine::new(&spec, &maximally_mixed(1, 1, CAP).unwrap()).unwrap()
}

#[test]
fn single_coupling_episode_sits_between_quarter_and_half_period() {
    // det = cos²(t): d/dt ln det = −2 tan t, positive on (π/2, π)
    let engine = single_coupling();
    let series = WitnessSeries::compute(&engine, &TimeGrid::new(0.0, 4.0, 301).unwrap());
    assert_eq!(series.episodes.len(), 1);
    let e = series.episodes[0];
    assert!((e.start - PI / 2.0).abs() < 1e-8, "{e:?}");
    assert!((e.end - PI).abs() < 1e-8 * PI, "{e:?}");
}

#[test]
fn episodes_touching_the_grid_end_are_clipped() {
    let engine = single_coupling();
    let series = WitnessSeries::compute(&engine, &TimeGrid::new(2.0, 3.0, 11).unwrap());
    assert_eq!(series.episodes.len(), 1);
    assert_eq!(series.episodes[0].start, 2.0);
    assert_eq!(series.episodes[0].end, 3.0);
}

#[test]
fn markovian_witness_has_no_episodes() {
    // before the first zero the single-coupling witness only decreases
    let engine = single_coupling();
    let series = WitnessSeries::compute(&engine, &TimeGrid::new(0.0, 1.5, 200).unwrap());
    assert!(series.episodes.is_empty());
    assert!(series.log_det.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn grid_is_validated_and_inclusive() {
    assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
    assert!(TimeGrid::new(1.0, 1.0, 10).is_err());
    assert!(TimeGrid::new(0.0, f64::NAN, 10).is_err());
    let g = TimeGrid::new(0.0, 2.0 * PI, 1000).unwrap();
    let times = g.times();
    assert_eq!(times.len(), 1000);
    assert_eq!(times[0], 0.0);
    assert_eq!(times[999], 2.0 * PI);
}

#[test]
fn csv_is_versioned_and_deterministic() {
    let spec = EnsembleSpec::from_model(&CouplingModel::NearestNeighborRing { j: 1.0 }, 6, 2, 1, 0.3).unwrap();
    let engine = DephasingEngine::new(&spec, &maximally_mixed(4, 1, CAP).unwrap()).unwrap();
    let grid = TimeGrid::new(0.0, 2.0 * PI, 257).unwrap();
    let a = WitnessSeries::compute(&engine, &grid).to_csv();
    let b = WitnessSeries::compute(&engine, &grid).to_csv();
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(lines.next(), Some(CSV_FORMAT_LINE));
    assert_eq!(lines.next(), Some("t,log_det,det,dlogdet_dt,in_episode"));
    assert_eq!(lines.count(), 257);
    // values round-trip through the text form
    let series = WitnessSeries::compute(&engine, &grid);
    for (line, v) in a.lines().skip(2).zip(&series.log_det) {
        let field = line.split(',').nth(1).unwrap();
        assert_eq!(field.parse::<f64>().unwrap(), *v);
    }
}

#[test]
fn singular_points_are_spelled_out() {
    assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
    assert_eq!(fmt_f64(f64::NAN), "nan");
    assert_eq!(fmt_f64(0.0).parse::<f64>().unwrap(), 0.0);
    let engine = single_coupling();
    let series = WitnessSeries::on_times(&engine, &[0.0, PI / 2.0]);
    assert!(series.det[1] < 1e-30);
}

#[test]
fn episodes_json_lists_pairs() {
    let engine = single_coupling();
    let series = WitnessSeries::compute(&engine, &TimeGrid::new(0.0, 3.0, 301).unwrap());
    let pairs: Vec<[f64; 2]> = serde_json::from_str(&series.episodes_json()).unwrap();
    assert_eq!(pairs, vec![[series.episodes[0].start, series.episodes[0].end]]);
}

#[test]
fn self_check_suite_passes_and_catches_a_sign_flip() {
    let clean = run_suite(7, Fault::None).unwrap();
    assert!(clean.passed, "{clean:?}");
    assert!(clean.checks.iter().all(|c| c.passed && c.cases > 0));
    let broken = run_suite(7, Fault::FlipInteractionSign).unwrap();
    assert!(!broken.passed);
    assert!("flip-hse-sign".parse::<Fault>().is_ok());
    assert!("other".parse::<Fault>().is_err());
}
