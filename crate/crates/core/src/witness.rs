// Copyright 2026 The spin-dephasing Contributors
// SPDX-License-Identifier: Apache-2.0

//! Witness time series and non-Markovian episodes.
//!
//! An episode is a maximal open interval on which d/dt ln det M_S > 0. Grid
//! points where the determinant vanishes never belong to one.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dephasing::{DephasingEngine, WitnessPoint};
use crate::error::{Error, Result};

/// First line of every CSV emitted by this crate.
pub const CSV_FORMAT_LINE: &str = "# spin-dephasing csv v1";

/// Relative tolerance of episode endpoints.
pub const BISECTION_REL_TOL: f64 = 1e-9;

/// Uniform grid of `points` times from `start` to `stop` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl TimeGrid {
    pub fn new(start: f64, stop: f64, points: usize) -> Result<Self> {
        if points < 2 || !start.is_finite() || !stop.is_finite() || stop <= start {
            return Err(Error::InvalidModel(format!(
                "time grid needs stop > start and at least 2 points, got {start}:{stop}:{points}"
            )));
        }
        Ok(Self {
            start,
            stop,
            points,
        })
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.points - 1) as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k + 1 == self.points {
            self.stop
        } else {
            self.start + k as f64 * self.step()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.time(k)).collect()
    }
}

/// Open interval (start, end).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub start: f64,
    pub end: f64,
}

impl Episode {
    pub fn width(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains(&self, t: f64) -> bool {
        t > self.start && t < self.end
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessSeries {
    pub times: Vec<f64>,
    pub log_det: Vec<f64>,
    pub det: Vec<f64>,
    /// `None` where the determinant vanishes.
    pub dlogdet_dt: Vec<Option<f64>>,
    pub episodes: Vec<Episode>,
}

/// Sign of the witness derivative at a time: +1 growing, −1 not growing,
/// 0 singular (det = 0).
fn growth_sign(p: &WitnessPoint) -> i8 {
    match p.dlogdet_dt {
        None => 0,
        Some(d) if d > 0.0 => 1,
        Some(_) => -1,
    }
}

/// Locate the boundary between `lo` (sign `s_lo`) and `hi` by bisection.
fn bisect(engine: &DephasingEngine, mut lo: f64, mut hi: f64, s_lo: i8) -> f64 {
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    while hi - lo > BISECTION_REL_TOL * scale {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if growth_sign(&engine.witness(mid)) == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Episodes from the sampled signs; endpoints at sign changes are refined by
/// bisection, episodes touching the grid ends are clipped to the span.
pub fn detect_episodes(engine: &DephasingEngine, times: &[f64], points: &[WitnessPoint]) -> Vec<Episode> {
    let signs: Vec<i8> = points.iter().map(growth_sign).collect();
    let mut episodes = Vec::new();
    let mut open: Option<f64> = None;
    for k in 0..times.len() {
        let positive = signs[k] == 1;
        match (open, positive) {
            (None, true) => {
                open = Some(if k == 0 {
                    times[0]
                } else {
                    bisect(engine, times[k - 1], times[k], signs[k - 1])
                });
            }
            (Some(start), false) => {
                let end = bisect(engine, times[k - 1], times[k], 1);
                episodes.push(Episode { start, end });
                open = None;
            }
            _ => {}
        }
    }
    if let Some(start) = open {
        episodes.push(Episode {
            start,
            end: *times.last().unwrap(),
        });
    }
    episodes
}

impl WitnessSeries {
    /// Evaluate on the grid, in parallel over time points.
    pub fn compute(engine: &DephasingEngine, grid: &TimeGrid) -> Self {
        Self::on_times(engine, &grid.times())
    }

    pub fn on_times(engine: &DephasingEngine, times: &[f64]) -> Self {
        let points: Vec<WitnessPoint> = times.par_iter().map(|&t| engine.witness(t)).collect();
        let episodes = detect_episodes(engine, times, &points);
        Self {
            times: times.to_vec(),
            log_det: points.iter().map(|p| p.log_det).collect(),
            det: points.iter().map(|p| p.det()).collect(),
            dlogdet_dt: points.iter().map(|p| p.dlogdet_dt).collect(),
            episodes,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Whether grid point k lies inside a detected episode.
    pub fn in_episode(&self, k: usize) -> bool {
        self.det[k] > 0.0 && self.episodes.iter().any(|e| e.contains(self.times[k]))
    }

    /// CSV with columns t, log_det, det, dlogdet_dt, in_episode.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_FORMAT_LINE);
        out.push('\n');
        out.push_str("t,log_det,det,dlogdet_dt,in_episode\n");
        for k in 0..self.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                fmt_f64(self.times[k]),
                fmt_f64(self.log_det[k]),
                fmt_f64(self.det[k]),
                self.dlogdet_dt[k].map_or_else(|| "nan".to_string(), fmt_f64),
                u8::from(self.in_episode(k))
            );
        }
        out
    }

    /// Episodes as a JSON array of [start, end] pairs.
    pub fn episodes_json(&self) -> String {
        let pairs: Vec<[f64; 2]> = self.episodes.iter().map(|e| [e.start, e.end]).collect();
        serde_json::to_string_pretty(&pairs).expect("finite floats serialize")
    }
}

/// Shortest round-trip representation; `inf`, `-inf` and `nan` spelled out.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{basis_state, maximally_mixed};
    use crate::spin::{CouplingModel, EnsembleSpec, SpinConfig, DEFAULT_ENUMERATION_CAP as CAP};
    use std::f64::consts::PI;

    fn ring_engine(n: usize, p: usize) -> DephasingEngine {
        let spec =
            EnsembleSpec::from_model(&CouplingModel::NearestNeighborRing { j: 1.0 }, n, p, 1, 0.0)
                .unwrap();
        DephasingEngine::new(&spec, &maximally_mixed(n - p, 1, CAP).unwrap()).unwrap()
    }

    #[test]
    fn cos4_episodes() {
        let engine = ring_engine(5, 1);
        let grid = TimeGrid::new(0.0, 2.0 * PI, 1000).unwrap();
        let series = WitnessSeries::compute(&engine, &grid);
        assert_eq!(series.det[0], 1.0);
        let expected = [(PI / 2.0, PI), (1.5 * PI, 2.0 * PI)];
        assert_eq!(series.episodes.len(), 2);
        for (e, (a, b)) in series.episodes.iter().zip(expected) {
            assert!((e.start - a).abs() < 1e-8, "{e:?}");
            assert!((e.end - b).abs() < 1e-8, "{e:?}");
        }
    }

    #[test]
    fn basis_env_has_no_episodes() {
        let spec =
            EnsembleSpec::from_model(&CouplingModel::NearestNeighborRing { j: 1.0 }, 6, 2, 1, 0.4)
                .unwrap();
        let sigma = SpinConfig::from_twice(&[1, -1, -1, 1], 1).unwrap();
        let engine = DephasingEngine::new(&spec, &basis_state(&sigma, 1, CAP).unwrap()).unwrap();
        let series = WitnessSeries::compute(&engine, &TimeGrid::new(0.0, 10.0, 200).unwrap());
        assert!(series.episodes.is_empty());
        assert!(series.det.iter().all(|&d| d == 1.0));
    }

    #[test]
    fn csv_shape() {
        let engine = ring_engine(4, 1);
        let series = WitnessSeries::compute(&engine, &TimeGrid::new(0.0, 1.0, 3).unwrap());
        let csv = series.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_FORMAT_LINE);
        assert_eq!(lines[1], "t,log_det,det,dlogdet_dt,in_episode");
        assert_eq!(lines.len(), 5);
        assert!(lines[2].starts_with("0e0,0e0,1e0,"));
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
        assert!(TimeGrid::new(1.0, 1.0, 5).is_err());
        let g = TimeGrid::new(0.0, 2.0 * PI, 1000).unwrap();
        assert_eq!(g.time(999), 2.0 * PI);
    }
}
