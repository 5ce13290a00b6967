// Copyright 2026 The spin-dephasing Contributors
// SPDX-License-Identifier: Apache-2.0

//! Closed forms of ln det M_S(t) for spin-½ ensembles with a maximally
//! mixed environment.
//!
//! Exponents are exact big integers and are converted to floating point only
//! for the final multiplication with ln|cos|.

use std::str::FromStr;

use ndarray::Array2;
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::spin::{build_coupling, CouplingModel, PowerLawNormalization};

/// Pascal triangle of exact binomial coefficients C(n, k), 0 ≤ k ≤ n ≤ n_max.
#[derive(Clone, Debug)]
pub struct BinomialTable {
    rows: Vec<Vec<BigUint>>,
}

impl BinomialTable {
    pub fn new(n_max: usize) -> Self {
        let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(n_max + 1);
        rows.push(vec![BigUint::from(1u32)]);
        for n in 1..=n_max {
            let prev = &rows[n - 1];
            let mut row = Vec::with_capacity(n + 1);
            row.push(BigUint::from(1u32));
            for k in 1..n {
                row.push(&prev[k - 1] + &prev[k]);
            }
            row.push(BigUint::from(1u32));
            rows.push(row);
        }
        Self { rows }
    }

    pub fn n_max(&self) -> usize {
        self.rows.len() - 1
    }

    /// C(n, k), zero outside 0 ≤ k ≤ n.
    pub fn get(&self, n: usize, k: i64) -> BigUint {
        if k < 0 || k as usize > n {
            return BigUint::zero();
        }
        self.rows[n][k as usize].clone()
    }
}

/// exponent · ln|cos x|, with 0 · ∞ read as 0 for overflowing exponents.
fn scaled_log_cos(exponent: &BigUint, x: f64) -> f64 {
    let lc = x.cos().abs().ln();
    if lc == 0.0 || exponent.is_zero() {
        return 0.0;
    }
    exponent.to_f64().unwrap_or(f64::INFINITY) * lc
}

/// 2^{2p} ln|cos Jt|: nearest-neighbour ring.
///
/// Exact for p = 1 with N ≥ 3 and for p ≥ 2 with N − p ≥ 2; when a single
/// environment site closes the ring both system ends couple to it.
pub fn log_det_nn_1d(p: u32, j: f64, t: f64) -> f64 {
    scaled_log_cos(&(BigUint::from(1u32) << (2 * p as usize)), j * t)
}

/// Number of system configurations with Σ s_i = (p − 2k)/2: C(p, k).
pub fn multiplicity_sum_si(p: usize, k: usize) -> BigUint {
    BinomialTable::new(p).get(p, k as i64)
}

/// Σ_k C(m, k) C(m, k − q) = C(2m, m − q).
pub fn chu_vandermonde_exponent(m: usize, q: usize) -> BigUint {
    BinomialTable::new(2 * m).get(2 * m, m as i64 - q as i64)
}

/// The left-hand side of the Chu–Vandermonde identity, summed explicitly.
pub fn chu_vandermonde_sum(m: usize, q: usize) -> BigUint {
    let table = BinomialTable::new(m);
    (0..=m)
        .map(|k| table.get(m, k as i64) * table.get(m, k as i64 - q as i64))
        .sum()
}

/// Infinite range J_ij = J/N, as the double sum over the magnetization
/// sectors j, k of the pair:
/// Σ_{j,k=0..p} (N − p) C(p,k) C(p,j) ln|cos(Jt(j − k)/N)|.
pub fn log_det_infinite_range(n: usize, p: usize, j: f64, t: f64) -> f64 {
    let table = BinomialTable::new(p);
    let env = BigUint::from(n - p);
    let mut total = 0.0;
    for a in 0..=p {
        for b in 0..=p {
            if a == b {
                continue;
            }
            let e = &env * table.get(p, a as i64) * table.get(p, b as i64);
            total += scaled_log_cos(&e, j * t * (a as f64 - b as f64) / n as f64);
        }
    }
    total
}

/// Same quantity with the sector sum collapsed by Chu–Vandermonde:
/// 2 (N − p) Σ_{q=1..p} C(2p, p − q) ln|cos(Jtq/N)|.
pub fn log_det_infinite_range_collapsed(n: usize, p: usize, j: f64, t: f64) -> f64 {
    let table = BinomialTable::new(2 * p);
    let env = BigUint::from(2 * (n - p));
    (1..=p)
        .map(|q| {
            let e = &env * table.get(2 * p, (p - q) as i64);
            scaled_log_cos(&e, j * t * q as f64 / n as f64)
        })
        .sum()
}

/// Second-order expansion of the collapsed form for a system that is a
/// fraction r of the ensemble:
/// −(1 − r)(Jt)²/N Σ_{q=1..rN} C(2rN, rN − q) q².
///
/// Reliable while Jt·r is small (roughly below 0.2).
pub fn log_det_infinite_fraction_asymptotic(n: usize, r: f64, j: f64, t: f64) -> Result<f64> {
    let rn = r * n as f64;
    let m = rn.round();
    if !(r > 0.0 && r < 1.0) || (rn - m).abs() > 1e-9 {
        return Err(Error::InvalidModel(format!(
            "fraction r = {r} must lie in (0, 1) with rN integral for N = {n}"
        )));
    }
    let m = m as usize;
    let table = BinomialTable::new(2 * m);
    let sum: BigUint = (1..=m)
        .map(|q| table.get(2 * m, (m - q) as i64) * BigUint::from(q * q))
        .sum();
    let jt = j * t;
    if jt == 0.0 {
        return Ok(0.0);
    }
    Ok(-(1.0 - r) * jt * jt / n as f64 * sum.to_f64().unwrap_or(f64::INFINITY))
}

/// q · 2^{2q² + 1} ln|cos Jt|: q × q corner block of a periodic square
/// lattice with at least one environment row and column on each side.
pub fn log_det_2d_nn(q: u32, j: f64, t: f64) -> f64 {
    let q = q as usize;
    let e = BigUint::from(q) << (2 * q * q + 1);
    scaled_log_cos(&e, j * t)
}

/// Σ over ordered system pairs and environment sites of
/// ln|cos(t Σ_i J_ij (s_i − s'_i))|, for any coupling matrix with the system
/// on the first p sites.
pub fn log_det_product_form(couplings: &Array2<f64>, p: usize, t: f64) -> f64 {
    let n = couplings.nrows();
    let dim = 1usize << p;
    // s_i ∈ {+½, −½}; bit set means −½, most significant site first
    let spin = |c: usize, i: usize| if (c >> (p - 1 - i)) & 1 == 0 { 0.5 } else { -0.5 };
    let mut total = 0.0;
    for a in 0..dim {
        for b in 0..dim {
            if a == b {
                continue;
            }
            for e in p..n {
                let arg: f64 = (0..p)
                    .map(|i| couplings[[i, e]] * (spin(a, i) - spin(b, i)))
                    .sum();
                total += (arg * t).cos().abs().ln();
            }
        }
    }
    total
}

/// Power-law ring J_ij = J_N(α)/r_ij^α, system on sites 0..p.
pub fn log_det_power_law(
    n: usize,
    p: usize,
    alpha: f64,
    j: f64,
    normalization: PowerLawNormalization,
    t: f64,
) -> Result<f64> {
    let model = CouplingModel::PowerLawRing {
        j,
        alpha,
        normalization,
    };
    Ok(log_det_product_form(&build_coupling(&model, n)?, p, t))
}

/// Closed forms addressable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosedForm {
    NearestNeighbor1d,
    InfiniteRange,
    Square2d,
    PowerLaw,
    FractionAsymptotic,
}

impl ClosedForm {
    pub const NAMES: [&'static str; 5] = ["nn1d", "inf", "2d", "pl", "frac-asym"];

    pub fn name(self) -> &'static str {
        match self {
            ClosedForm::NearestNeighbor1d => "nn1d",
            ClosedForm::InfiniteRange => "inf",
            ClosedForm::Square2d => "2d",
            ClosedForm::PowerLaw => "pl",
            ClosedForm::FractionAsymptotic => "frac-asym",
        }
    }

    /// Bind the form to a coupling model, ensemble size and system size.
    pub fn bind(self, model: &CouplingModel, n: usize, p: usize) -> Result<BoundClosedForm> {
        let mismatch = || {
            Error::InvalidModel(format!(
                "closed form `{}` does not apply to model {model:?}",
                self.name()
            ))
        };
        let bound = match (self, model) {
            (ClosedForm::NearestNeighbor1d, CouplingModel::NearestNeighborRing { j }) => {
                BoundClosedForm::Nn1d { p: p as u32, j: *j }
            }
            (ClosedForm::InfiniteRange, CouplingModel::InfiniteRange { j }) => {
                BoundClosedForm::Infinite { n, p, j: *j }
            }
            (ClosedForm::FractionAsymptotic, CouplingModel::InfiniteRange { j }) => {
                BoundClosedForm::FractionAsymptotic {
                    n,
                    r: p as f64 / n as f64,
                    j: *j,
                }
            }
            (ClosedForm::Square2d, CouplingModel::NearestNeighborTorus { j, .. }) => {
                let q = (p as f64).sqrt().round() as u32;
                if (q * q) as usize != p {
                    return Err(Error::InvalidModel(format!(
                        "2d closed form needs a square system block, got p = {p}"
                    )));
                }
                BoundClosedForm::Square2d { q, j: *j }
            }
            (ClosedForm::PowerLaw, CouplingModel::PowerLawRing { .. }) => {
                BoundClosedForm::Product {
                    couplings: build_coupling(model, n)?,
                    p,
                }
            }
            _ => return Err(mismatch()),
        };
        Ok(bound)
    }
}

impl FromStr for ClosedForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "nn1d" => ClosedForm::NearestNeighbor1d,
            "inf" => ClosedForm::InfiniteRange,
            "2d" => ClosedForm::Square2d,
            "pl" => ClosedForm::PowerLaw,
            "frac-asym" => ClosedForm::FractionAsymptotic,
            other => {
                return Err(Error::InvalidModel(format!(
                    "unknown closed form `{other}`, expected one of {}",
                    Self::NAMES.join(", ")
                )))
            }
        })
    }
}

/// A closed form with its parameters fixed; evaluates ln det M_S(t).
#[derive(Clone, Debug)]
pub enum BoundClosedForm {
    Nn1d { p: u32, j: f64 },
    Infinite { n: usize, p: usize, j: f64 },
    FractionAsymptotic { n: usize, r: f64, j: f64 },
    Square2d { q: u32, j: f64 },
    Product { couplings: Array2<f64>, p: usize },
}

impl BoundClosedForm {
    pub fn log_det(&self, t: f64) -> Result<f64> {
        Ok(match self {
            BoundClosedForm::Nn1d { p, j } => log_det_nn_1d(*p, *j, t),
            BoundClosedForm::Infinite { n, p, j } => log_det_infinite_range(*n, *p, *j, t),
            BoundClosedForm::FractionAsymptotic { n, r, j } => {
                log_det_infinite_fraction_asymptotic(*n, *r, *j, t)?
            }
            BoundClosedForm::Square2d { q, j } => log_det_2d_nn(*q, *j, t),
            BoundClosedForm::Product { couplings, p } => log_det_product_form(couplings, *p, t),
        })
    }
}
