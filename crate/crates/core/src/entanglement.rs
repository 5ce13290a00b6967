// Copyright 2026 The spin-dephasing Contributors
// SPDX-License-Identifier: Apache-2.0

//! Whole-ensemble evolution, partial trace and transpose, and negativity.
//!
//! Global indices follow the basis convention of the rest of the crate:
//! index = s·D_E + σ with the system sites most significant.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::Serialize;

use crate::dephasing::DephasingEngine;
use crate::density::{ReducedState, HERMITICITY_TOL, TRACE_TOL};
use crate::env::EnvPopulations;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, hermiticity_deviation};
use crate::spin::{enumerate_configs, EnsembleSpec};

/// Largest global dimension handled densely, 2¹⁰.
pub const GLOBAL_CAP: u128 = 1 << 10;

/// Diagonal energies of H on every global configuration, in basis order.
pub fn global_energies(spec: &EnsembleSpec, cap: u128) -> Result<Vec<f64>> {
    enumerate_configs(spec.n_total(), spec.twice_spin(), cap)?
        .map(|c| spec.hamiltonian_total(&c))
        .collect()
}

/// Dense density matrix of system plus environment.
#[derive(Clone, Debug, PartialEq)]
pub struct GlobalState {
    sys_dim: usize,
    env_dim: usize,
    matrix: Array2<Complex64>,
}

impl GlobalState {
    /// Validates shape, Hermiticity and unit trace. Positivity is not checked
    /// here; it is preserved by every operation of this module.
    pub fn new(sys_dim: usize, env_dim: usize, matrix: Array2<Complex64>) -> Result<Self> {
        let n = sys_dim * env_dim;
        if matrix.dim() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: matrix.nrows(),
            });
        }
        check_operator(&matrix)?;
        Ok(Self {
            sys_dim,
            env_dim,
            matrix,
        })
    }

    /// ρ_S ⊗ ρ_E.
    pub fn product(rho_s: &Array2<Complex64>, rho_e: &Array2<Complex64>) -> Result<Self> {
        Self::new(rho_s.nrows(), rho_e.nrows(), crate::density::kron(rho_s, rho_e))
    }

    pub fn sys_dim(&self) -> usize {
        self.sys_dim
    }

    pub fn env_dim(&self) -> usize {
        self.env_dim
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }
}

fn check_operator(m: &Array2<Complex64>) -> Result<()> {
    let herm = hermiticity_deviation(m);
    let trace: Complex64 = m.diag().iter().sum();
    if herm > HERMITICITY_TOL || (trace - 1.0).norm() > TRACE_TOL {
        return Err(Error::InvalidState(format!(
            "global state: hermiticity {herm:e}, trace {trace}"
        )));
    }
    Ok(())
}

/// Phase evolution of a fixed initial global state, reusable across times.
#[derive(Clone, Debug)]
pub struct GlobalEvolution {
    energies: Vec<f64>,
    initial: GlobalState,
}

impl GlobalEvolution {
    pub fn new(spec: &EnsembleSpec, initial: GlobalState) -> Result<Self> {
        Self::with_cap(spec, initial, GLOBAL_CAP)
    }

    pub fn with_cap(spec: &EnsembleSpec, initial: GlobalState, cap: u128) -> Result<Self> {
        let energies = global_energies(spec, cap)?;
        if energies.len() != initial.matrix.nrows() {
            return Err(Error::DimensionMismatch {
                expected: energies.len(),
                got: initial.matrix.nrows(),
            });
        }
        Ok(Self { energies, initial })
    }

    /// e^{−iHt} ρ(0) e^{iHt}: entry (x, y) picks up e^{−i(E_x − E_y)t}.
    pub fn at(&self, t: f64) -> GlobalState {
        let e = &self.energies;
        let m0 = &self.initial.matrix;
        let matrix = Array2::from_shape_fn(m0.dim(), |(x, y)| {
            m0[[x, y]] * Complex64::from_polar(1.0, -(e[x] - e[y]) * t)
        });
        GlobalState {
            matrix,
            ..self.initial
        }
    }
}

/// ρ_{S+E}(t) from ρ_S(0) ⊗ ρ_E(0), with ρ_E(0) a full matrix.
pub fn evolve_global(
    spec: &EnsembleSpec,
    rho_s0: &ReducedState,
    rho_e0: &Array2<Complex64>,
    t: f64,
) -> Result<GlobalState> {
    let initial = GlobalState::product(rho_s0.matrix(), rho_e0)?;
    Ok(GlobalEvolution::new(spec, initial)?.at(t))
}

/// tr_E ρ as a plain matrix; also used for non-density operators.
pub fn partial_trace_env_matrix(m: &Array2<Complex64>, sys_dim: usize, env_dim: usize) -> Array2<Complex64> {
    Array2::from_shape_fn((sys_dim, sys_dim), |(a, b)| {
        (0..env_dim)
            .map(|s| m[[a * env_dim + s, b * env_dim + s]])
            .sum()
    })
}

/// tr_E ρ.
pub fn partial_trace_env(rho: &GlobalState) -> ReducedState {
    ReducedState::from_matrix_unchecked(partial_trace_env_matrix(
        &rho.matrix,
        rho.sys_dim,
        rho.env_dim,
    ))
}

/// tr_S ρ.
pub fn partial_trace_system(rho: &GlobalState) -> Array2<Complex64> {
    let (ds, de) = (rho.sys_dim, rho.env_dim);
    Array2::from_shape_fn((de, de), |(s, r)| {
        (0..ds).map(|a| rho.matrix[[a * de + s, a * de + r]]).sum()
    })
}

/// Transpose on the system factor: (a σ, b σ') ↦ (b σ, a σ').
pub fn partial_transpose_system_matrix(
    m: &Array2<Complex64>,
    sys_dim: usize,
    env_dim: usize,
) -> Array2<Complex64> {
    assert_eq!(m.nrows(), sys_dim * env_dim, "operator does not match the bipartition");
    Array2::from_shape_fn(m.dim(), |(x, y)| {
        let (a, s) = (x / env_dim, x % env_dim);
        let (b, r) = (y / env_dim, y % env_dim);
        m[[b * env_dim + s, a * env_dim + r]]
    })
}

pub fn partial_transpose_system(rho: &GlobalState) -> Array2<Complex64> {
    partial_transpose_system_matrix(&rho.matrix, rho.sys_dim, rho.env_dim)
}

/// Spectral summary of a partial transpose.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NegativityReport {
    /// (‖ρ^{T_S}‖₁ − 1)/2 as computed.
    pub raw: f64,
    pub min_eigenvalue: f64,
    pub trace_norm: f64,
}

impl NegativityReport {
    /// Negativity clamped at zero.
    pub fn negativity(&self) -> f64 {
        self.raw.max(0.0)
    }

    fn from_eigenvalues(eigs: impl IntoIterator<Item = f64>) -> Self {
        let mut min = f64::INFINITY;
        let mut norm = 0.0;
        for l in eigs {
            min = min.min(l);
            norm += l.abs();
        }
        Self {
            raw: 0.5 * (norm - 1.0),
            min_eigenvalue: min,
            trace_norm: norm,
        }
    }
}

/// Groups of environment indices that never share a nonzero entry of `m`
/// with indices outside the group. The partial transpose on S is block
/// diagonal over these groups; entries that are exactly zero stay zero
/// under the phase evolution, so the split is exact.
fn env_components(m: &Array2<Complex64>, env_dim: usize) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..env_dim).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for ((x, y), z) in m.indexed_iter() {
        if *z != Complex64::new(0.0, 0.0) {
            let (a, b) = (find(&mut parent, x % env_dim), find(&mut parent, y % env_dim));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; env_dim];
    for s in 0..env_dim {
        let root = find(&mut parent, s);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(s);
    }
    groups
}

/// Negativity across the system–environment cut.
pub fn negativity(rho: &GlobalState) -> Result<NegativityReport> {
    let (ds, de) = (rho.sys_dim, rho.env_dim);
    let pt = partial_transpose_system(rho);
    let mut eigs = Vec::with_capacity(ds * de);
    for group in env_components(&rho.matrix, de) {
        let idx: Vec<usize> = (0..ds)
            .flat_map(|a| group.iter().map(move |&s| a * de + s))
            .collect();
        let block = Array2::from_shape_fn((idx.len(), idx.len()), |(i, j)| pt[[idx[i], idx[j]]]);
        eigs.extend(hermitian_eigenvalues(&block)?.eigenvalues);
    }
    Ok(NegativityReport::from_eigenvalues(eigs))
}

/// Pure state of system plus environment, amplitudes in global basis order.
#[derive(Clone, Debug, PartialEq)]
pub struct PureGlobalState {
    sys_dim: usize,
    env_dim: usize,
    psi: Array1<Complex64>,
}

impl PureGlobalState {
    /// |ψ_S⟩ ⊗ |ψ_E⟩, each normalized first.
    pub fn product(psi_s: &[Complex64], psi_e: &[Complex64]) -> Result<Self> {
        let normalize = |v: &[Complex64]| -> Result<Vec<Complex64>> {
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if v.is_empty() || !n.is_finite() || n <= 0.0 {
                return Err(Error::InvalidState("pure state needs a nonzero vector".into()));
            }
            Ok(v.iter().map(|z| z / n).collect())
        };
        let (s, e) = (normalize(psi_s)?, normalize(psi_e)?);
        let psi = s
            .iter()
            .flat_map(|a| e.iter().map(move |b| a * b))
            .collect();
        Ok(Self {
            sys_dim: s.len(),
            env_dim: e.len(),
            psi,
        })
    }

    pub fn amplitudes(&self) -> &Array1<Complex64> {
        &self.psi
    }

    pub fn sys_dim(&self) -> usize {
        self.sys_dim
    }

    pub fn env_dim(&self) -> usize {
        self.env_dim
    }

    /// e^{−iHt}|ψ⟩ for diagonal energies.
    pub fn evolved(&self, energies: &[f64], t: f64) -> Self {
        let psi = self
            .psi
            .iter()
            .zip(energies)
            .map(|(a, e)| a * Complex64::from_polar(1.0, -e * t))
            .collect();
        Self { psi, ..*self }
    }

    /// |ψ⟩⟨ψ| as a dense global state.
    pub fn to_dense(&self) -> GlobalState {
        let n = self.psi.len();
        let matrix = Array2::from_shape_fn((n, n), |(x, y)| self.psi[x] * self.psi[y].conj());
        GlobalState {
            sys_dim: self.sys_dim,
            env_dim: self.env_dim,
            matrix,
        }
    }

    /// Negativity from the partial transpose restricted to C^{D_S} ⊗ V,
    /// where V is spanned by the environment vectors ψ_a = ⟨a|ψ⟩. The
    /// partial transpose vanishes outside that subspace, so its nonzero
    /// spectrum is that of a (D_S · dim V)-sized matrix.
    pub fn negativity(&self) -> Result<NegativityReport> {
        let (ds, de) = (self.sys_dim, self.env_dim);
        let rows: Vec<Vec<Complex64>> = (0..ds)
            .map(|a| self.psi.slice(ndarray::s![a * de..(a + 1) * de]).to_vec())
            .collect();
        let basis = orthonormal_span(&rows);
        let r = basis.len();
        // φ_a = Q† ψ_a
        let phi: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|row| {
                basis
                    .iter()
                    .map(|q| q.iter().zip(row).map(|(qi, ri)| qi.conj() * ri).sum())
                    .collect()
            })
            .collect();
        // block (b, a) of the transposed operator is φ_a φ_b†
        let block = Array2::from_shape_fn((ds * r, ds * r), |(x, y)| {
            let (b, i) = (x / r, x % r);
            let (a, k) = (y / r, y % r);
            phi[a][i] * phi[b][k].conj()
        });
        let eigs = if r == 0 {
            Vec::new()
        } else {
            hermitian_eigenvalues(&block)?.eigenvalues
        };
        Ok(NegativityReport::from_eigenvalues(eigs))
    }
}

/// Orthonormal vectors whose span contains every input vector, from a
/// Householder QR factorization. Dependent inputs still yield orthonormal
/// columns, which keeps the compressed operator exact.
fn orthonormal_span(vectors: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let zero = Complex64::new(0.0, 0.0);
    let n = vectors.first().map_or(0, Vec::len);
    let m = vectors.len().min(n);
    // columns of A are the input vectors
    let mut a: Vec<Vec<Complex64>> = vectors.to_vec();
    let mut reflectors: Vec<Option<Vec<Complex64>>> = Vec::with_capacity(m);
    for k in 0..m {
        let x = &a[k][k..];
        // work on x / max|x_i| so |v|² cannot underflow; the reflector only
        // depends on the direction of v
        let scale = x.iter().fold(0.0f64, |s, z| s.max(z.norm()));
        if scale == 0.0 {
            reflectors.push(None);
            continue;
        }
        let mut v: Vec<Complex64> = x.iter().map(|z| z / scale).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let phase = if v[0].norm() > 0.0 {
            v[0] / v[0].norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        v[0] += phase * norm;
        let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        for col in a.iter_mut().skip(k) {
            let dot: Complex64 = v.iter().zip(&col[k..]).map(|(vi, ci)| vi.conj() * ci).sum();
            let f = dot * (2.0 / vv);
            for (ci, vi) in col[k..].iter_mut().zip(&v) {
                *ci -= f * vi;
            }
        }
        reflectors.push(Some(v));
    }
    // Q e_k = H_0 ⋯ H_{m−1} e_k
    (0..m)
        .map(|k| {
            let mut q = vec![zero; n];
            q[k] = Complex64::new(1.0, 0.0);
            for (j, r) in reflectors.iter().enumerate().rev() {
                if let Some(v) = r {
                    let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
                    let dot: Complex64 = v.iter().zip(&q[j..]).map(|(vi, qi)| vi.conj() * qi).sum();
                    let f = dot * (2.0 / vv);
                    for (qi, vi) in q[j..].iter_mut().zip(v) {
                        *qi -= f * vi;
                    }
                }
            }
            q
        })
        .collect()
}

/// Which bipartition a negativity is computed across.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cut {
    /// System versus environment.
    SystemEnvironment,
    /// The first `k` system sites versus the remaining system sites.
    WithinSystem(usize),
}

impl std::str::FromStr for Cut {
    type Err = Error;

    /// `global`, or `system:k`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "global" {
            return Ok(Cut::SystemEnvironment);
        }
        if let Some(k) = s.strip_prefix("system:") {
            if let Ok(k) = k.parse::<usize>() {
                return Ok(Cut::WithinSystem(k));
            }
        }
        Err(Error::InvalidModel(format!(
            "unknown cut `{s}`, expected `global` or `system:<k>`"
        )))
    }
}

/// Negativity of a system state across the split of its sites into the
/// first `k` and the rest.
pub fn bipartite_negativity(rho: &ReducedState, left_dim: usize) -> Result<NegativityReport> {
    let d = rho.dim();
    if left_dim == 0 || !d.is_multiple_of(left_dim) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: left_dim,
        });
    }
    let pt = partial_transpose_system_matrix(rho.matrix(), left_dim, d / left_dim);
    Ok(NegativityReport::from_eigenvalues(
        hermitian_eigenvalues(&pt)?.eigenvalues,
    ))
}

/// Negativity of ρ_S(t) across the cut after `k` system sites.
pub fn system_internal_negativity(
    spec: &EnsembleSpec,
    rho_s0: &ReducedState,
    env: &EnvPopulations,
    t: f64,
    k: usize,
) -> Result<NegativityReport> {
    if k == 0 || k >= spec.n_system() {
        return Err(Error::InvalidModel(format!(
            "cut after {k} of {} system sites is not a bipartition",
            spec.n_system()
        )));
    }
    let engine = DephasingEngine::new(spec, env)?;
    let rho = engine.reduced_state(rho_s0, t)?;
    bipartite_negativity(&rho, spec.levels().pow(k as u32))
}
