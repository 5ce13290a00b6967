// Copyright 2026 The spin-dephasing Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dense Hermitian eigensolver and small real determinants.
//!
//! Eigenvalues come from a Householder reduction of the Hermitian matrix to
//! real symmetric tridiagonal form followed by implicit QL iteration with
//! Wilkinson shifts.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on |A − A†| (relative to the largest entry) accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

const MAX_QL_SWEEPS: usize = 60;

/// Sorted real eigenvalues of a Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianSpectrum {
    pub eigenvalues: Vec<f64>,
}

impl HermitianSpectrum {
    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues.iter().map(|v| v.abs()).sum()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NAN)
    }

    pub fn sum(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }
}

/// Largest |A_ij − conj(A_ji)|.
pub fn hermiticity_deviation(m: &Array2<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    worst
}

fn check_hermitian(m: &Array2<Complex64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let scale = m.iter().fold(1.0f64, |s, z| s.max(z.norm()));
    let dev = hermiticity_deviation(m);
    if dev > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// Row-major copy of the lower triangle with the diagonal made real.
fn lower_copy(m: &Array2<Complex64>) -> Vec<Complex64> {
    let n = m.nrows();
    let mut a = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..i {
            a[i * n + j] = m[[i, j]];
        }
        a[i * n + i] = Complex64::new(m[[i, i]].re, 0.0);
    }
    a
}

struct Tridiagonal {
    diag: Vec<f64>,
    /// Complex subdiagonal: entry k couples rows k and k+1.
    off: Vec<Complex64>,
    /// Householder vectors (unnormalized) and their scale 2/|v|², one per step.
    reflectors: Vec<(usize, Vec<Complex64>, f64)>,
}

/// Unitary reduction to tridiagonal form using only the lower triangle of `a`.
fn tridiagonalize(a: &mut [Complex64], n: usize, keep_reflectors: bool) -> Tridiagonal {
    let zero = Complex64::new(0.0, 0.0);
    let mut diag = vec![0.0; n];
    let mut off = vec![zero; n.saturating_sub(1)];
    let mut reflectors = Vec::new();
    let mut v = vec![zero; n];
    let mut p = vec![zero; n];

    for k in 0..n.saturating_sub(2) {
        diag[k] = a[k * n + k].re;
        let start = k + 1;
        let m = n - start;
        let x0 = a[start * n + k];
        let tail: f64 = ((start + 1)..n).map(|i| a[i * n + k].norm_sqr()).sum();
        if tail == 0.0 {
            off[k] = x0;
            continue;
        }
        let norm = (x0.norm_sqr() + tail).sqrt();
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * norm;
        // the reflector is invariant under scaling v; keeping |v| near one
        // stops |v|² from underflowing on tiny columns
        let scale = (0..m).fold(0.0f64, |s, i| s.max(a[(start + i) * n + k].norm()));
        for i in 0..m {
            v[i] = a[(start + i) * n + k] / scale;
        }
        v[0] -= alpha / scale;
        let vnorm2: f64 = v[..m].iter().map(|z| z.norm_sqr()).sum();
        let beta = 2.0 / vnorm2;

        // p = beta · B v, B the trailing Hermitian block (lower triangle stored)
        for pi in p[..m].iter_mut() {
            *pi = zero;
        }
        for i in 0..m {
            let row = &a[(start + i) * n + start..(start + i) * n + start + i];
            let vi = v[i];
            let mut acc = Complex64::new(a[(start + i) * n + start + i].re, 0.0) * vi;
            for (j, &bij) in row.iter().enumerate() {
                acc += bij * v[j];
                p[j] += bij.conj() * vi;
            }
            p[i] += acc;
        }
        let mut vp = zero;
        for i in 0..m {
            p[i] *= beta;
            vp += v[i].conj() * p[i];
        }
        // w = p − (beta/2)(v†p) v, then B ← B − v w† − w v†
        let kfac = 0.5 * beta * vp.re;
        for i in 0..m {
            p[i] -= v[i] * kfac;
        }
        for i in 0..m {
            let vi = v[i];
            let wi = p[i];
            let row = &mut a[(start + i) * n + start..(start + i) * n + start + i + 1];
            for (j, bij) in row.iter_mut().enumerate() {
                *bij -= vi * p[j].conj() + wi * v[j].conj();
            }
        }
        off[k] = alpha;
        for i in (start + 1)..n {
            a[i * n + k] = zero;
        }
        a[start * n + k] = alpha;
        if keep_reflectors {
            reflectors.push((start, v[..m].to_vec(), beta));
        }
    }
    if n >= 2 {
        diag[n - 2] = a[(n - 2) * n + (n - 2)].re;
        off[n - 2] = a[(n - 1) * n + (n - 2)];
    }
    if n >= 1 {
        diag[n - 1] = a[(n - 1) * n + (n - 1)].re;
    }
    Tridiagonal {
        diag,
        off,
        reflectors,
    }
}

/// Implicit QL on a real symmetric tridiagonal matrix. `e[k]` couples k and
/// k+1; it is destroyed. When `z` is given (n×n row-major, columns are
/// vectors), rotations are accumulated into it.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    let mut e_full = vec![0.0; n];
    e_full[..n - 1].copy_from_slice(&e[..n - 1]);
    let e = &mut e_full;
    // deflate against the matrix norm, as in EISPACK tql2: clusters of
    // near-zero eigenvalues never pass a test relative to |d_m| + |d_m+1|
    let norm = (0..n).fold(0.0f64, |acc, k| acc.max(d[k].abs() + e[k].abs()));
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd.max(norm) {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_SWEEPS {
                return Err(Error::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let f = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * f;
                        z[k * n + i] = c * z[k * n + i] - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &Array2<Complex64>) -> Result<HermitianSpectrum> {
    check_hermitian(m)?;
    let n = m.nrows();
    let mut a = lower_copy(m);
    let tri = tridiagonalize(&mut a, n, false);
    let mut d = tri.diag;
    let mut e: Vec<f64> = tri.off.iter().map(|z| z.norm()).collect();
    tridiagonal_ql(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(HermitianSpectrum { eigenvalues: d })
}

/// Eigenvalues (ascending) and unit eigenvectors (columns) of a Hermitian matrix.
pub fn hermitian_eigen(m: &Array2<Complex64>) -> Result<(Vec<f64>, Array2<Complex64>)> {
    check_hermitian(m)?;
    let n = m.nrows();
    let mut a = lower_copy(m);
    let tri = tridiagonalize(&mut a, n, true);

    // diagonal phases making the subdiagonal real and nonnegative
    let mut phases = vec![Complex64::new(1.0, 0.0); n];
    for k in 0..n.saturating_sub(1) {
        let ek = tri.off[k];
        let unit = if ek.norm() > 0.0 {
            ek / ek.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        phases[k + 1] = phases[k] * unit;
    }
    let mut d = tri.diag.clone();
    let mut e: Vec<f64> = tri.off.iter().map(|z| z.norm()).collect();
    let mut z = vec![0.0; n * n];
    for k in 0..n {
        z[k * n + k] = 1.0;
    }
    tridiagonal_ql(&mut d, &mut e, Some(&mut z))?;

    // vectors of A = Q · diag(phases) · Z, with Q = H_0 H_1 ⋯
    let mut vecs = Array2::<Complex64>::from_shape_fn((n, n), |(r, c)| phases[r] * z[r * n + c]);
    for (start, v, beta) in tri.reflectors.iter().rev() {
        for c in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for (i, vi) in v.iter().enumerate() {
                dot += vi.conj() * vecs[[start + i, c]];
            }
            let f = dot * *beta;
            for (i, vi) in v.iter().enumerate() {
                vecs[[start + i, c]] -= vi * f;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&k| d[k]).collect();
    let sorted = Array2::from_shape_fn((n, n), |(r, c)| vecs[[r, order[c]]]);
    Ok((values, sorted))
}

/// Σ |λ_i| for a Hermitian matrix.
pub fn trace_norm_hermitian(m: &Array2<Complex64>) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?.trace_norm())
}

/// Determinant by LU factorization with partial pivoting.
pub fn lu_determinant(m: &Array2<f64>) -> f64 {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "determinant of a non-square matrix");
    let mut a: Vec<f64> = m.iter().copied().collect();
    let mut det = 1.0;
    for k in 0..n {
        let (piv, best) = (k..n)
            .map(|r| (r, a[r * n + k].abs()))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best == 0.0 {
            return 0.0;
        }
        if piv != k {
            for c in 0..n {
                a.swap(k * n + c, piv * n + c);
            }
            det = -det;
        }
        let pivot = a[k * n + k];
        det *= pivot;
        for r in (k + 1)..n {
            let f = a[r * n + k] / pivot;
            if f != 0.0 {
                for c in (k + 1)..n {
                    a[r * n + c] -= f * a[k * n + c];
                }
            }
        }
    }
    det
}
