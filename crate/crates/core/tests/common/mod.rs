//! Independent oracles shared by the integration tests. Everything here
//! deliberately avoids the code paths it is used to check: the transform
//! oracle integrates by refined Riemann sums, the eigenvalue oracle counts
//! inertia through an LDL^T factorization, and the linear-solve oracle is
//! plain Gauss-Jordan elimination.
#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

use num_complex::Complex64;
use vt_core::linalg::SymMatrix;
use vt_core::schwartz::{character_dot, StepFunction};

/// Fourier transform by brute-force quadrature: refine the input two scales
/// below its own constancy scale and sum character values cell by cell at
/// the given output centers.
pub fn riemann_fourier_at(
    f: &StepFunction,
    outputs: &[vt_core::padic::PadicPoint],
    inverse: bool,
) -> Vec<Complex64> {
    let fine = f
        .refine_to(f.support_exp(), f.scale() + 2)
        .expect("refinement within cap");
    let measure = fine.cell_measure();
    outputs
        .iter()
        .map(|zeta| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (cell, v) in fine.terms() {
                let chi = character_dot(&cell.center, zeta).expect("character in range").0;
                let chi = if inverse { chi.conj() } else { chi };
                acc += v * chi * measure;
            }
            acc
        })
        .collect()
}

/// Number of eigenvalues of `a` strictly below `shift`, by the inertia of
/// the LDL^T factorization of `a - shift I`.
pub fn eigenvalues_below(a: &SymMatrix, shift: f64) -> usize {
    let n = a.n();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| a.get(i, j) - if i == j { shift } else { 0.0 }).collect())
        .collect();
    let mut negatives = 0usize;
    for k in 0..n {
        let pivot = m[k][k];
        if pivot == 0.0 {
            // nudge: treat exact zero as a negative-side crossing
            negatives += 1;
            continue;
        }
        if pivot < 0.0 {
            negatives += 1;
        }
        for i in (k + 1)..n {
            let factor = m[i][k] / pivot;
            for j in k..n {
                m[i][j] -= factor * m[k][j];
            }
        }
    }
    negatives
}

/// The k-th smallest eigenvalue (1-indexed) by inertia bisection.
pub fn kth_eigenvalue_bisect(a: &SymMatrix, k: usize, lo: f64, hi: f64) -> f64 {
    let mut lo = lo;
    let mut hi = hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if eigenvalues_below(a, mid) >= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Dense Gauss-Jordan solve with partial pivoting.
pub fn gauss_jordan_solve(a: &SymMatrix, b: &[f64]) -> Vec<f64> {
    let n = a.n();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|j| a.get(i, j)).collect();
            row.push(b[i]);
            row
        })
        .collect();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        m.swap(col, pivot_row);
        let pivot = m[col][col];
        assert!(pivot != 0.0, "singular system in oracle");
        for j in col..=n {
            m[col][j] /= pivot;
        }
        for i in 0..n {
            if i != col && m[i][col] != 0.0 {
                let factor = m[i][col];
                for j in col..=n {
                    m[i][j] -= factor * m[col][j];
                }
            }
        }
    }
    (0..n).map(|i| m[i][n]).collect()
}
