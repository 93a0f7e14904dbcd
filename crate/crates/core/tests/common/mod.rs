//! Independent reference computations shared by the integration tests.

#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

/// Eigenvalues and eigenvectors of `-d²/dx² + a cos(x)` on `[0, 2π]` with
/// `u(2π) = e^{iθ} u(0)`, by Galerkin projection on the Bloch waves
/// `e^{i(k + θ/2π)x}`, `|k| ≤ modes`. The matrix is real symmetric
/// tridiagonal: diagonal `(k + θ/2π)²`, off-diagonal `a/2`.
pub fn hill(amplitude: f64, theta: f64, modes: i32) -> (Vec<f64>, DMatrix<f64>) {
    let size = (2 * modes + 1) as usize;
    let q = theta / (2.0 * PI);
    let h = DMatrix::from_fn(size, size, |i, j| {
        let k = i as i32 - modes;
        if i == j {
            (k as f64 + q).powi(2)
        } else if i.abs_diff(j) == 1 {
            amplitude / 2.0
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(size, size, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn hill_eigenvalues(amplitude: f64, theta: f64, how_many: usize) -> Vec<f64> {
    hill(amplitude, theta, 40).0.into_iter().take(how_many).collect()
}

/// `dλ_k/dθ` from the Galerkin matrix by the Hellmann–Feynman formula:
/// `Σ_j |c_j|² · 2(j + θ/2π)/(2π)`.
pub fn hill_slope(amplitude: f64, theta: f64, k: usize) -> f64 {
    let modes = 40;
    let (_, vecs) = hill(amplitude, theta, modes);
    let q = theta / (2.0 * PI);
    (0..vecs.nrows())
        .map(|i| {
            let j = i as i32 - modes;
            vecs[(i, k)].powi(2) * 2.0 * (j as f64 + q) / (2.0 * PI)
        })
        .sum()
}

/// The lowest `how_many` values `(k + θ/2π)²` for the free operator on
/// `[0, 2π]`, shifted by `shift`.
pub fn free_levels(theta: f64, how_many: usize, shift: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (-20..=20).map(|k| (k as f64 + theta / (2.0 * PI)).powi(2) + shift).collect();
    v.sort_by(f64::total_cmp);
    v.truncate(how_many);
    v
}
