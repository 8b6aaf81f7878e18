//! Oracles shared by the integration test targets.

#![allow(dead_code)]

use heunwell::heun::{self, HeunParams};
use heunwell::spectrum::EigenState;
use heunwell::wavefn;

/// Determinant by Laplace expansion along the first row.
pub fn cofactor_det(m: &[Vec<f64>]) -> f64 {
    laplace(m, true)
}

/// Permanent of `|A|`, which bounds every term of the determinant expansion.
pub fn permanent_abs(m: &[Vec<f64>]) -> f64 {
    let abs: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|v| v.abs()).collect()).collect();
    laplace(&abs, false)
}

fn laplace(m: &[Vec<f64>], signed: bool) -> f64 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<f64>> = m[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|&(c, _)| c != j)
                        .map(|(_, &v)| v)
                        .collect()
                })
                .collect();
            let sign = if signed && j % 2 == 1 { -1.0 } else { 1.0 };
            sign * m[0][j] * laplace(&minor, signed)
        })
        .sum()
}

/// Dense `(N+1) x (N+1)` termination matrix assembled entry by entry.
pub fn dense_termination_matrix(p: &HeunParams, n_index: usize) -> Vec<Vec<f64>> {
    let size = n_index + 1;
    let mut m = vec![vec![0.0; size]; size];
    for i in 0..size {
        let k = (i + 1) as f64;
        let q = (k - 1.0) * (k + p.beta + p.gamma);
        m[i][i] = p.mu - q + (k - 1.0) * p.alpha;
        if i + 1 < size {
            m[i][i + 1] = k * (k + p.beta);
            m[i + 1][i] = (size - 1 - i) as f64 * p.alpha;
        }
    }
    m
}

/// Second-order finite-difference residual of the confluent Heun equation
/// for the series solution, relative to the size of its terms.
pub fn heun_fd_residual(p: &HeunParams, xi: f64) -> f64 {
    // the solution varies on the scale of the distance to the singular points
    let h = 5e-3 * xi.min(1.0 - xi);
    let y = |x: f64| heun::evaluate(p, x, 1e-15, 200_000).unwrap();
    let (lo, mid, hi) = (y(xi - h), y(xi), y(xi + h));
    let dy = (hi - lo) / (2.0 * h);
    let d2y = (hi - 2.0 * mid + lo) / (h * h);
    let first = p.alpha + (p.beta + 1.0) / xi + (p.gamma + 1.0) / (xi - 1.0);
    let zeroth = p.mu / xi + p.nu / (xi - 1.0);
    let scale = d2y.abs() + (first * dy).abs() + (zeroth * mid).abs();
    p.ode_residual(xi, mid, dy, d2y).abs() / scale
}

/// Largest second-difference residual of the Schrödinger equation over
/// `|x| <= 4d`, relative to `max |k^2 psi|` on the same points.
pub fn schrodinger_fd_ratio(state: &EigenState, eps: f64) -> f64 {
    let h = 1e-3 * state.d;
    let k2 = |x: f64, e: f64| {
        let z = x / state.d;
        e + state.u0 * z.sinh().powi(4) / z.cosh().powi(6)
    };
    let f = |y: f64| wavefn::psi(state, y);
    let xs: Vec<f64> = (0..=400).map(|i| state.d * (-4.0 + 0.02 * f64::from(i))).collect();
    let scale = xs
        .iter()
        .map(|&x| (k2(x, state.eps) * f(x)).abs())
        .fold(0.0, f64::max);
    let worst = xs
        .iter()
        .map(|&x| ((f(x - h) - 2.0 * f(x) + f(x + h)) / (h * h) + k2(x, eps) * f(x)).abs())
        .fold(0.0, f64::max);
    worst / scale
}
