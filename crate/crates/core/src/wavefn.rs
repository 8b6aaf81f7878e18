//! Position-space wavefunctions of the polynomial states.
//!
//! Symmetric states are `xi^{beta/2} e^{alpha xi/2} P(xi)` with
//! `xi = 1/cosh^2(x/d)`; antisymmetric states are
//! `zeta (1 - zeta^2)^{beta/2} e^{-alpha zeta^2/2} P(zeta^2)` with
//! `zeta = tanh(x/d)`. Note `1 - zeta^2 = xi`.

use crate::error::{Error, Result};
use crate::spectrum::{EigenState, Parity};

/// Relative magnitude below which samples are ignored when counting nodes.
pub const NODE_FLOOR: f64 = 1e-10;

/// `ln(1/cosh^2 z)` without overflow for large `|z|`.
fn ln_sech2(z: f64) -> f64 {
    let a = z.abs();
    -2.0 * (a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2)
}

fn check_parity(state: &EigenState, expected: Parity) -> Result<()> {
    if state.parity == expected {
        Ok(())
    } else {
        Err(Error::ParityMismatch {
            expected,
            found: state.parity,
        })
    }
}

/// Even wavefunction of a symmetric state.
pub fn psi_symmetric(state: &EigenState, x: f64) -> Result<f64> {
    check_parity(state, Parity::Symmetric)?;
    Ok(symmetric_value(state, x))
}

/// Odd wavefunction of an antisymmetric state.
pub fn psi_antisymmetric(state: &EigenState, x: f64) -> Result<f64> {
    check_parity(state, Parity::Antisymmetric)?;
    Ok(antisymmetric_value(state, x))
}

/// Wavefunction of either parity.
pub fn psi(state: &EigenState, x: f64) -> f64 {
    match state.parity {
        Parity::Symmetric => symmetric_value(state, x),
        Parity::Antisymmetric => antisymmetric_value(state, x),
    }
}

fn symmetric_value(state: &EigenState, x: f64) -> f64 {
    let z = x / state.d;
    let ln_xi = ln_sech2(z);
    let xi = ln_xi.exp();
    let envelope = (0.5 * state.beta() * ln_xi + 0.5 * state.alpha() * xi).exp();
    envelope * state.polynomial_at(xi)
}

fn antisymmetric_value(state: &EigenState, x: f64) -> f64 {
    let z = x / state.d;
    let zeta = z.tanh();
    let t = zeta * zeta;
    let ln_xi = ln_sech2(z);
    let envelope = (0.5 * state.beta() * ln_xi - 0.5 * state.alpha() * t).exp();
    zeta * envelope * state.polynomial_at(t)
}

/// Grid samples of a wavefunction.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveSample {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Simpson quadrature of `psi^2` over the grid for the current values.
    pub norm: f64,
    pub nodes: usize,
}

impl WaveSample {
    /// Wraps samples on a uniform grid with an odd number of points.
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidGrid(format!(
                "{} grid points but {} values",
                grid.len(),
                values.len()
            )));
        }
        if grid.len() < 3 || grid.len().is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "need an odd number of at least 3 points, got {}",
                grid.len()
            )));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
        }
        let norm = simpson_squared(&grid, &values);
        let nodes = count_node_values(&values, NODE_FLOOR);
        Ok(Self {
            grid,
            values,
            norm,
            nodes,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v * v).collect()
    }
}

/// Composite Simpson rule for `psi^2` on a uniform grid.
fn simpson_squared(grid: &[f64], values: &[f64]) -> f64 {
    let n = grid.len();
    let h = (grid[n - 1] - grid[0]) / (n - 1) as f64;
    let inner: f64 = values[1..n - 1]
        .iter()
        .enumerate()
        .map(|(i, v)| if i % 2 == 0 { 4.0 * v * v } else { 2.0 * v * v })
        .sum();
    let ends = values[0] * values[0] + values[n - 1] * values[n - 1];
    h / 3.0 * (ends + inner)
}

/// Samples the state on `n_points` uniform points over `[-x_max, x_max]`.
pub fn sample(state: &EigenState, x_max: f64, n_points: usize) -> Result<WaveSample> {
    if !(x_max > 0.0 && x_max.is_finite()) {
        return Err(Error::InvalidGrid(format!("x_max must be positive, got {x_max}")));
    }
    if n_points < 3 || n_points.is_multiple_of(2) {
        return Err(Error::InvalidGrid(format!(
            "point count must be odd and at least 3, got {n_points}"
        )));
    }
    let half = (n_points / 2) as f64;
    let grid: Vec<f64> = (0..n_points)
        .map(|i| x_max * (i as f64 - half) / half)
        .collect();
    let values = grid.iter().map(|&x| psi(state, x)).collect();
    WaveSample::new(grid, values)
}

/// Scales the sample to unit Simpson norm, positive at its first nonzero value.
pub fn normalize(sample: &WaveSample) -> Result<WaveSample> {
    let first = sample
        .values
        .iter()
        .find(|v| v.abs() > 0.0)
        .ok_or(Error::DegenerateSample)?;
    if !(sample.norm > 0.0 && sample.norm.is_finite()) {
        return Err(Error::DegenerateSample);
    }
    let factor = first.signum() / sample.norm.sqrt();
    let values = sample.values.iter().map(|v| v * factor).collect();
    WaveSample::new(sample.grid.clone(), values)
}

/// Number of strict sign changes, ignoring samples below
/// `NODE_FLOOR * max |psi|` so a shallow nonzero dip is not counted but a
/// forced zero between opposite-sign lobes is.
pub fn count_nodes(sample: &WaveSample) -> usize {
    count_node_values(&sample.values, NODE_FLOOR)
}

/// [`count_nodes`] with a caller-chosen floor relative to `max |psi|`.
pub fn count_nodes_above(sample: &WaveSample, relative_floor: f64) -> usize {
    count_node_values(&sample.values, relative_floor)
}

fn count_node_values(values: &[f64], relative_floor: f64) -> usize {
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = relative_floor * max;
    let mut last_sign = 0.0;
    let mut nodes = 0;
    for v in values.iter().filter(|v| v.abs() > floor) {
        let sign = v.signum();
        if last_sign != 0.0 && sign != last_sign {
            nodes += 1;
        }
        last_sign = sign;
    }
    nodes
}

/// Second-difference residual of the dimensionless Schrödinger equation
/// `psi'' + (eps + U0 sinh^4(x/d)/cosh^6(x/d)) psi = 0` at `x`.
pub fn schrodinger_residual(state: &EigenState, x: f64, h: f64) -> f64 {
    schrodinger_operator(state, state.eps, x, h)
}

/// The same operator with an arbitrary energy `eps` applied to the state's
/// wavefunction.
pub fn schrodinger_operator(state: &EigenState, eps: f64, x: f64, h: f64) -> f64 {
    let (lo, mid, hi) = (psi(state, x - h), psi(state, x), psi(state, x + h));
    let z = x / state.d;
    let well = state.u0 * z.tanh().powi(4) / z.cosh().powi(2);
    (lo - 2.0 * mid + hi) / (h * h) + (eps + well) * mid
}

/// Default finite-difference step for [`schrodinger_residual`], `1e-4 d`.
pub fn default_residual_step(state: &EigenState) -> f64 {
    1e-4 * state.d
}
