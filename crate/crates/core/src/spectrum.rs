//! Termination conditions, closed-form energies and the search for special
//! potential strengths of the `(6, 4)` double well.
//!
//! The series terminates at degree `N` when two conditions hold together:
//! `mu + nu + N alpha = 0`, which fixes the energy, and the vanishing of the
//! `(N+1) x (N+1)` tridiagonal determinant `Delta_{N+1}`, which constrains
//! `U0 d^2`. Only the combination `d sqrt(U0)` enters either condition.

use std::fmt;
use std::str::FromStr;

use log::{debug, warn};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::heun::{
    params_antisymmetric, params_symmetric, series_coefficients, symmetric_from_exponents,
    HeunParams, SeriesCoefficients, TERMINATION_TOLERANCE,
};

/// Default root-search grid step in `d sqrt(U0)`.
pub const DEFAULT_GRID_STEP: f64 = 0.05;
/// Default bisection tolerance on `U0`.
pub const DEFAULT_ROOT_TOL: f64 = 1e-10;
/// Half-width, in units of `U0 d^2`, of the window searched when snapping an
/// approximate strength (e.g. a value quoted to two decimals) onto a root.
pub const SNAP_WINDOW: f64 = 0.01;

const DET_RESCALE_THRESHOLD: f64 = 1e50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Parity {
    #[serde(rename = "s")]
    Symmetric,
    #[serde(rename = "a")]
    Antisymmetric,
}

impl Parity {
    pub const BOTH: [Parity; 2] = [Parity::Symmetric, Parity::Antisymmetric];

    /// `3 + 4N` (symmetric) or `5 + 4N` (antisymmetric): the energy is
    /// `-(offset - d sqrt(U0))^2 / (4 d^2)`.
    pub fn offset(self, n_index: usize) -> f64 {
        let base = match self {
            Parity::Symmetric => 3.0,
            Parity::Antisymmetric => 5.0,
        };
        base + 4.0 * n_index as f64
    }

    pub fn code(self) -> &'static str {
        match self {
            Parity::Symmetric => "s",
            Parity::Antisymmetric => "a",
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Symmetric => "symmetric",
            Parity::Antisymmetric => "antisymmetric",
        })
    }
}

impl FromStr for Parity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s" | "sym" | "symmetric" => Ok(Parity::Symmetric),
            "a" | "anti" | "antisymmetric" => Ok(Parity::Antisymmetric),
            other => Err(Error::InvalidInput(format!("unknown parity '{other}'"))),
        }
    }
}

fn check_bound(n_index: usize, parity: Parity, u0: f64, d: f64) -> Result<f64> {
    if !(u0 > 0.0 && u0.is_finite()) {
        return Err(Error::InvalidInput(format!("U0 must be positive, got {u0}")));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidInput(format!("d must be positive, got {d}")));
    }
    let scaled_depth = d * u0.sqrt();
    let threshold = parity.offset(n_index);
    if scaled_depth > threshold {
        Ok(scaled_depth)
    } else {
        Err(Error::NoBoundState {
            n: n_index,
            parity,
            scaled_depth,
            threshold,
        })
    }
}

/// Energy fixed by the first termination condition.
pub fn eigenvalue(n_index: usize, parity: Parity, u0: f64, d: f64) -> Result<f64> {
    let scaled_depth = check_bound(n_index, parity, u0, d)?;
    let gap = parity.offset(n_index) - scaled_depth;
    Ok(-gap * gap / (4.0 * d * d))
}

/// Heun parameters with the energy eliminated through the first condition.
pub fn first_condition_params(
    n_index: usize,
    parity: Parity,
    u0: f64,
    d: f64,
) -> Result<HeunParams> {
    let eps = eigenvalue(n_index, parity, u0, d)?;
    match parity {
        Parity::Symmetric => params_symmetric(u0, d, eps),
        Parity::Antisymmetric => params_antisymmetric(u0, d, eps),
    }
}

/// Same as [`first_condition_params`] but parametrised by `s = d sqrt(U0)`
/// and valid down to the threshold `s = offset` where `beta = 0`.
fn params_at_scaled_depth(n_index: usize, parity: Parity, scaled_depth: f64) -> HeunParams {
    let beta = 0.5 * (scaled_depth - parity.offset(n_index));
    let sym = symmetric_from_exponents(-scaled_depth, beta);
    match parity {
        Parity::Symmetric => sym,
        Parity::Antisymmetric => sym.to_antisymmetric(),
    }
}

/// `mu + nu + N alpha`.
pub fn first_condition_residual(params: &HeunParams, n_index: usize) -> f64 {
    params.mu + params.nu + n_index as f64 * params.alpha
}

/// The same condition in the `(delta, eta)` convention:
/// `delta/alpha + (beta + gamma)/2 + N + 1`. Equals the residual divided by
/// `alpha`.
pub fn first_condition_delta_form(params: &HeunParams, n_index: usize) -> f64 {
    params.delta / params.alpha + 0.5 * (params.beta + params.gamma) + n_index as f64 + 1.0
}

/// `q_n = (n - 1)(n + beta + gamma)`.
pub fn q_shift(n: usize, params: &HeunParams) -> f64 {
    debug_assert!(n >= 1);
    let nf = n as f64;
    (nf - 1.0) * (nf + params.beta + params.gamma)
}

/// Bands of the `(N+1) x (N+1)` matrix whose determinant is `Delta_{N+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    /// `mu - q_k + (k - 1) alpha`, `k = 1..=N+1`.
    pub diag: Vec<f64>,
    /// `k (k + beta)` in row `k`, `k = 1..=N`.
    pub upper: Vec<f64>,
    /// `(N + 1 - k) alpha` in row `k + 1`, `k = 1..=N`, i.e. `N alpha, ..., 2 alpha, alpha`.
    pub lower: Vec<f64>,
}

pub fn tridiagonal(params: &HeunParams, n_index: usize) -> Tridiagonal {
    let size = n_index + 1;
    let diag = (1..=size)
        .map(|k| params.mu - q_shift(k, params) + (k - 1) as f64 * params.alpha)
        .collect();
    let upper = (1..size)
        .map(|k| k as f64 * (k as f64 + params.beta))
        .collect();
    let lower = (1..size)
        .map(|k| (size - k) as f64 * params.alpha)
        .collect();
    Tridiagonal { diag, upper, lower }
}

/// A float carried with a separate power-of-two exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledValue {
    pub mantissa: f64,
    pub exponent: i32,
}

impl ScaledValue {
    pub fn value(&self) -> f64 {
        self.mantissa * 2f64.powi(self.exponent)
    }

    pub fn signum(&self) -> f64 {
        if self.mantissa == 0.0 {
            0.0
        } else {
            self.mantissa.signum()
        }
    }
}

impl Tridiagonal {
    /// Determinant by the leading-principal-minor recurrence
    /// `D_k = a_k D_{k-1} - b_{k-1} c_{k-1} D_{k-2}`.
    pub fn determinant(&self) -> ScaledValue {
        let mut exponent = 0;
        let (mut prev, mut cur) = (1.0, self.diag[0]);
        for k in 1..self.diag.len() {
            let next = self.diag[k] * cur - self.upper[k - 1] * self.lower[k - 1] * prev;
            prev = cur;
            cur = next;
            if cur.abs() > DET_RESCALE_THRESHOLD {
                let shift = cur.abs().log2().floor() as i32;
                let factor = 2f64.powi(-shift);
                cur *= factor;
                prev *= factor;
                exponent += shift;
            }
        }
        ScaledValue {
            mantissa: cur,
            exponent,
        }
    }
}

/// `Delta_{N+1}(mu)`, the second termination condition.
pub fn delta_determinant(params: &HeunParams, n_index: usize) -> f64 {
    delta_determinant_scaled(params, n_index).value()
}

pub fn delta_determinant_scaled(params: &HeunParams, n_index: usize) -> ScaledValue {
    tridiagonal(params, n_index).determinant()
}

/// Special strengths for degree `N` and the given parity: all `U0` in
/// `(threshold, u0_max]` where the second condition holds once the energy is
/// fixed by the first.
///
/// Roots are bracketed on a uniform grid in `d sqrt(U0)` with spacing
/// `grid_step`, bisected in `U0` to `tol`, and returned ascending.
pub fn special_strengths(
    n_index: usize,
    parity: Parity,
    d: f64,
    u0_max: f64,
    grid_step: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidInput(format!("d must be positive, got {d}")));
    }
    if !(grid_step > 0.0 && tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "grid step and tolerance must be positive, got {grid_step} and {tol}"
        )));
    }
    let threshold = parity.offset(n_index);
    if !(u0_max.is_finite() && d * u0_max.sqrt() > threshold) {
        return Err(Error::InvalidInput(format!(
            "U0_max = {u0_max} is below the bound-state threshold (d sqrt(U0) > {threshold})"
        )));
    }
    let search = Search {
        n_index,
        parity,
        d,
        s_max: d * u0_max.sqrt(),
        tol,
    };

    let coarse = search.scan(grid_step);
    let fine = search.scan(0.5 * grid_step);
    let roots = if fine.len() > coarse.len() {
        warn!(
            "N = {n_index} {parity}: a grid cell held an even number of roots at step {grid_step}; \
             using the half-step scan ({} roots instead of {})",
            fine.len(),
            coarse.len()
        );
        fine
    } else {
        coarse
    };
    if roots.len() > n_index + 1 {
        warn!(
            "N = {n_index} {parity}: found {} roots, more than N + 1",
            roots.len()
        );
    }
    Ok(roots)
}

struct Search {
    n_index: usize,
    parity: Parity,
    d: f64,
    s_max: f64,
    tol: f64,
}

impl Search {
    fn sign_at_depth(&self, scaled_depth: f64) -> f64 {
        delta_determinant_scaled(
            &params_at_scaled_depth(self.n_index, self.parity, scaled_depth),
            self.n_index,
        )
        .signum()
    }

    fn sign_at_u0(&self, u0: f64) -> f64 {
        self.sign_at_depth(self.d * u0.sqrt())
    }

    fn to_u0(&self, scaled_depth: f64) -> f64 {
        let sqrt_u0 = scaled_depth / self.d;
        sqrt_u0 * sqrt_u0
    }

    fn scan(&self, step: f64) -> Vec<f64> {
        let s_min = self.parity.offset(self.n_index);
        let cells = ((self.s_max - s_min) / step).ceil().max(1.0) as usize;
        let width = (self.s_max - s_min) / cells as f64;
        let depth = |j: usize| {
            if j == cells {
                self.s_max
            } else {
                s_min + j as f64 * width
            }
        };

        let mut roots: Vec<f64> = Vec::new();
        let mut prev_sign = self.sign_at_depth(s_min);
        for j in 1..=cells {
            let s = depth(j);
            let sign = self.sign_at_depth(s);
            if sign == 0.0 {
                roots.push(self.to_u0(s));
            } else if prev_sign != 0.0 && sign != prev_sign {
                let lo = self.to_u0(depth(j - 1));
                let hi = self.to_u0(s);
                roots.push(self.bisect(lo, hi));
            }
            prev_sign = sign;
        }
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|a, b| (*a - *b).abs() <= 10.0 * self.tol);
        debug!(
            "N = {} {}: step {step} found {:?}",
            self.n_index, self.parity, roots
        );
        roots
    }

    fn bisect(&self, mut lo: f64, mut hi: f64) -> f64 {
        let sign_lo = self.sign_at_u0(lo);
        while hi - lo > self.tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let sign_mid = self.sign_at_u0(mid);
            if sign_mid == 0.0 {
                return mid;
            }
            if sign_mid == sign_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Moves an approximate special strength onto the nearby root of the second
/// condition, searching `U0 d^2` within `+-window`.
pub fn snap_special_strength(
    n_index: usize,
    parity: Parity,
    u0_guess: f64,
    d: f64,
    window: f64,
    tol: f64,
) -> Result<f64> {
    check_bound(n_index, parity, u0_guess, d)?;
    let d2 = d * d;
    let threshold_u0 = parity.offset(n_index).powi(2) / d2;
    let lo = ((u0_guess * d2 - window) / d2).max(threshold_u0);
    let hi = (u0_guess * d2 + window) / d2;
    let search = Search {
        n_index,
        parity,
        d,
        s_max: d * hi.sqrt(),
        tol,
    };
    let (sign_lo, sign_hi) = (search.sign_at_u0(lo), search.sign_at_u0(hi));
    if sign_lo == 0.0 {
        return Ok(lo);
    }
    if sign_hi == 0.0 {
        return Ok(hi);
    }
    if sign_lo != sign_hi {
        return Ok(search.bisect(lo, hi));
    }
    // No root nearby: report the termination diagnostic at the guess itself.
    build_state(n_index, parity, u0_guess, d).map(|state| state.u0)
}

/// A bound state whose wavefunction is a confluent Heun polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenState {
    pub n_index: usize,
    pub parity: Parity,
    pub u0: f64,
    pub d: f64,
    pub eps: f64,
    /// Heun parameters of the reduced equation; for antisymmetric states these
    /// are the transformed set in the variable `zeta^2`.
    pub params: HeunParams,
    pub coefficients: SeriesCoefficients,
}

impl EigenState {
    /// `alpha = -d sqrt(U0)` of the original (symmetric) reduction.
    pub fn alpha(&self) -> f64 {
        -self.d * self.u0.sqrt()
    }

    /// Decay exponent `beta = d sqrt(-eps)`.
    pub fn beta(&self) -> f64 {
        self.d * (-self.eps).sqrt()
    }

    /// `v_0 .. v_N`.
    pub fn polynomial(&self) -> Vec<f64> {
        (0..=self.n_index)
            .map(|k| self.coefficients.value(k))
            .collect()
    }

    /// `P(t) = sum_{k<=N} v_k t^k`.
    pub fn polynomial_at(&self, t: f64) -> f64 {
        (0..=self.n_index)
            .rev()
            .fold(0.0, |acc, k| acc * t + self.coefficients.value(k))
    }
}

/// Assembles the polynomial bound state at a special strength.
pub fn build_state(n_index: usize, parity: Parity, u0: f64, d: f64) -> Result<EigenState> {
    let eps = eigenvalue(n_index, parity, u0, d)?;
    let params = first_condition_params(n_index, parity, u0, d)?;
    let coefficients = series_coefficients(&params, n_index + 2)?;
    if coefficients.terminated_at() != Some(n_index) {
        let (next, next2) = coefficients
            .tail_ratio(n_index)
            .unwrap_or((f64::NAN, f64::NAN));
        return Err(Error::TerminationNotAchieved {
            n: n_index,
            parity,
            u0,
            next,
            next2,
            tolerance: TERMINATION_TOLERANCE,
        });
    }
    Ok(EigenState {
        n_index,
        parity,
        u0,
        d,
        eps,
        params,
        coefficients,
    })
}

/// Finds every special strength for `(N, parity)` up to `u0_max` and builds
/// the corresponding states, ordered by increasing `U0`.
pub fn special_states(
    n_index: usize,
    parity: Parity,
    d: f64,
    u0_max: f64,
) -> Result<Vec<EigenState>> {
    special_strengths(
        n_index,
        parity,
        d,
        u0_max,
        DEFAULT_GRID_STEP,
        DEFAULT_ROOT_TOL,
    )?
    .into_iter()
    .map(|u0| build_state(n_index, parity, u0, d))
    .collect()
}
