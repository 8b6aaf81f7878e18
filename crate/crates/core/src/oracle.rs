//! Independent bound-state solver: Numerov integration of
//! `psi''(z) + k^2(z) psi(z) = 0`, `k^2 = eps d^2 + U0 d^2 sinh^4 z / cosh^6 z`,
//! with shooting on the energy.
//!
//! Integration runs inward from `z_max` with decaying initial data, and the
//! energy is fixed by a parity condition at `z = 0`: `psi'(0) = 0` for even
//! states, `psi(0) = 0` for odd ones.

use log::warn;

use crate::error::{Error, Result};
use crate::spectrum::Parity;
use crate::wavefn::{count_nodes_above, WaveSample, NODE_FLOOR};

/// Default Numerov step in `z = x/d`.
pub const DEFAULT_STEP: f64 = 1e-4;
/// Default bisection tolerance on `eps`. Tunnel splittings of the deepest
/// states reach 1e-13, so a looser tolerance can land on the wrong side.
pub const DEFAULT_TOL: f64 = 1e-13;

const RENORM_THRESHOLD: f64 = 1e150;
const MAX_Z: f64 = 200.0;
/// Safety factor on the energy-resolution noise of a shooting trace.
const NOISE_MARGIN: f64 = 10.0;

/// `U0 d^2 sinh^4 z / cosh^6 z`, the part of `k^2` that does not depend on `eps`.
fn well_depth(u0: f64, d: f64, z: f64) -> f64 {
    let t = z.tanh();
    let sech = 1.0 / z.cosh();
    u0 * d * d * t.powi(4) * sech * sech
}

/// Numerov values along a march. True values are `values * exp(log_scale)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NumerovTrace {
    pub z: Vec<f64>,
    pub values: Vec<f64>,
    pub log_scale: f64,
}

/// Marches `psi'' = -k2 psi` across a uniform grid given `k2` at every node
/// in march order and the first two values.
///
/// Uses the summed form: `w = (1 + h^2 k2 / 12) psi` is advanced through its
/// first difference, which is decremented by `h^2 k2 psi` each step. The
/// textbook three-term update cancels most significant digits when
/// `h^2 k2` is small, and that noise is amplified under the barrier.
fn numerov_march(k2: &[f64], step: f64, psi0: f64, psi1: f64) -> (Vec<f64>, f64) {
    let h2 = step * step;
    let f = |i: usize| 1.0 + h2 * k2[i] / 12.0;
    let mut out = Vec::with_capacity(k2.len());
    out.push(psi0);
    out.push(psi1);
    let mut w = f(1) * psi1;
    let mut diff = w - f(0) * psi0;
    let mut log_scale = 0.0;
    for i in 1..k2.len() - 1 {
        diff -= h2 * k2[i] * out[i];
        w += diff;
        let next = w / f(i + 1);
        out.push(next);
        if next.abs() > RENORM_THRESHOLD {
            let factor = 1.0 / next.abs();
            out.iter_mut().for_each(|v| *v *= factor);
            w *= factor;
            diff *= factor;
            log_scale -= factor.ln();
        }
    }
    (out, log_scale)
}

/// Numerov integration of the dimensionless equation from `z_start` to `z_end`.
///
/// `step` is the spacing magnitude; the direction follows the endpoints.
#[allow(clippy::too_many_arguments)]
pub fn numerov_integrate(
    u0: f64,
    d: f64,
    eps: f64,
    z_start: f64,
    z_end: f64,
    step: f64,
    psi0: f64,
    psi1: f64,
) -> Result<NumerovTrace> {
    if !(d > 0.0 && u0 >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "need d > 0 and U0 >= 0, got d = {d}, U0 = {u0}"
        )));
    }
    let h = step.abs();
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidGrid(format!("step must be nonzero, got {step}")));
    }
    let span = z_end - z_start;
    let intervals = (span.abs() / h).round();
    if intervals < 2.0 || (intervals * h - span.abs()).abs() > 1e-9 * span.abs().max(1.0) {
        return Err(Error::InvalidGrid(format!(
            "interval [{z_start}, {z_end}] is not at least two whole steps of {h}"
        )));
    }
    let intervals = intervals as usize;
    let signed = span.signum() * h;
    let z: Vec<f64> = (0..=intervals)
        .map(|i| z_start + i as f64 * signed)
        .collect();
    let k2: Vec<f64> = z
        .iter()
        .map(|&zi| eps * d * d + well_depth(u0, d, zi))
        .collect();
    let (values, log_scale) = numerov_march(&k2, h, psi0, psi1);
    Ok(NumerovTrace {
        z,
        values,
        log_scale,
    })
}

/// Settings for [`shoot_eigenvalue`] and [`spectrum_scan`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingConfig {
    /// Outer integration boundary in `z`; `None` picks `8 + 4/(d sqrt(-eps))`
    /// at the upper end of the energy range.
    pub z_max: Option<f64>,
    pub step: f64,
    pub tol: f64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            z_max: None,
            step: DEFAULT_STEP,
            tol: DEFAULT_TOL,
        }
    }
}

/// A converged shooting solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ShootingResult {
    pub eps: f64,
    pub parity: Parity,
    /// Matching defect at `eps`, relative to `max |psi|`.
    pub mismatch: f64,
    /// Full-line wave on `x in [-z_max d, z_max d]`, unnormalized.
    pub wave: WaveSample,
    /// Sign changes of `wave` above `node_floor * max |psi|`.
    pub n_nodes: usize,
    /// Relative amplitude below which the wave is not resolved: the change
    /// of the normalized trace when `eps` moves by the bisection tolerance,
    /// times a safety factor, and never less than [`NODE_FLOOR`].
    pub node_floor: f64,
}

/// Fixed grid `z_i = i h`, `i = 0..=n`, with the energy-independent part of
/// `k^2` tabulated once.
struct Shooter {
    d: f64,
    step: f64,
    well: Vec<f64>,
}

impl Shooter {
    fn new(u0: f64, d: f64, z_max: f64, step: f64) -> Result<Self> {
        if !(u0 > 0.0 && d > 0.0) {
            return Err(Error::InvalidInput(format!(
                "need U0 > 0 and d > 0, got U0 = {u0}, d = {d}"
            )));
        }
        if !(step > 0.0 && z_max > 2.0 * step) {
            return Err(Error::InvalidGrid(format!(
                "need 0 < step < z_max/2, got step = {step}, z_max = {z_max}"
            )));
        }
        let n = (z_max / step).ceil() as usize;
        let well = (0..=n).map(|i| well_depth(u0, d, i as f64 * step)).collect();
        Ok(Self { d, step, well })
    }

    /// `psi(z_i)` for `i = 0..=n`, integrated inward from `z_n`.
    fn march(&self, eps: f64) -> (Vec<f64>, Vec<f64>) {
        let ed2 = eps * self.d * self.d;
        let k2: Vec<f64> = self.well.iter().rev().map(|w| ed2 + w).collect();
        let kappa = self.d * (-eps).sqrt();
        let (mut values, _) = numerov_march(&k2, self.step, 1.0, (kappa * self.step).exp());
        values.reverse();
        let mut k2 = k2;
        k2.reverse();
        (values, k2)
    }

    /// Parity defect at `z = 0` relative to `max |psi|`.
    fn defect(&self, eps: f64, parity: Parity) -> f64 {
        let [sym, anti] = self.defects(eps);
        match parity {
            Parity::Symmetric => sym,
            Parity::Antisymmetric => anti,
        }
    }

    /// Symmetric and antisymmetric defects from one march, without storing
    /// the trace. Same arithmetic as [`numerov_march`].
    fn defects(&self, eps: f64) -> [f64; 2] {
        let ed2 = eps * self.d * self.d;
        let h2 = self.step * self.step;
        let g = |w: f64| h2 * (ed2 + w);
        let n = self.well.len() - 1;
        let kappa = self.d * (-eps).sqrt();
        // seeds: psi(z_n) = 1, psi(z_{n-1}) = e^{kappa h}
        let mut cur = (kappa * self.step).exp();
        let mut g_cur = g(self.well[n - 1]);
        let mut w = (1.0 + g_cur / 12.0) * cur;
        let mut diff = w - (1.0 + g(self.well[n]) / 12.0);
        let mut max = cur.max(1.0);
        for i in (0..n - 1).rev() {
            diff -= g_cur * cur;
            w += diff;
            g_cur = g(self.well[i]);
            let next = w / (1.0 + g_cur / 12.0);
            cur = next;
            max = max.max(next.abs());
            if next.abs() > RENORM_THRESHOLD {
                let factor = 1.0 / next.abs();
                cur *= factor;
                w *= factor;
                diff *= factor;
                max *= factor;
            }
        }
        // even continuation w(-h) = w(h): w(h) - 2 w(0) + w(-h) = -g(0) psi(0)
        let sym = g_cur * cur - 2.0 * diff;
        [sym / max, cur / max]
    }

    #[cfg(test)]
    fn defect_of(psi: &[f64], k2: &[f64], step: f64, parity: Parity) -> f64 {
        let max = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let raw = match parity {
            Parity::Antisymmetric => psi[0],
            Parity::Symmetric => {
                // even continuation psi_{-1} = psi_1 in the Numerov step at z = 0
                let h2 = step * step / 12.0;
                let f0 = 1.0 + h2 * k2[0];
                let f1 = 1.0 + h2 * k2[1];
                2.0 * f1 * psi[1] - (12.0 - 10.0 * f0) * psi[0]
            }
        };
        raw / max
    }

    fn bisect(&self, parity: Parity, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
        let (d_lo, d_hi) = (self.defect(lo, parity), self.defect(hi, parity));
        if d_lo == 0.0 {
            return Ok(lo);
        }
        if d_hi == 0.0 {
            return Ok(hi);
        }
        if d_lo.signum() == d_hi.signum() {
            return Err(Error::BracketFailure {
                lo,
                hi,
                defect_lo: d_lo,
                defect_hi: d_hi,
            });
        }
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let d_mid = self.defect(mid, parity);
            if d_mid == 0.0 {
                return Ok(mid);
            }
            if d_mid.signum() == d_lo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    fn result(&self, eps: f64, parity: Parity, tol: f64) -> Result<ShootingResult> {
        let (half, _) = self.march(eps);
        let (shifted, _) = self.march(eps + tol);
        let node_floor = NODE_FLOOR.max(NOISE_MARGIN * trace_spread(&half, &shifted));
        let mismatch = self.defect(eps, parity);
        let n = half.len() - 1;
        let sign = match parity {
            Parity::Symmetric => 1.0,
            Parity::Antisymmetric => -1.0,
        };
        let grid: Vec<f64> = (0..=2 * n)
            .map(|i| (i as f64 - n as f64) * self.step * self.d)
            .collect();
        let values: Vec<f64> = (0..=2 * n)
            .map(|i| match i.cmp(&n) {
                std::cmp::Ordering::Less => sign * half[n - i],
                std::cmp::Ordering::Equal => match parity {
                    Parity::Symmetric => half[0],
                    Parity::Antisymmetric => 0.0,
                },
                std::cmp::Ordering::Greater => half[i - n],
            })
            .collect();
        let wave = WaveSample::new(grid, values)?;
        let n_nodes = count_nodes_above(&wave, node_floor);
        Ok(ShootingResult {
            eps,
            parity,
            mismatch,
            wave,
            n_nodes,
            node_floor,
        })
    }
}

/// Largest difference between two traces, each scaled to unit maximum.
fn trace_spread(a: &[f64], b: &[f64]) -> f64 {
    let peak = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let (pa, pb) = (peak(a), peak(b));
    a.iter()
        .zip(b)
        .map(|(x, y)| (x / pa - y / pb).abs())
        .fold(0.0, f64::max)
}

fn default_z_max(d: f64, eps_top: f64) -> f64 {
    (8.0 + 4.0 / (d * (-eps_top).sqrt())).min(MAX_Z)
}

/// Finds the eigenvalue of the given parity inside `[eps_lo, eps_hi]`.
pub fn shoot_eigenvalue(
    u0: f64,
    d: f64,
    eps_lo: f64,
    eps_hi: f64,
    parity: Parity,
    config: &ShootingConfig,
) -> Result<ShootingResult> {
    if !(eps_lo < eps_hi && eps_hi < 0.0) {
        return Err(Error::InvalidInput(format!(
            "need eps_lo < eps_hi < 0, got [{eps_lo}, {eps_hi}]"
        )));
    }
    if !(config.tol > 0.0) {
        return Err(Error::InvalidInput(format!("tol must be positive, got {}", config.tol)));
    }
    let z_max = config.z_max.unwrap_or_else(|| default_z_max(d, eps_hi));
    let shooter = Shooter::new(u0, d, z_max, config.step)?;
    let eps = shooter.bisect(parity, eps_lo, eps_hi, config.tol)?;
    shooter.result(eps, parity, config.tol)
}

/// All bound states with `eps` in `[eps_min, eps_min / n_brackets]`, found by
/// scanning `n_brackets` energy cells for sign changes of both parity defects.
/// Sorted by increasing energy.
pub fn spectrum_scan(
    u0: f64,
    d: f64,
    eps_min: f64,
    n_brackets: usize,
    config: &ShootingConfig,
) -> Result<Vec<ShootingResult>> {
    if !(eps_min < 0.0 && eps_min.is_finite()) {
        return Err(Error::InvalidInput(format!("eps_min must be negative, got {eps_min}")));
    }
    if n_brackets == 0 {
        return Err(Error::InvalidInput("need at least one bracket".into()));
    }
    let width = -eps_min / n_brackets as f64;
    let energies: Vec<f64> = (0..n_brackets).map(|j| eps_min + j as f64 * width).collect();
    let eps_top = energies[n_brackets - 1];
    let z_max = config.z_max.unwrap_or_else(|| default_z_max(d, eps_top));
    let shooter = Shooter::new(u0, d, z_max, config.step)?;

    let mut states = Vec::new();
    let defects: Vec<[f64; 2]> = energies.iter().map(|&e| shooter.defects(e)).collect();
    for (slot, parity) in Parity::BOTH.into_iter().enumerate() {
        for j in 1..n_brackets {
            if defects[j - 1][slot].signum() != defects[j][slot].signum() {
                let eps = shooter.bisect(parity, energies[j - 1], energies[j], config.tol)?;
                states.push(shooter.result(eps, parity, config.tol)?);
            }
        }
    }
    states.sort_by(|a, b| a.eps.total_cmp(&b.eps));
    let consecutive = states.iter().enumerate().all(|(i, s)| s.n_nodes == i);
    if !consecutive {
        warn!(
            "spectrum scan at U0 = {u0}: node counts {:?} are not 0, 1, 2, ...",
            states.iter().map(|s| s.n_nodes).collect::<Vec<_>>()
        );
    }
    Ok(states)
}
