//! Confluent Heun machinery in the `(alpha, beta, gamma, delta, eta)` convention.
//!
//! The equation is
//!
//! ```text
//! y'' + (alpha + (beta + 1)/xi + (gamma + 1)/(xi - 1)) y' + (mu/xi + nu/(xi - 1)) y = 0
//! ```
//!
//! with `delta = mu + nu - alpha (beta + gamma + 2)/2` and
//! `eta = alpha (beta + 1)/2 - mu - (beta + gamma + beta gamma)/2`.
//! The solution regular at `xi = 0` with unit leading coefficient is the
//! series `sum v_n xi^n`, whose coefficients obey
//! `A_n v_n = B_n v_{n-1} + C_n v_{n-2}` with `v_{-1} = 0`, `v_0 = 1`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Relative tolerance for declaring `v_{N+1} = v_{N+2} = 0`.
pub const TERMINATION_TOLERANCE: f64 = 1e-8;

/// Non-terminating series are not evaluated beyond this point.
pub const MAX_SERIES_XI: f64 = 0.999;

const RESCALE_THRESHOLD: f64 = 1e100;

/// Parameters of a confluent Heun equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeunParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub eta: f64,
    pub mu: f64,
    pub nu: f64,
}

impl HeunParams {
    /// Builds the parameter set from `(alpha, beta, gamma, delta, eta)`,
    /// recovering `mu` and `nu` from the two linear identities.
    pub fn from_delta_eta(alpha: f64, beta: f64, gamma: f64, delta: f64, eta: f64) -> Self {
        let mu = 0.5 * alpha * (beta + 1.0) - 0.5 * (beta + gamma + beta * gamma) - eta;
        let nu = delta + 0.5 * alpha * (beta + gamma + 2.0) - mu;
        Self {
            alpha,
            beta,
            gamma,
            delta,
            eta,
            mu,
            nu,
        }
    }

    /// `delta` recomputed from `(mu, nu)`.
    pub fn delta_from_mu_nu(&self) -> f64 {
        self.mu + self.nu - 0.5 * self.alpha * (self.beta + self.gamma + 2.0)
    }

    /// `eta` recomputed from `(mu, nu)`.
    pub fn eta_from_mu_nu(&self) -> f64 {
        0.5 * self.alpha * (self.beta + 1.0)
            - self.mu
            - 0.5 * (self.beta + self.gamma + self.beta * self.gamma)
    }

    /// Parameters of the antisymmetric reduction, obtained from the
    /// symmetric set by `(alpha, beta, gamma, delta, eta) ->
    /// (-alpha, -gamma, beta, -delta, eta + alpha^2/4)`.
    pub fn to_antisymmetric(&self) -> Self {
        Self::from_delta_eta(
            -self.alpha,
            -self.gamma,
            self.beta,
            -self.delta,
            self.eta + 0.25 * self.alpha * self.alpha,
        )
    }

    /// `A_n, B_n, C_n` of the three-term recurrence.
    ///
    /// `C_n` is evaluated as `(delta + alpha((beta + gamma)/2 + n - 1))/n^2`,
    /// which is finite at `alpha = 0`.
    pub fn recurrence_coeffs(&self, n: usize) -> Result<Recurrence> {
        if n == 0 {
            return Err(Error::InvalidIndex(n));
        }
        let Self {
            alpha,
            beta,
            gamma,
            delta,
            eta,
            ..
        } = *self;
        let nf = n as f64;
        let a = 1.0 + beta / nf;
        let b = 1.0
            + (beta + gamma - alpha - 1.0) / nf
            + (eta - 0.5 * (beta + gamma - alpha) - 0.5 * alpha * beta + 0.5 * beta * gamma)
                / (nf * nf);
        let c = (delta + alpha * (0.5 * (beta + gamma) + nf - 1.0)) / (nf * nf);
        Ok(Recurrence { a, b, c })
    }

    /// Left-hand side of the confluent Heun equation for given `y, y', y''`.
    pub fn ode_residual(&self, xi: f64, y: f64, dy: f64, d2y: f64) -> f64 {
        d2y + (self.alpha + (self.beta + 1.0) / xi + (self.gamma + 1.0) / (xi - 1.0)) * dy
            + (self.mu / xi + self.nu / (xi - 1.0)) * y
    }
}

fn bound_state_inputs(u0: f64, d: f64, eps: f64) -> Result<()> {
    if !(u0 > 0.0 && u0.is_finite()) {
        return Err(Error::InvalidInput(format!("U0 must be positive, got {u0}")));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidInput(format!("d must be positive, got {d}")));
    }
    if !(eps < 0.0) {
        return Err(Error::UnboundState { eps });
    }
    Ok(())
}

/// Heun parameters of the even solution in `xi = 1/cosh^2(x/d)`.
///
/// `beta = d sqrt(-eps) > 0` selects the branch that decays as `|x| -> inf`.
pub fn params_symmetric(u0: f64, d: f64, eps: f64) -> Result<HeunParams> {
    bound_state_inputs(u0, d, eps)?;
    let alpha = -d * u0.sqrt();
    let beta = d * (-eps).sqrt();
    Ok(symmetric_from_exponents(alpha, beta))
}

/// Symmetric parameters from `alpha = -d sqrt(U0)` and `beta = d sqrt(-eps)`.
///
/// Also accepts `beta = 0`, the edge of the bound-state region.
pub(crate) fn symmetric_from_exponents(alpha: f64, beta: f64) -> HeunParams {
    let gamma = -0.5;
    let mu = 0.25 * (alpha * (alpha + 2.0) + 2.0 * alpha * beta - beta * (beta + 1.0));
    let nu = 0.25 * (alpha + beta * (beta + 1.0));
    // delta = U0 d^2/4 and eta = (1 - (eps + U0) d^2)/4 with U0 d^2 = alpha^2,
    // eps d^2 = -beta^2.
    let delta = 0.25 * alpha * alpha;
    let eta = 0.25 * (1.0 + beta * beta - alpha * alpha);
    HeunParams {
        alpha,
        beta,
        gamma,
        delta,
        eta,
        mu,
        nu,
    }
}

/// Heun parameters of the odd solution in `zeta^2 = tanh^2(x/d)`.
pub fn params_antisymmetric(u0: f64, d: f64, eps: f64) -> Result<HeunParams> {
    Ok(params_symmetric(u0, d, eps)?.to_antisymmetric())
}

/// One step of the three-term recurrence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recurrence {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Series coefficients `v_0 .. v_nmax`.
///
/// Each coefficient is stored as a mantissa and a power-of-two exponent,
/// `v_n = mantissa_n * 2^exponent_n`, so fast-growing recurrences do not
/// overflow.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesCoefficients {
    mantissas: Vec<f64>,
    exponents: Vec<i32>,
    terminated_at: Option<usize>,
}

impl SeriesCoefficients {
    pub fn len(&self) -> usize {
        self.mantissas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mantissas.is_empty()
    }

    /// Highest computed index.
    pub fn n_max(&self) -> usize {
        self.mantissas.len() - 1
    }

    /// `v_n` as a plain float; may overflow to infinity for huge coefficients.
    pub fn value(&self, n: usize) -> f64 {
        self.mantissas[n] * 2f64.powi(self.exponents[n])
    }

    /// `ln |v_n|`, finite even when `v_n` itself is not representable.
    pub fn ln_abs(&self, n: usize) -> f64 {
        self.mantissas[n].abs().ln() + f64::from(self.exponents[n]) * std::f64::consts::LN_2
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|n| self.value(n)).collect()
    }

    /// The polynomial degree, if the series terminates.
    pub fn terminated_at(&self) -> Option<usize> {
        self.terminated_at
    }

    /// Coefficients `v_0..v_N` of the terminating polynomial.
    pub fn polynomial(&self) -> Option<Vec<f64>> {
        self.terminated_at
            .map(|n| (0..=n).map(|k| self.value(k)).collect())
    }

    /// `v_n xi^n`, evaluated in log space.
    fn term(&self, n: usize, xi: f64) -> f64 {
        let m = self.mantissas[n];
        if m == 0.0 {
            return 0.0;
        }
        if n == 0 {
            return self.value(0);
        }
        if xi == 0.0 {
            return 0.0;
        }
        let ln_mag = m.abs().ln()
            + f64::from(self.exponents[n]) * std::f64::consts::LN_2
            + n as f64 * xi.abs().ln();
        let sign = m.signum() * if xi < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
        sign * ln_mag.exp()
    }

    /// Size used to judge whether `v_{N+1}`, `v_{N+2}` vanish:
    /// `max(1, max_{k<=N} |v_k|)`.
    fn termination_scale(&self, n: usize) -> f64 {
        (0..=n).map(|k| self.value(k).abs()).fold(1.0, f64::max)
    }

    /// `|v_{N+1}|` and `|v_{N+2}|` relative to the termination scale at `N`.
    pub fn tail_ratio(&self, n: usize) -> Option<(f64, f64)> {
        if n + 2 > self.n_max() {
            return None;
        }
        let scale = self.termination_scale(n);
        Some((
            self.value(n + 1).abs() / scale,
            self.value(n + 2).abs() / scale,
        ))
    }
}

/// Runs the recurrence up to `n_max`.
pub fn series_coefficients(params: &HeunParams, n_max: usize) -> Result<SeriesCoefficients> {
    let mut mantissas = Vec::with_capacity(n_max + 1);
    let mut exponents = Vec::with_capacity(n_max + 1);
    mantissas.push(1.0);
    exponents.push(0);

    // The working pair (v_{n-2}, v_{n-1}) is stored divided by 2^scale.
    let mut scale = 0i32;
    let (mut prev2, mut prev1) = (0.0, 1.0);
    for n in 1..=n_max {
        let rec = params.recurrence_coeffs(n)?;
        if rec.a == 0.0 {
            return Err(Error::IndicialDegeneracy { n });
        }
        let mut cur = (rec.b * prev1 + rec.c * prev2) / rec.a;
        mantissas.push(cur);
        exponents.push(scale);
        if cur.abs() > RESCALE_THRESHOLD {
            let shift = cur.abs().log2().floor() as i32;
            let factor = 2f64.powi(-shift);
            cur *= factor;
            prev1 *= factor;
            scale += shift;
        }
        prev2 = prev1;
        prev1 = cur;
    }

    let mut coeffs = SeriesCoefficients {
        mantissas,
        exponents,
        terminated_at: None,
    };
    let mut scale = 1.0f64;
    for n in 0..n_max.saturating_sub(1) {
        scale = scale.max(coeffs.value(n).abs());
        if !scale.is_finite() {
            break;
        }
        let tolerance = TERMINATION_TOLERANCE * scale;
        if coeffs.value(n + 1).abs() <= tolerance && coeffs.value(n + 2).abs() <= tolerance {
            coeffs.terminated_at = Some(n);
            break;
        }
    }
    Ok(coeffs)
}

/// Evaluates `H_C(xi) = sum v_n xi^n`.
///
/// A terminating series is summed exactly as a polynomial for any `xi >= 0`.
/// Otherwise summation stops once `|v_n xi^n| + |v_{n+1} xi^{n+1}| < tol |S|`
/// holds for two consecutive `n`.
pub fn evaluate(params: &HeunParams, xi: f64, tol: f64, n_cap: usize) -> Result<f64> {
    if !(xi >= 0.0 && xi.is_finite()) {
        return Err(Error::InvalidInput(format!("xi must be non-negative, got {xi}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tol must be positive, got {tol}")));
    }
    if xi == 0.0 {
        return Ok(1.0);
    }
    let coeffs = series_coefficients(params, n_cap.max(2))?;
    if let Some(degree) = coeffs.terminated_at() {
        return Ok(horner(&coeffs, degree, xi));
    }
    if xi > MAX_SERIES_XI {
        return Err(Error::DivergenceRisk { xi });
    }

    let mut sum = 0.0;
    let mut quiet_run = 0;
    let mut last_ratio = f64::INFINITY;
    for n in 0..coeffs.n_max() {
        let t0 = coeffs.term(n, xi);
        sum += t0;
        let tail = t0.abs() + coeffs.term(n + 1, xi).abs();
        last_ratio = tail / sum.abs();
        if tail < tol * sum.abs() {
            quiet_run += 1;
            if quiet_run == 2 {
                return Ok(sum);
            }
        } else {
            quiet_run = 0;
        }
    }
    Err(Error::NoConvergence {
        terms: coeffs.len(),
        residual: last_ratio,
    })
}

fn horner(coeffs: &SeriesCoefficients, degree: usize, xi: f64) -> f64 {
    (0..=degree)
        .rev()
        .fold(0.0, |acc, k| acc * xi + coeffs.value(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// N = 1 symmetric special strength at d = 1, found by bisection on
    /// `v_2(U0)` in the test below and cross-checked against the determinant
    /// root in the spectrum tests.
    fn n1_symmetric_special_u0() -> f64 {
        let v2 = |u0: f64| {
            let s = u0.sqrt();
            let p = symmetric_from_exponents(-s, 0.5 * (s - 7.0));
            series_coefficients(&p, 2).unwrap().value(2)
        };
        let (mut lo, mut hi) = (140.0, 160.0);
        assert!(v2(lo) * v2(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if v2(lo) * v2(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn symmetric_params_at_the_n1_point() {
        let p = params_symmetric(149.57, 1.0, -6.8379).unwrap();
        assert_relative_eq!(p.alpha, -12.22988, epsilon = 1e-5);
        assert_relative_eq!(p.beta, 6.8379f64.sqrt(), epsilon = 1e-14);
        // (sqrt(U0) - 7)/2 to the precision of the rounded inputs
        assert!((p.beta - 2.61494).abs() < 1e-4);
        assert_eq!(p.gamma, -0.5);
        let p = params_symmetric(4.0, 1.0, -1.0).unwrap();
        assert_eq!(p.delta, 1.0);
    }

    #[test]
    fn symmetric_params_reject_unbound_and_invalid() {
        assert_eq!(
            params_symmetric(4.0, 1.0, 0.0),
            Err(Error::UnboundState { eps: 0.0 })
        );
        assert!(matches!(
            params_symmetric(0.0, 1.0, -1.0),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            params_antisymmetric(4.0, 0.0, -1.0),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn antisymmetric_params_transform() {
        let s = params_symmetric(4.0, 1.0, -1.0).unwrap();
        let a = params_antisymmetric(4.0, 1.0, -1.0).unwrap();
        assert_eq!(a.alpha, 2.0);
        assert_eq!(a.beta, 0.5);
        assert_eq!(a.gamma, s.beta);
        assert_eq!(a.delta, -1.0);
        assert_eq!(a.eta, s.eta + 1.0);
        assert_relative_eq!(a.delta_from_mu_nu(), a.delta, epsilon = 1e-14);
        assert_relative_eq!(a.eta_from_mu_nu(), a.eta, epsilon = 1e-14);
    }

    #[test]
    fn recurrence_coefficients() {
        let p = params_symmetric(30.0, 1.3, -2.0).unwrap();
        assert_eq!(p.recurrence_coeffs(0), Err(Error::InvalidIndex(0)));
        let r1 = p.recurrence_coeffs(1).unwrap();
        assert_eq!(r1.a, 1.0 + p.beta);
        let r = p.recurrence_coeffs(1000).unwrap();
        assert!((r.a - 1.0).abs() < p.beta.abs() / 999.0);
        assert!((r.b - 1.0).abs() < 1e-2);
        assert!(r.c.abs() < 1e-2);
    }

    #[test]
    fn recurrence_is_finite_at_alpha_zero() {
        let p = HeunParams::from_delta_eta(0.0, 1.5, 0.25, 2.0, 0.3);
        for n in 1..6 {
            let r = p.recurrence_coeffs(n).unwrap();
            let nf = n as f64;
            assert_eq!(r.c, 2.0 / (nf * nf));
        }
    }

    #[test]
    fn series_initial_terms() {
        let p = params_symmetric(10.0, 1.0, -0.5).unwrap();
        let s = series_coefficients(&p, 0).unwrap();
        assert_eq!(s.values(), vec![1.0]);
        assert_eq!(s.terminated_at(), None);

        let s = series_coefficients(&p, 5).unwrap();
        let r1 = p.recurrence_coeffs(1).unwrap();
        assert_eq!(s.value(1), r1.b / r1.a);
        for n in 2..=5 {
            let r = p.recurrence_coeffs(n).unwrap();
            let lhs = r.a * s.value(n);
            let rhs = r.b * s.value(n - 1) + r.c * s.value(n - 2);
            assert_relative_eq!(lhs, rhs, max_relative = 1e-13);
        }
    }

    #[test]
    fn indicial_degeneracy_is_reported() {
        // beta = -2 makes A_2 = 0
        let p = HeunParams::from_delta_eta(-1.0, -2.0, -0.5, 0.25, 0.1);
        assert_eq!(
            series_coefficients(&p, 4),
            Err(Error::IndicialDegeneracy { n: 2 })
        );
    }

    #[test]
    fn series_terminates_at_the_n1_special_point() {
        let u0 = n1_symmetric_special_u0();
        assert!((u0 - 149.57).abs() < 0.01, "U0 = {u0}");
        let s = u0.sqrt();
        let p = params_symmetric(u0, 1.0, -0.25 * (7.0 - s).powi(2)).unwrap();
        let coeffs = series_coefficients(&p, 3).unwrap();
        let scale = coeffs.value(1).abs().max(1.0);
        assert!(coeffs.value(2).abs() < 1e-8 * scale);
        assert!(coeffs.value(3).abs() < 1e-8 * scale);
        assert_eq!(coeffs.terminated_at(), Some(1));
        assert_eq!(coeffs.polynomial().unwrap().len(), 2);

        let v1 = coeffs.value(1);
        assert_eq!(evaluate(&p, 0.7, 1e-12, 16).unwrap(), 1.0 + v1 * 0.7);
        // polynomial solutions are summable at xi = 1 (x = 0)
        assert_eq!(evaluate(&p, 1.0, 1e-12, 16).unwrap(), 1.0 + v1);
    }

    #[test]
    fn overflow_is_absorbed_by_exponents() {
        // |alpha| large and xi-radius 1: coefficients grow without bound.
        let p = HeunParams::from_delta_eta(-400.0, 0.3, -0.5, 100.0, -5.0);
        let coeffs = series_coefficients(&p, 4000).unwrap();
        let lnmax = (0..coeffs.len()).map(|n| coeffs.ln_abs(n)).fold(0.0, f64::max);
        assert!(lnmax > 300.0, "ln max = {lnmax}");
        assert!((0..coeffs.len()).all(|n| coeffs.ln_abs(n).is_finite()));
        // recurrence still holds in log space where the pair is representable
        for n in 2..40 {
            let r = p.recurrence_coeffs(n).unwrap();
            assert_relative_eq!(
                r.a * coeffs.value(n),
                r.b * coeffs.value(n - 1) + r.c * coeffs.value(n - 2),
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn evaluate_basic_cases_and_errors() {
        let p = params_symmetric(10.0, 1.0, -0.5).unwrap();
        assert_eq!(evaluate(&p, 0.0, 1e-12, 100).unwrap(), 1.0);
        assert_eq!(
            evaluate(&p, 0.9995, 1e-12, 100),
            Err(Error::DivergenceRisk { xi: 0.9995 })
        );
        assert!(matches!(
            evaluate(&p, 0.99, 1e-14, 50),
            Err(Error::NoConvergence { .. })
        ));
        assert!(evaluate(&p, -0.1, 1e-12, 100).is_err());
    }

    // Double-double arithmetic for the extended-precision summation oracle.
    #[derive(Clone, Copy)]
    struct Dd(f64, f64);

    impl Dd {
        fn new(x: f64) -> Self {
            Dd(x, 0.0)
        }
        fn two_sum(a: f64, b: f64) -> (f64, f64) {
            let s = a + b;
            let bb = s - a;
            (s, (a - (s - bb)) + (b - bb))
        }
        fn add(self, o: Dd) -> Dd {
            let (s, e) = Self::two_sum(self.0, o.0);
            let e = e + self.1 + o.1;
            let (hi, lo) = Self::two_sum(s, e);
            Dd(hi, lo)
        }
        fn mul(self, o: Dd) -> Dd {
            let p = self.0 * o.0;
            let e = self.0.mul_add(o.0, -p);
            let e = e + self.0 * o.1 + self.1 * o.0;
            let (hi, lo) = Self::two_sum(p, e);
            Dd(hi, lo)
        }
        fn div(self, o: Dd) -> Dd {
            let q1 = self.0 / o.0;
            let r = self.add(o.mul(Dd::new(-q1)));
            let q2 = r.0 / o.0;
            let r = r.add(o.mul(Dd::new(-q2)));
            let q3 = r.0 / o.0;
            let (hi, lo) = Self::two_sum(q1, q2);
            Dd(hi, lo).add(Dd::new(q3))
        }
    }

    /// Brute-force `sum_{n<terms} v_n xi^n` with the recurrence written out
    /// from its defining formulas in double-double.
    fn brute_force_sum(p: &HeunParams, xi: f64, terms: usize) -> f64 {
        let (al, be, ga, de, et) = (p.alpha, p.beta, p.gamma, p.delta, p.eta);
        let mut vm2 = Dd::new(0.0);
        let mut vm1 = Dd::new(1.0);
        let mut sum = Dd::new(1.0);
        let mut pow = Dd::new(1.0);
        let x = Dd::new(xi);
        for n in 1..terms {
            let n = n as f64;
            let a = Dd::new(1.0).add(Dd::new(be).div(Dd::new(n)));
            let b1 = Dd::new(be + ga - al - 1.0).div(Dd::new(n));
            let b2 = Dd::new(et - (be + ga - al) / 2.0 - al * be / 2.0 + be * ga / 2.0)
                .div(Dd::new(n * n));
            let b = Dd::new(1.0).add(b1).add(b2);
            let c = Dd::new(al)
                .div(Dd::new(n * n))
                .mul(Dd::new(de / al + (be + ga) / 2.0 + n - 1.0));
            let v = b.mul(vm1).add(c.mul(vm2)).div(a);
            pow = pow.mul(x);
            sum = sum.add(v.mul(pow));
            vm2 = vm1;
            vm1 = v;
        }
        sum.0 + sum.1
    }

    #[test]
    fn evaluate_matches_extended_precision_long_sum() {
        for (u0, d, eps) in [(10.0, 1.0, -0.5), (149.57, 1.0, -3.0), (40.0, 0.7, -9.0)] {
            let p = params_symmetric(u0, d, eps).unwrap();
            let value = evaluate(&p, 0.5, 1e-12, 4000).unwrap();
            let oracle = brute_force_sum(&p, 0.5, 4000);
            assert_relative_eq!(value, oracle, max_relative = 1e-10);
            let pa = p.to_antisymmetric();
            let value = evaluate(&pa, 0.5, 1e-12, 4000).unwrap();
            let oracle = brute_force_sum(&pa, 0.5, 4000);
            assert_relative_eq!(value, oracle, max_relative = 1e-10);
        }
    }
}
