//! The hyperbolic potential family `V(x) = -V0 sinh^p(x/d) / cosh^q(x/d)`.
//!
//! Everything downstream works in dimensionless units: energies and
//! strengths are multiplied by `2m/hbar^2`, so the potential strength is
//! `U0 = 2 m V0 / hbar^2` and the energy is `eps = 2 m E / hbar^2`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Admissible family indices `q`.
pub const FAMILIES: [i32; 5] = [-2, 0, 2, 4, 6];

/// A member of the potential family together with its physical scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialSpec {
    /// Potential strength `U0 = 2 m V0 / hbar^2` (inverse length squared).
    pub u0: f64,
    /// Width parameter (length).
    pub d: f64,
    pub q: i32,
    pub p: i32,
}

impl PotentialSpec {
    pub fn new(u0: f64, d: f64, q: i32, p: i32) -> Result<Self> {
        if !(u0 > 0.0 && u0.is_finite()) {
            return Err(Error::InvalidInput(format!("U0 must be positive, got {u0}")));
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::InvalidInput(format!("d must be positive, got {d}")));
        }
        validate_family(q, p)?;
        Ok(Self { u0, d, q, p })
    }

    /// The hyperbolic double well, `(q, p) = (6, 4)`.
    pub fn double_well(u0: f64, d: f64) -> Result<Self> {
        Self::new(u0, d, 6, 4)
    }

    /// `-U0 sinh^p(x/d) / cosh^q(x/d)`.
    ///
    /// For `p = -2` the value diverges at `x = 0`, which is returned as `-inf`.
    pub fn potential_value(&self, x: f64) -> f64 {
        // sinh^p / cosh^q = tanh^p sech^(q-p), finite for large |z| since p <= q
        let z = x / self.d;
        -self.u0 * z.tanh().powi(self.p) * z.cosh().recip().powi(self.q - self.p)
    }

    pub fn family(&self) -> FamilyClass {
        // validated at construction
        classify_family(self.q, self.p).expect("validated family")
    }
}

fn validate_family(q: i32, p: i32) -> Result<()> {
    let q_ok = FAMILIES.contains(&q);
    let p_ok = p % 2 == 0 && (-2..=q).contains(&p);
    if q_ok && p_ok {
        Ok(())
    } else {
        Err(Error::InvalidFamily { q, p })
    }
}

/// Minimum of the `(6, 4)` well, `-(4/27) U0`, reached where `sinh^2(x/d) = 2`.
pub fn double_well_floor(u0: f64) -> f64 {
    -4.0 / 27.0 * u0
}

/// Solvability class of a `(q, p)` family member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyClass {
    /// `q in {-2, 0, 2}`: at most three singular points after the change of
    /// variable, so the problem reduces to the hypergeometric equation.
    HypergeometricReducible,
    /// `q = 4`: confluent Heun with `alpha = 0` and `mu + nu != 0`, so the
    /// first termination condition can never hold.
    HeunNonterminatingFirstCondition,
    /// `q = 6`, `p != 4`: the first condition can hold but the second cannot.
    HeunNonterminatingSecondCondition,
    /// `(6, 4)`: admits confluent Heun polynomial solutions.
    HeunPolynomialCapable,
}

impl FamilyClass {
    pub fn tag(self) -> &'static str {
        match self {
            Self::HypergeometricReducible => "hypergeometric-reducible",
            Self::HeunNonterminatingFirstCondition => "heun-nonterminating-first-condition",
            Self::HeunNonterminatingSecondCondition => "heun-nonterminating-second-condition",
            Self::HeunPolynomialCapable => "heun-polynomial-capable",
        }
    }
}

impl fmt::Display for FamilyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

pub fn classify_family(q: i32, p: i32) -> Result<FamilyClass> {
    validate_family(q, p)?;
    Ok(match (q, p) {
        (-2 | 0 | 2, _) => FamilyClass::HypergeometricReducible,
        (4, _) => FamilyClass::HeunNonterminatingFirstCondition,
        (6, 4) => FamilyClass::HeunPolynomialCapable,
        _ => FamilyClass::HeunNonterminatingSecondCondition,
    })
}

/// Dimensionless energy and strength, both in units of inverse length squared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dimensionless {
    pub eps: f64,
    pub u0: f64,
}

/// Converts `(m, E, V0, hbar)` to `(eps, U0) = (2mE/hbar^2, 2mV0/hbar^2)`.
pub fn to_dimensionless(mass: f64, energy: f64, v0: f64, hbar: f64) -> Result<Dimensionless> {
    for (name, value) in [("mass", mass), ("V0", v0), ("hbar", hbar)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidInput(format!("{name} must be positive, got {value}")));
        }
    }
    if !energy.is_finite() {
        return Err(Error::InvalidInput(format!("energy must be finite, got {energy}")));
    }
    let scale = 2.0 * mass / (hbar * hbar);
    Ok(Dimensionless {
        eps: scale * energy,
        u0: scale * v0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn double_well_vanishes_at_origin_and_infinity() {
        let spec = PotentialSpec::double_well(1.0, 1.0).unwrap();
        assert_eq!(spec.potential_value(0.0), 0.0);
        assert!(spec.potential_value(10.0).abs() < 1e-6);
        assert!(spec.potential_value(-10.0).abs() < 1e-6);
        assert_eq!(spec.potential_value(1e6), 0.0);
        assert_eq!(spec.potential_value(-1e6), 0.0);
    }

    #[test]
    fn double_well_minimum_from_dense_grid() {
        let spec = PotentialSpec::double_well(1.0, 1.0).unwrap();
        let step = 1e-6;
        let (mut best_x, mut best_v) = (0.0, f64::INFINITY);
        for i in 0..=5_000_000u32 {
            let x = f64::from(i) * step;
            let v = spec.potential_value(x);
            if v < best_v {
                best_x = x;
                best_v = v;
            }
        }
        assert!((best_x - 1.1462).abs() < 1e-4, "x* = {best_x}");
        assert!((best_v + 0.14815).abs() < 1e-5, "V* = {best_v}");
        // sinh^2(x*) = 2 at the minimum
        assert!((best_x.sinh().powi(2) - 2.0).abs() < 1e-5);
    }

    #[test]
    fn potential_tail_for_q_greater_than_p_is_finite() {
        for (q, p) in [(6, 4), (6, 2), (4, 2), (2, 0), (6, -2)] {
            let spec = PotentialSpec::new(3.0, 0.5, q, p).unwrap();
            let far = spec.potential_value(400.0);
            assert!(far.is_finite() && far.abs() < 1e-100, "({q},{p}): {far}");
        }
        let flat = PotentialSpec::new(3.0, 0.5, 6, 6).unwrap();
        assert_eq!(flat.potential_value(400.0), -3.0);
        let singular = PotentialSpec::new(3.0, 0.5, 2, -2).unwrap();
        assert_eq!(singular.potential_value(0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn classification_table() {
        assert_eq!(classify_family(2, 0).unwrap(), FamilyClass::HypergeometricReducible);
        assert_eq!(classify_family(-2, -2).unwrap(), FamilyClass::HypergeometricReducible);
        assert_eq!(classify_family(0, 0).unwrap(), FamilyClass::HypergeometricReducible);
        assert_eq!(classify_family(6, 4).unwrap(), FamilyClass::HeunPolynomialCapable);
        assert_eq!(
            classify_family(4, 2).unwrap(),
            FamilyClass::HeunNonterminatingFirstCondition
        );
        for p in [-2, 0, 2, 6] {
            assert_eq!(
                classify_family(6, p).unwrap(),
                FamilyClass::HeunNonterminatingSecondCondition
            );
        }
    }

    #[test]
    fn classification_rejects_out_of_range() {
        for (q, p) in [(8, 4), (1, 0), (6, 3), (6, 8), (2, -4), (0, 2)] {
            assert_eq!(classify_family(q, p), Err(Error::InvalidFamily { q, p }));
        }
        assert!(PotentialSpec::new(1.0, 1.0, 6, 5).is_err());
        assert!(PotentialSpec::new(0.0, 1.0, 6, 4).is_err());
        assert!(PotentialSpec::new(1.0, -1.0, 6, 4).is_err());
    }

    #[test]
    fn dimensionless_conversion() {
        let r = to_dimensionless(0.5, -1.0, 1.0, 1.0).unwrap();
        assert_eq!((r.eps, r.u0), (-1.0, 1.0));
        let r = to_dimensionless(1.0, 0.0, 5.0, 1.0).unwrap();
        assert_eq!((r.eps, r.u0), (0.0, 10.0));
        let r = to_dimensionless(1.0, -3.42, 74.785, 1.0).unwrap();
        assert_relative_eq!(r.eps, -6.84, max_relative = 1e-14);
        assert_relative_eq!(r.u0, 149.57, max_relative = 1e-14);
        assert!(to_dimensionless(0.0, -1.0, 1.0, 1.0).is_err());
        assert!(to_dimensionless(1.0, -1.0, -1.0, 1.0).is_err());
        assert!(to_dimensionless(1.0, -1.0, 1.0, 0.0).is_err());
    }
}
