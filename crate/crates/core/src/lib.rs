//! Bound states of the hyperbolic double well `V(x) = -V0 sinh^4(x/d) / cosh^6(x/d)`
//! through confluent Heun polynomials, cross-checked by Numerov shooting.
//!
//! - [`model`]: the `sinh^p / cosh^q` potential family and unit conversion.
//! - [`heun`]: confluent Heun parameters, recurrence and series.
//! - [`spectrum`]: termination conditions, closed-form energies, special strengths.
//! - [`wavefn`]: position-space wavefunctions, normalization, nodes, residuals.
//! - [`oracle`]: Numerov integration and shooting.
//! - [`cli`]: the command-line front end.

pub mod cli;
pub mod error;
pub mod heun;
pub mod model;
pub mod oracle;
pub mod spectrum;
pub mod wavefn;

pub use error::{Error, Result};
pub use heun::{HeunParams, SeriesCoefficients};
pub use model::{FamilyClass, PotentialSpec};
pub use oracle::{ShootingConfig, ShootingResult};
pub use spectrum::{EigenState, Parity};
pub use wavefn::WaveSample;
