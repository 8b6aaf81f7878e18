use thiserror::Error;

use crate::spectrum::Parity;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid family (q, p) = ({q}, {p}): q must be one of -2, 0, 2, 4, 6 and p even with -2 <= p <= q")]
    InvalidFamily { q: i32, p: i32 },

    #[error("energy eps = {eps} is not a bound state (eps must be negative)")]
    UnboundState { eps: f64 },

    #[error("recurrence index must be positive, got {0}")]
    InvalidIndex(usize),

    #[error("indicial degeneracy: A_{n} = 1 + beta/{n} vanishes")]
    IndicialDegeneracy { n: usize },

    #[error("series does not terminate and xi = {xi} lies outside the safe convergence disk")]
    DivergenceRisk { xi: f64 },

    #[error("series did not converge within {terms} terms (tail/sum = {residual:e})")]
    NoConvergence { terms: usize, residual: f64 },

    #[error("no bound state for N = {n}, parity {parity}: d*sqrt(U0) = {scaled_depth} must exceed {threshold}")]
    NoBoundState {
        n: usize,
        parity: Parity,
        scaled_depth: f64,
        threshold: f64,
    },

    #[error(
        "termination not achieved for N = {n}, parity {parity}, U0 = {u0}: |v_(N+1)| = {next:e}, |v_(N+2)| = {next2:e} (tolerance {tolerance:e}); U0 is not a special strength"
    )]
    TerminationNotAchieved {
        n: usize,
        parity: Parity,
        u0: f64,
        next: f64,
        next2: f64,
        tolerance: f64,
    },

    #[error("wavefunction for a {expected} state requested from a {found} state")]
    ParityMismatch { expected: Parity, found: Parity },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("degenerate sample: all values vanish")]
    DegenerateSample,

    #[error("no sign change of the matching defect in [{lo}, {hi}] (defects {defect_lo:e}, {defect_hi:e})")]
    BracketFailure {
        lo: f64,
        hi: f64,
        defect_lo: f64,
        defect_hi: f64,
    },
}
