//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by quantizer construction, eigensystem solves, sampler
/// preparation and estimation runs.
#[derive(Debug, Error)]
pub enum Error {
    /// A process or payoff parameter is outside its admissible range.
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// Newton and Lloyd both failed to drive the quantizer gradient below
    /// tolerance.
    #[error(
        "quantizer optimization for n = {n} stalled: gradient norm {residual:e} \
         after {iterations} iterations"
    )]
    QuantizerStalled {
        n: usize,
        iterations: usize,
        residual: f64,
    },

    /// The bracket predicted for an Ornstein-Uhlenbeck eigenfrequency does not
    /// contain a sign change; the eigenvalue equation and the bracket logic
    /// disagree, which is a structural failure rather than a tolerance issue.
    #[error(
        "no sign change for frequency #{index} in bracket ({lo}, {hi}): \
         f(lo) = {f_lo:e}, f(hi) = {f_hi:e}"
    )]
    FrequencyBracket {
        index: usize,
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    /// A root accepted by the frequency solver does not satisfy the
    /// eigenvalue equation to the required relative residual.
    #[error(
        "frequency #{index} = {omega} has residual {residual:e} \
         above tolerance {tolerance:e}"
    )]
    FrequencyResidual {
        index: usize,
        omega: f64,
        residual: f64,
        tolerance: f64,
    },

    /// A time grid failed validation.
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    /// The residual covariance of the conditioned coordinates has an
    /// eigenvalue more negative than the clipping tolerance allows.
    #[error(
        "residual covariance is not positive semidefinite: eigenvalue \
         {eigenvalue:e} (tolerance -{tolerance:e})"
    )]
    IndefiniteResidual { eigenvalue: f64, tolerance: f64 },

    /// The total path budget cannot give every stratum at least one path.
    #[error("budget {budget} cannot cover {strata} strata at one path each")]
    BudgetTooSmall { budget: usize, strata: usize },

    /// A payoff evaluated to NaN or infinity.
    #[error("payoff returned a non-finite value in stratum {stratum}, replicate {replicate}")]
    NonFinitePayoff { stratum: usize, replicate: usize },

    /// A simulation scheme produced a non-finite state.
    #[error("simulation blew up at step {step} (t = {time}): state = {value}")]
    BlowUp { step: usize, time: f64, value: f64 },

    /// Underlying I/O failure (database or table output).
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Malformed database file.
    #[error("database: {0}")]
    Json(#[from] serde_json::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
