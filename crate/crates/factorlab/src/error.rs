//! Error type shared by all modules.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the pipeline, from input validation
/// to numerical failures. [`Error::code`] yields a stable machine-readable
/// slug used by the CLI for exit-status mapping.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// `N` is prime, a prime power, or has more than two prime factors.
    NotSemiprime { n: u64, reason: String },
    /// `alpha` is not a usable unit of `Z/NZ` for graph construction.
    InvalidAlpha { alpha: u64, n: u64, reason: String },
    /// Order computation on a non-coprime pair.
    InvalidTotative { alpha: u64, modulus: u64 },
    /// Mark count out of range (at least one unmarked vertex must remain).
    InvalidK { k: u64, n_vertices: u64 },
    /// A mark list failed validation (out of range or duplicated).
    InvalidMarks { reason: String },
    /// Exact enumeration would exceed the subset budget.
    UseMonteCarlo { subsets: u128, budget: u64 },
    /// Time step violates the positivity bound `dt < 1/λ_max`.
    InvalidDt { dt: f64, bound: f64 },
    /// Every entry of `E·P` vanished; no renormalization is possible.
    AbsorbedAll,
    /// Matrix handed to the eigensolver is not symmetric.
    NotSymmetric { max_asymmetry: f64 },
    /// Eigensolver did not converge within its iteration budget.
    EigensolverFailure { detail: String },
    /// Start vector has no overlap with the minimal eigenspace.
    NoOverlap,
    /// Integrator norm drift exceeded the per-step tolerance; raise `steps`.
    StepTooCoarse { step: u64, drift: f64 },
    /// Negative or non-finite evolution time.
    InvalidTime { t: f64 },
    /// Catch-all for malformed numeric input (zero vectors, bad dimensions).
    InvalidInput { reason: String },
}

impl Error {
    /// Stable slug for scripting against the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotSemiprime { .. } => "invalid-n",
            Error::InvalidAlpha { .. } => "invalid-alpha",
            Error::InvalidTotative { .. } => "invalid-totative",
            Error::InvalidK { .. } => "invalid-k",
            Error::InvalidMarks { .. } => "invalid-marks",
            Error::UseMonteCarlo { .. } => "use-monte-carlo",
            Error::InvalidDt { .. } => "invalid-dt",
            Error::AbsorbedAll => "absorbed-all",
            Error::NotSymmetric { .. } => "invalid-matrix",
            Error::EigensolverFailure { .. } => "eigensolver-failure",
            Error::NoOverlap => "no-overlap",
            Error::StepTooCoarse { .. } => "step-too-coarse",
            Error::InvalidTime { .. } => "invalid-t",
            Error::InvalidInput { .. } => "invalid-input",
        }
    }

    /// True for input-validation errors, false for numerical failures.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::AbsorbedAll
                | Error::EigensolverFailure { .. }
                | Error::StepTooCoarse { .. }
                | Error::NoOverlap
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotSemiprime { n, reason } => {
                write!(f, "{n} is not a product of two distinct primes: {reason}")
            }
            Error::InvalidAlpha { alpha, n, reason } => {
                write!(f, "alpha {alpha} is invalid for N={n}: {reason}")
            }
            Error::InvalidTotative { alpha, modulus } => {
                write!(f, "{alpha} is not coprime to {modulus}")
            }
            Error::InvalidK { k, n_vertices } => write!(
                f,
                "k={k} out of range: need 1 <= k <= {} so an unmarked vertex remains",
                n_vertices.saturating_sub(1)
            ),
            Error::InvalidMarks { reason } => write!(f, "invalid mark set: {reason}"),
            Error::UseMonteCarlo { subsets, budget } => write!(
                f,
                "{subsets} subsets exceed the enumeration budget of {budget}; use Monte Carlo"
            ),
            Error::InvalidDt { dt, bound } => {
                write!(f, "dt={dt} violates the stability bound dt < {bound}")
            }
            Error::AbsorbedAll => write!(f, "all walker mass absorbed in one step"),
            Error::NotSymmetric { max_asymmetry } => {
                write!(f, "matrix is not symmetric (max |A - A^T| = {max_asymmetry:e})")
            }
            Error::EigensolverFailure { detail } => write!(f, "eigensolver failed: {detail}"),
            Error::NoOverlap => {
                write!(f, "start vector has zero projection onto the minimal eigenspace")
            }
            Error::StepTooCoarse { step, drift } => write!(
                f,
                "norm drift {drift:e} at step {step} exceeds 1e-6; increase the step count"
            ),
            Error::InvalidTime { t } => write!(f, "invalid evolution time T={t}"),
            Error::InvalidInput { reason } => write!(f, "invalid input: {reason}"),
        }
    }
}

impl std::error::Error for Error {}
