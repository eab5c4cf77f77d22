use thiserror::Error;

/// Errors raised by the spectral routines.
///
/// Variants carry enough context to locate the failure (offending index,
/// achieved tolerance, iteration count) without re-running the computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite {series} coefficient at index {index}")]
    NonFiniteCoefficient { series: &'static str, index: usize },

    #[error("profile degree {degree} exceeds the cap {cap}")]
    DegreeTooLarge { degree: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("off-diagonal coefficient a_{index} = {value} is not positive")]
    NonPositiveOffDiagonal { index: usize, value: f64 },

    #[error("eigensolver did not converge after {iterations} iterations")]
    EigenNoConvergence { iterations: usize },

    #[error("found {found} roots, expected {expected}")]
    RootCountMismatch { found: usize, expected: usize },

    #[error("root bracket [{lo}, {hi}] does not enclose a sign change")]
    InvalidBracket { lo: f64, hi: f64 },

    #[error("monodromy determinant deviates from 1 by {deviation:e}")]
    DeterminantCheck { deviation: f64 },

    #[error("integrator tolerance not met at lambda = {lambda}: error estimate {estimate:e}")]
    IntegratorTolerance { lambda: f64, estimate: f64 },

    #[error("Galerkin truncation K = {k} too small: eigenvalue {value} within 5% of ceiling {ceiling}")]
    TruncationInsufficient { k: usize, value: f64, ceiling: f64 },

    #[error("cross-check failed at index {index}: {first} vs {second}")]
    CrossCheck { index: usize, first: f64, second: f64 },

    #[error("sign rule violated on gap {gap}: deficit {deficit:e} at lambda = {lambda}")]
    SignRule { gap: usize, lambda: f64, deficit: f64 },

    #[error("requested {requested} values, only {available} available")]
    NotEnoughValues { requested: usize, available: usize },

    #[error("KdV integration blew up; last valid time {last_valid_time}")]
    BlowUp { last_valid_time: f64 },

    #[error("|Im z| = {imag} exceeds the truncation guarantee; need n_max >= {required}")]
    ThetaTruncation { imag: f64, required: usize },

    #[error("quadrature self-estimate {estimate:e} above tolerance")]
    QuadratureTolerance { estimate: f64 },

    #[error("rate indeterminate: {usable} usable samples above the numerical floor")]
    RateIndeterminate { usable: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
