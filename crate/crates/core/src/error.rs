use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("quadrature on [{a}, {b}] did not converge: error estimate {error_estimate:e} above tolerance {tol:e} after {panels} panels")]
    NonConvergence {
        a: f64,
        b: f64,
        error_estimate: f64,
        tol: f64,
        panels: usize,
    },

    #[error("invalid bracket [{lo}, {hi}]: {reason}")]
    BracketInvalid {
        lo: f64,
        hi: f64,
        reason: &'static str,
    },

    #[error("no crossing of level {level} found on ({a}, {b})")]
    NoCrossing { a: f64, b: f64, level: f64 },

    #[error("{what}: argument {value} is below the domain floor {floor}")]
    DomainTooSmall {
        what: &'static str,
        value: f64,
        floor: f64,
    },

    #[error("cumulative table cannot be extended to {requested} (cap {cap})")]
    TableExhausted { requested: f64, cap: f64 },

    #[error("cache was built with config hash {found}, current configuration hashes to {expected}")]
    ConfigHashMismatch { expected: String, found: String },

    #[error("malformed cache file: {0}")]
    CacheFormat(String),

    #[error("condition estimate {kappa:.3e} exceeds bound {bound:.3e}")]
    ConditionTooHigh { kappa: f64, bound: f64 },

    #[error("mean-value crossing at {xi} misses the level {level:e} by {residual:e}")]
    CrossingInaccurate { xi: f64, level: f64, residual: f64 },

    #[error("Δ₃ = Δ₄ = {delta} is excluded")]
    DeltaDegenerate { delta: f64 },

    #[error("no {family} chain at depth {k} in the chain set")]
    MissingChain { family: String, k: usize },

    #[error("chain point {point} for r = {r} is outside ({lo}, {hi})")]
    MembershipViolated { r: usize, point: f64, lo: f64, hi: f64 },

    #[error("prime counting limited to x ≤ {max}, got {x}")]
    RangeTooLarge { x: f64, max: f64 },

    #[error("gap index r = {r} needs r + 1 ≤ k = {k}")]
    IndexOutOfTower { r: usize, k: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by the caller's parameters or configuration,
    /// as opposed to numerical failures during evaluation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::DeltaDegenerate { .. }
                | Error::InvalidParameter(_)
                | Error::ConfigHashMismatch { .. }
                | Error::CacheFormat(_)
                | Error::DomainTooSmall { .. }
                | Error::RangeTooLarge { .. }
                | Error::IndexOutOfTower { .. }
                | Error::MissingChain { .. }
                | Error::Io(_)
        )
    }
}
