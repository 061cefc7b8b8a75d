use alloc::string::String;
use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("kernel is not positive definite at this resolution: lambda_{degree} = {value:e}")]
    NotPositiveDefinite { degree: usize, value: f64 },

    #[error("spectrum too short: need {needed} sorted eigenvalues but only {available} are available; increase kmax")]
    Range { needed: u64, available: u64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("adaptive quadrature on [{lo}, {hi}] did not converge (estimate {estimate:e}, max depth {depth})")]
    Quadrature {
        lo: f64,
        hi: f64,
        estimate: f64,
        depth: u32,
    },

    #[error("eigensolver failed to converge after {0} sweeps")]
    Eigensolver(usize),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

macro_rules! domain {
    ($($arg:tt)*) => {
        $crate::error::Error::Domain(alloc::format!($($arg)*))
    };
}
pub(crate) use domain;
