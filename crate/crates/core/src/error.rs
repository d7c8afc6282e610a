use thiserror::Error;

use crate::params::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {}", format_violations(.0))]
    InvalidParams(Vec<Violation>),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("eigen-decomposition failed: {0}")]
    Eigen(String),

    /// The cached eigenbasis is too ill-conditioned for modal expansions;
    /// callers should switch to the direct (ODE) routes.
    #[error("eigenbasis ill-conditioned (condition {condition:.3e}); use the direct propagation route")]
    IllConditioned { condition: f64 },

    #[error("numerical failure at step {step} (t = {t} ps, eigen-condition {condition:.3e}): {reason}")]
    Numerical {
        step: usize,
        t: f64,
        condition: f64,
        reason: String,
    },

    #[error("integration failed: {0}")]
    Integration(String),
}

pub type Result<T> = std::result::Result<T, Error>;

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

impl Error {
    /// True for failures caused by the numerics rather than the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Eigen(_) | Error::IllConditioned { .. } | Error::Numerical { .. } | Error::Integration(_)
        )
    }
}
