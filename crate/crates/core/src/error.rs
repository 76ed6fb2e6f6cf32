use thiserror::Error;

/// Errors raised by the model, root-finding and enumeration routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("undefined sign count: polynomial is identically zero")]
    ZeroPolynomial,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("bracket ({lo}, {hi}) has no sign change and no detected tangency")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("no transition in bracket ({lo}, {hi}): {count} solution(s) at both ends")]
    NoTransition { lo: f64, hi: f64, count: usize },

    #[error("size cap exceeded: {what} needs {needed}, cap is {cap}")]
    SizeCap {
        what: &'static str,
        needed: u128,
        cap: u128,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
