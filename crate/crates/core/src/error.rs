use alloc::string::String;

/// Errors produced by the numeric core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("polynomial coefficient list is empty")]
    EmptyPolynomial,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("no roots: polynomial has degree 0")]
    NoRoots,

    #[error("root finding did not converge for degree {degree} after {iterations} iterations")]
    RootsNotConverged { degree: usize, iterations: usize },

    #[error("pole on unit circle at theta = {theta}")]
    PoleOnUnitCircle { theta: f64 },

    #[error("transfer function is improper: numerator degree {num} > denominator degree {den}")]
    Improper { num: usize, den: usize },

    #[error("denominator is the zero polynomial")]
    ZeroDenominator,

    #[error("sample time must be finite and > 0, got {0}")]
    InvalidSampleTime(f64),

    #[error("expected a {expected} transfer function")]
    WrongDomain { expected: &'static str },

    #[error("sample times differ: {0} vs {1}")]
    SampleTimeMismatch(f64, f64),

    #[error("invalid gain plane: {0}")]
    InvalidPlane(String),

    #[error("invalid gains: {0}")]
    InvalidGains(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("angle grid is empty")]
    EmptyGrid,

    #[error("plant numerator is identically zero")]
    ZeroPlant,

    #[error("characteristic polynomial is identically zero")]
    DegenerateCharPoly,

    #[error("closed loop is unstable (spectral radius {0})")]
    Unstable(f64),
}

pub type Result<T> = core::result::Result<T, Error>;
