//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("numerator degree {degree} must be below the sum of pole orders {bound}")]
    DegreeTooHigh { degree: usize, bound: usize },
    #[error("pole locations must be pairwise distinct")]
    DuplicatePole,
    #[error("pole order {0} unsupported; only orders 1 and 2 occur here")]
    PoleOrderUnsupported(u8),
    #[error("the zero polynomial has no squarefree part")]
    ZeroPolynomial,
    #[error("eigenvalues must be pairwise distinct")]
    DuplicateEigenvalue,
    #[error("eigenvalues must be positive, got {0}")]
    NonpositiveEigenvalue(String),
    #[error("potential needs at least two distinct eigenvalues")]
    EmptySpec,
    #[error("eigenvalue list has {values} entries but multiplicity list has {mults}")]
    LengthMismatch { values: usize, mults: usize },
    #[error("constraint {constraint} violated by {magnitude:e}")]
    ConstraintViolation {
        constraint: &'static str,
        magnitude: f64,
    },
    #[error("cannot project the zero position vector onto the sphere")]
    ZeroPosition,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("commutator coefficient at lambda^{power} does not vanish (magnitude {magnitude:e})")]
    FormViolation { power: u32, magnitude: f64 },
    #[error("constraint multiplier has no real root; reduce the step size")]
    MultiplierNoRealRoot,
    #[error("invalid step size {0}")]
    InvalidStep(f64),
    #[error("integration failed: {0}")]
    IntegrationFailure(String),
    #[error("spectral factorization mismatch at lambda^{lambda} mu^{mu}")]
    FactorizationMismatch { lambda: u32, mu: u32 },
    #[error("branch polynomial is identically zero")]
    ZeroBranchPolynomial,
    #[error("dual-route invariant computation disagrees: {0}")]
    InvariantMismatch(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
