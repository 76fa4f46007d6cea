//! Effective constraints for quantum constrained systems.
//!
//! Expectation values and Weyl-ordered central moments form a Poisson manifold;
//! a constraint operator induces a tower of effective constraints on it, which
//! this crate generates, truncates by moment order, and solves exactly.

pub mod constraint_factory;
pub mod moment_space;
pub mod reduction_engine;
pub mod symbolic_ring;
pub mod weyl_algebra;

/// Errors surfaced by the engine.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("zero divisor")]
    ZeroDivisor,
    #[error("non-polynomial in graded symbols")]
    NonPolynomialGrade,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("mismatched pair tables")]
    PairMismatch,
    #[error("nonlinear leading term in {0}")]
    NonlinearLeadingTerm(String),
    #[error("gauge conditions do not fix second-class set (null vector {0})")]
    SingularDelta(String),
    #[error("target not resolvable: {0}")]
    Unresolvable(String),
    #[error("{0}")]
    Invalid(String),
}
