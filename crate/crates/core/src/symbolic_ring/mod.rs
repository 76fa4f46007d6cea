//! Exact commutative arithmetic: Gaussian rationals, polynomials and rational
//! functions in a declared symbol set, with λ-graded truncation.

mod coeff;
mod expr;
mod parse;
mod poly;
mod var;

pub use coeff::GaussianRational;
pub use expr::{PhaseExpression, ScalarExpr};
pub use parse::{eval_scalar, moment_or_constant, parse_ast, parse_expr, Ast};
pub use poly::{grlex, Mono, Poly};
pub use var::{Canon, Exps, Labels, Name, Var, MAX_PAIRS};

/// Parse with the default labels; panics on bad input. Test and fixture helper.
pub fn ex(text: &str) -> ScalarExpr {
    parse_expr(text, &Labels::default()).unwrap_or_else(|e| panic!("{e}"))
}
