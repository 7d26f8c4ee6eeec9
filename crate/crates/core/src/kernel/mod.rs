//! Exact symbolic algebra: rationals, polynomials and rational functions in
//! the field variables, differential polynomials over jets with one odd
//! factor, the expression grammar, and an exact parameter-linear solver.

pub mod diffpoly;
pub mod expr;
pub mod linsolve;
pub mod poly;
pub mod ratfunc;

pub use diffpoly::{DiffMonomial, DiffPoly, Jet, JetVar, OddVar};
pub use expr::{parse, parse_ratfunc, parse_with_aliases, ParseError};
pub use linsolve::{linear_solve, linear_solve_with, LinearSystemSolution};
pub use poly::{Monomial, Poly, Var};
pub use ratfunc::RatFunc;

/// Arbitrary-precision rational number.
pub type Rat = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KernelError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("parameters may not appear in a denominator")]
    ParameterInDenominator,
    #[error("odd degree overflow")]
    OddDegreeOverflow,
    #[error("nonlinear ansatz: parameters occur nonlinearly")]
    NonlinearAnsatz,
    #[error("unregistered nonlocal variable r{}", .0 + 1)]
    UnknownNonlocal(usize),
    #[error("jet order {order} exceeds the cap {cap}")]
    JetCapExceeded { order: usize, cap: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Convenience constructor for small rationals.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}
