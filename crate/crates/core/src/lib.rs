//! Guarded concurrent game models with payoffs, and model checking for
//! alternating-time temporal logic extended with utility constraints.

pub mod arith;
pub mod checker;
pub mod dynamics;
mod lexer;
pub mod logic;
pub mod model;
pub mod random;
mod scalar;
pub mod tcm;

pub use lexer::ParseError;
pub use scalar::Scalar;

/// Exact rational scalar used by default throughout the crate.
pub type Payoff = num_rational::BigRational;

pub type Model = model::Gcgmp<Payoff>;
