//! Exact rational arithmetic: sparse multivariate polynomials and symmetric
//! quadratic forms over `BigRational`.
//!
//! Nothing in this module touches floating point except the explicit
//! `to_f64` conversions used to hand problems to [`crate::numopt`].

mod poly;
mod quadform;
mod rational;

pub use poly::{Monomial, Polynomial};
pub use quadform::QuadraticForm;
pub use rational::{
    format_rational, parse_rational, rat, rational_from_f64, rational_to_f64, Rational,
};

pub(crate) use rational::SparseEvaluator;
