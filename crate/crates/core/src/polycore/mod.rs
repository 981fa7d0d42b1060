//! Exact multivariate polynomials and rational functions.

pub mod affine;
pub mod compiled;
pub mod monomial;
pub mod parse;
pub mod polynomial;
pub mod ratfun;
pub mod univariate;

pub use affine::AffineForm;
pub use compiled::{CompiledPoly, CompiledRatFun};
pub use monomial::{default_names, Monomial};
pub use parse::{parse_number, parse_polynomial, parse_polynomial_with, parse_rational, parse_rational_with};
pub use polynomial::{CoeffFmt, Polynomial};
pub use ratfun::RationalFunction;
