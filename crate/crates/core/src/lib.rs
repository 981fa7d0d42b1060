//! Affine second integrals (Darboux polynomials) of ODEs and their fate
//! under Runge-Kutta maps: exact polynomial arithmetic, RK steppers,
//! discrete cofactors, rational-integral detection and linear decoupling.

pub mod darboux;
pub mod detect;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod polycore;
pub mod rk;
pub mod scalar;
pub mod specfile;
pub mod surd;

pub use error::{Error, Result};
pub use scalar::{rat, rat_int, Field, Scalar, ToScalar};
pub use surd::Surd;

pub type Rational = num_rational::BigRational;
pub type Poly = polycore::Polynomial<Rational>;
pub type RatFun = polycore::RationalFunction<Rational>;
pub type Form = polycore::AffineForm<Rational>;
pub type RkMap64 = rk::RkMap<f64>;
pub type RkMap32 = rk::RkMap<f32>;
pub type CofactorEvaluator64 = darboux::CofactorEvaluator<f64>;
