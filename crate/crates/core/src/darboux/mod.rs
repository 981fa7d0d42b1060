//! Second integrals and their discrete counterparts under Runge-Kutta maps.

pub mod checks;
pub mod cofactor;
pub mod types;

pub use checks::{
    check_higher_integrals, check_modified_integral, check_pade_quadratic, check_preservation,
    check_rational_integral, iteration_index_integral, modified_exponent, preservation_with, quadratic_drift,
    DriftSeries, HigherCheck, Preservation,
};
pub use cofactor::{
    discrete_cofactor_numeric, discrete_cofactor_symbolic, verify_continuous, CofactorEvaluator, DiscreteCofactor,
};
pub use types::{HigherIntegralSystem, QuadraticInvariant, SecondIntegral};
