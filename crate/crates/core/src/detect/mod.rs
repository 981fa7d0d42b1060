//! Detection of affine Darboux polynomials.

pub mod constant;
pub mod decouple;
pub mod rational;

pub use constant::{find_constant_cofactor_dps, find_constant_cofactor_dps_field, ConstantDp, DpValue};
pub use decouple::{canonical, decouple, decouple_field, DecoupleResult};
pub use rational::{
    cofactor_of, detect_rational_integral, find_dps_given_cofactor, forward_euler_jacobian_det, verify_divisibility_thm,
    CandidateSource, Cofactor, CofactorCandidate, DetectOptions, DetectReport, RationalIntegral,
};
