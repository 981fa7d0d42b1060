use num_rational::BigRational;

use crate::error::Result;
use crate::scalar::Scalar;

use super::step::{rk_step, RkMap};
use super::system::OdeSystem;
use super::tableau::ButcherTableau;

/// One step of Kahan's method on a quadratic field: a single linear solve
/// of `(I - (h/2) J(x)) (x' - x) = h f(x)`.
pub fn kahan_step<F: Scalar>(sys: &OdeSystem, x: &[F], h: F) -> Result<Vec<F>> {
    sys.quadratic_field()?;
    let t = ButcherTableau::by_id("kahan")?;
    Ok(RkMap::new(&t, sys).step(x, h)?.next)
}

/// Solves `(x'-x)/h = (1-2θ) f((x+x')/2) + θ f(x) + θ f(x')` by the stage
/// solver.
pub fn theta_method_step<F: Scalar>(theta: &BigRational, sys: &OdeSystem, x: &[F], h: F) -> Result<Vec<F>> {
    Ok(rk_step(&ButcherTableau::rka(theta.clone()), sys, x, h)?.next)
}
