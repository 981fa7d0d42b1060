use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;

use super::monomial::default_names;
use super::polynomial::Polynomial;
use crate::scalar::{Field, Scalar, ToScalar};

/// Affine form `p(x) = alphaᵀx + alpha0`.
#[derive(Clone, PartialEq, Debug)]
pub struct AffineForm<C = BigRational> {
    pub alpha: Vec<C>,
    pub alpha0: C,
}

impl<C: Field> AffineForm<C> {
    pub fn new(alpha: Vec<C>, alpha0: C) -> Self {
        AffineForm { alpha, alpha0 }
    }

    pub fn linear(alpha: Vec<C>) -> Self {
        AffineForm { alpha, alpha0: C::zero() }
    }

    /// Reads off an affine polynomial; `None` if the degree exceeds one.
    pub fn from_polynomial(p: &Polynomial<C>) -> Option<Self> {
        p.is_affine().then(|| AffineForm { alpha: p.linear_coeffs(), alpha0: p.constant_term() })
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_zero(&self) -> bool {
        self.alpha0.is_zero() && self.alpha.iter().all(Zero::is_zero)
    }

    pub fn to_polynomial(&self) -> Polynomial<C> {
        Polynomial::affine(&self.alpha, self.alpha0.clone())
    }

    pub fn scale(&self, c: &C) -> Self {
        AffineForm {
            alpha: self.alpha.iter().map(|a| a.clone() * c.clone()).collect(),
            alpha0: self.alpha0.clone() * c.clone(),
        }
    }
}

impl<C: Field + ToScalar> AffineForm<C> {
    pub fn eval<F: Scalar>(&self, x: &[F]) -> F {
        let mut acc: F = self.alpha0.to_scalar();
        for (a, xi) in self.alpha.iter().zip(x) {
            acc = acc + a.to_scalar::<F>() * *xi;
        }
        acc
    }

    pub fn compile<F: Scalar>(&self) -> (Vec<F>, F) {
        (self.alpha.iter().map(|a| a.to_scalar()).collect(), self.alpha0.to_scalar())
    }
}

impl fmt::Display for AffineForm<BigRational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_polynomial().render(&default_names(self.dim())))
    }
}
