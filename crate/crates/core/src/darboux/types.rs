use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::polycore::{AffineForm, Polynomial, RationalFunction};
use crate::rk::OdeSystem;

use super::cofactor::verify_continuous;

type Poly = Polynomial<BigRational>;
type Rf = RationalFunction<BigRational>;

/// `p` with `∇p·f = c p`.
#[derive(Clone, Debug)]
pub struct SecondIntegral {
    pub name: String,
    pub p: Poly,
    pub cofactor: Rf,
}

impl SecondIntegral {
    /// Checks the cofactor identity exactly before accepting the pair.
    pub fn verified(name: impl Into<String>, p: Poly, cofactor: Rf, sys: &OdeSystem) -> Result<Self> {
        let name = name.into();
        if !verify_continuous(&p, &cofactor, sys) {
            return Err(Error::Inconsistent(format!("{name}: cofactor identity fails")));
        }
        Ok(SecondIntegral { name, p, cofactor })
    }

    pub fn affine(&self) -> Option<AffineForm> {
        AffineForm::from_polynomial(&self.p)
    }

    /// Constant cofactor value, if any.
    pub fn constant_cofactor(&self) -> Option<BigRational> {
        self.cofactor.as_polynomial()?.as_constant()
    }
}

/// Affine forms `p̲(x) = D x + d0` with `ṗ̲ = L p̲`.
#[derive(Clone, Debug, PartialEq)]
pub struct HigherIntegralSystem {
    pub d: Matrix<BigRational>,
    pub d0: Vec<BigRational>,
    pub l: Matrix<BigRational>,
}

impl HigherIntegralSystem {
    pub fn new(d: Matrix<BigRational>, d0: Vec<BigRational>, l: Matrix<BigRational>, sys: &OdeSystem) -> Result<Self> {
        let m = d.nrows();
        if d.ncols() != sys.dim() || d0.len() != m || l.nrows() != m || l.ncols() != m {
            return Err(Error::DimensionMismatch { expected: m, got: l.nrows() });
        }
        if d.rank() != m {
            return Err(Error::Inconsistent("forms are linearly dependent".into()));
        }
        let h = HigherIntegralSystem { d, d0, l };
        if !h.holds(sys) {
            return Err(Error::Inconsistent("D f(x) = L p(x) fails".into()));
        }
        Ok(h)
    }

    pub fn linear(d: Matrix<BigRational>, l: Matrix<BigRational>, sys: &OdeSystem) -> Result<Self> {
        let m = d.nrows();
        Self::new(d, vec![BigRational::zero(); m], l, sys)
    }

    pub fn m(&self) -> usize {
        self.d.nrows()
    }

    pub fn forms(&self) -> Vec<AffineForm> {
        (0..self.m()).map(|i| AffineForm::new(self.d.row(i), self.d0[i].clone())).collect()
    }

    /// Exact check of `D f(x) = L p̲(x)` over the rational field.
    pub fn holds(&self, sys: &OdeSystem) -> bool {
        let forms: Vec<Poly> = self.forms().iter().map(AffineForm::to_polynomial).collect();
        let n = sys.dim();
        (0..self.m()).all(|i| {
            let mut lhs = Rf::from_poly(Poly::zero(n));
            for (j, f) in sys.field().iter().enumerate() {
                lhs = lhs + f * &Rf::constant(n, self.d[(i, j)].clone());
            }
            let mut rhs = Poly::zero(n);
            for (k, form) in forms.iter().enumerate() {
                rhs = rhs + form.scale(&self.l[(i, k)]);
            }
            (lhs - Rf::from_poly(rhs)).is_zero()
        })
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.forms().iter().map(|f| f.eval(x)).collect()
    }
}

/// `H = p̲ᵀ S p̲` where `ṗ̲ = Skew·S·p̲`, `S` symmetric, `Skew` skew.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticInvariant {
    pub basis: HigherIntegralSystem,
    pub s: Matrix<BigRational>,
    pub skew: Matrix<BigRational>,
}

impl QuadraticInvariant {
    /// Derives `Skew = L S⁻¹` and checks the symmetry conditions.
    pub fn new(basis: HigherIntegralSystem, s: Matrix<BigRational>) -> Result<Self> {
        if !s.is_symmetric() || s.nrows() != basis.m() {
            return Err(Error::Inconsistent("S must be symmetric and match the basis".into()));
        }
        let inv = s.inverse().ok_or_else(|| Error::Singular("S is singular".into()))?;
        let skew = &basis.l * &inv;
        if !skew.is_skew() {
            return Err(Error::Inconsistent("L S⁻¹ is not skew-symmetric".into()));
        }
        Ok(QuadraticInvariant { basis, s, skew })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let p = self.basis.eval(x);
        let m = p.len();
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m {
                let sij: f64 = crate::scalar::ToScalar::to_scalar(&self.s[(i, j)]);
                if sij != 0.0 {
                    acc += p[i] * sij * p[j];
                }
            }
        }
        acc
    }
}
