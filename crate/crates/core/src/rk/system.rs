use std::collections::BTreeMap;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::polycore::{CompiledRatFun, Polynomial, RationalFunction};
use crate::scalar::Scalar;

type Poly = Polynomial<BigRational>;
type Rf = RationalFunction<BigRational>;

/// `ẋ = f(x)` with polynomial or rational components. Parameters are
/// substituted at construction and kept only for reporting.
#[derive(Clone, Debug)]
pub struct OdeSystem {
    name: String,
    vars: Vec<String>,
    params: BTreeMap<String, BigRational>,
    field: Vec<Rf>,
}

impl OdeSystem {
    pub fn new(name: impl Into<String>, vars: Vec<String>, field: Vec<Rf>) -> Result<Self> {
        let n = vars.len();
        if field.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: field.len() });
        }
        if let Some(bad) = field.iter().find(|f| f.nvars() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: bad.nvars() });
        }
        Ok(OdeSystem { name: name.into(), vars, params: BTreeMap::new(), field })
    }

    pub fn from_polys(name: impl Into<String>, vars: Vec<String>, field: Vec<Poly>) -> Result<Self> {
        Self::new(name, vars, field.into_iter().map(Rf::from_poly).collect())
    }

    /// Polynomial system with default variable names `x1..xn`.
    pub fn polynomial(field: Vec<Poly>) -> Result<Self> {
        let n = field.len();
        Self::from_polys("anonymous", crate::polycore::default_names(n), field)
    }

    pub fn with_params(mut self, params: BTreeMap<String, BigRational>) -> Self {
        self.params = params;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn params(&self) -> &BTreeMap<String, BigRational> {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn field(&self) -> &[Rf] {
        &self.field
    }

    pub fn is_polynomial(&self) -> bool {
        self.field.iter().all(|f| f.as_polynomial().is_some())
    }

    pub fn polynomial_field(&self) -> Option<Vec<Poly>> {
        self.field.iter().map(Rf::as_polynomial).collect()
    }

    /// Fails with `NotQuadratic` unless every component is a polynomial of
    /// degree at most two.
    pub fn quadratic_field(&self) -> Result<Vec<Poly>> {
        let mut out = Vec::with_capacity(self.dim());
        for (i, f) in self.field.iter().enumerate() {
            let p = f.as_polynomial().ok_or(Error::NotQuadratic { component: i, degree: u32::MAX })?;
            if p.degree() > 2 {
                return Err(Error::NotQuadratic { component: i, degree: p.degree() });
            }
            out.push(p);
        }
        Ok(out)
    }

    pub fn is_quadratic(&self) -> bool {
        self.quadratic_field().is_ok()
    }

    /// Exact Jacobian `∂f_i/∂x_j`.
    pub fn jacobian(&self) -> Vec<Vec<Rf>> {
        self.field.iter().map(Rf::grad).collect()
    }

    pub fn compile<F: Scalar>(&self) -> CompiledSystem<F> {
        CompiledSystem {
            n: self.dim(),
            f: self.field.iter().map(CompiledRatFun::new).collect(),
            jac: self.jacobian().iter().flatten().map(CompiledRatFun::new).collect(),
        }
    }

    pub fn eval<F: Scalar>(&self, x: &[F]) -> Result<Vec<F>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        self.field.iter().map(|f| f.eval(x)).collect()
    }

    pub fn render(&self) -> Vec<String> {
        self.field.iter().map(|f| f.render(&self.vars)).collect()
    }
}

/// Vector field and Jacobian with coefficients converted to `F`.
#[derive(Clone, Debug)]
pub struct CompiledSystem<F> {
    n: usize,
    f: Vec<CompiledRatFun<F>>,
    jac: Vec<CompiledRatFun<F>>,
}

impl<F: Scalar> CompiledSystem<F> {
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn eval_into(&self, x: &[F], out: &mut [F]) -> Result<()> {
        for (o, f) in out.iter_mut().zip(&self.f) {
            *o = f.eval(x)?;
        }
        Ok(())
    }

    pub fn eval(&self, x: &[F]) -> Result<Vec<F>> {
        let mut out = vec![F::zero(); self.n];
        self.eval_into(x, &mut out)?;
        Ok(out)
    }

    /// Row-major Jacobian.
    pub fn jacobian_into(&self, x: &[F], out: &mut [F]) -> Result<()> {
        for (o, j) in out.iter_mut().zip(&self.jac) {
            *o = j.eval(x)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::parse_rational;

    #[test]
    fn rational_system_evaluates_and_reports_poles() {
        let vars: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        let f = ["x - y + z", "(2*y^2 - x*z - z^2)/(y + z)", "(z^2 + z*(x + y) - y^2)/(y + z)"]
            .iter()
            .map(|s| parse_rational(s, &vars).unwrap())
            .collect();
        let sys = OdeSystem::new("ratode", vars, f).unwrap();
        assert!(!sys.is_polynomial());
        assert!(sys.quadratic_field().is_err());
        let v = sys.eval(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(v, vec![1.0, 0.0, 1.0]);
        assert!(matches!(sys.eval(&[1.0, 1.0, -1.0]), Err(Error::Pole { .. })));
        let c = sys.compile::<f64>();
        assert_eq!(c.eval(&[1.0, 1.0, 1.0]).unwrap(), v);
    }
}
