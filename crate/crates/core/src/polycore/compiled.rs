use super::polynomial::Polynomial;
use super::ratfun::RationalFunction;
use crate::error::{Error, Result};
use crate::scalar::{Field, Scalar, ToScalar};

/// A polynomial with coefficients pre-converted to `F` for fast repeated
/// evaluation.
#[derive(Clone, Debug)]
pub struct CompiledPoly<F> {
    nvars: usize,
    terms: Vec<(F, Vec<(usize, i32)>)>,
}

impl<F: Scalar> CompiledPoly<F> {
    pub fn new<C: Field + ToScalar>(p: &Polynomial<C>) -> Self {
        let terms = p
            .terms()
            .map(|(m, c)| {
                let f: Vec<(usize, i32)> = m
                    .exponents()
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| (i, e as i32))
                    .collect();
                (c.to_scalar(), f)
            })
            .collect();
        CompiledPoly { nvars: p.nvars(), terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    #[inline]
    pub fn eval(&self, x: &[F]) -> F {
        debug_assert_eq!(x.len(), self.nvars);
        let mut acc = F::zero();
        for (c, fs) in &self.terms {
            let mut t = *c;
            for &(i, e) in fs {
                t = t * if e == 1 { x[i] } else { x[i].powi(e) };
            }
            acc = acc + t;
        }
        acc
    }
}

/// Compiled rational function; a constant denominator is folded away.
#[derive(Clone, Debug)]
pub struct CompiledRatFun<F> {
    num: CompiledPoly<F>,
    den: Option<CompiledPoly<F>>,
}

impl<F: Scalar> CompiledRatFun<F> {
    pub fn new<C: Field + ToScalar>(r: &RationalFunction<C>) -> Self {
        match r.as_polynomial() {
            Some(p) => CompiledRatFun { num: CompiledPoly::new(&p), den: None },
            None => CompiledRatFun { num: CompiledPoly::new(r.num()), den: Some(CompiledPoly::new(r.den())) },
        }
    }

    pub fn from_poly<C: Field + ToScalar>(p: &Polynomial<C>) -> Self {
        CompiledRatFun { num: CompiledPoly::new(p), den: None }
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_none()
    }

    #[inline]
    pub fn eval(&self, x: &[F]) -> Result<F> {
        let n = self.num.eval(x);
        match &self.den {
            None => Ok(n),
            Some(d) => {
                let dv = d.eval(x);
                if dv == F::zero() || !dv.is_finite() {
                    return Err(Error::Pole { point: x.iter().map(|v| v.to_f64_lossy()).collect() });
                }
                Ok(n / dv)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::parse::{parse_polynomial, parse_rational};

    #[test]
    fn agrees_with_generic_eval() {
        let v: Vec<String> = ["x", "y"].iter().map(|s| s.to_string()).collect();
        let p = parse_polynomial("x^3 - 2*x*y + y^2/3 + 7", &v).unwrap();
        let c = CompiledPoly::<f64>::new(&p);
        let x = [0.7, -1.3];
        assert!((c.eval(&x) - p.eval(&x).unwrap()).abs() < 1e-14);
        let c32 = CompiledPoly::<f32>::new(&p);
        assert!((c32.eval(&[0.7f32, -1.3]) as f64 - p.eval(&x).unwrap()).abs() < 1e-5);
        let r = parse_rational("y/(x+y)", &v).unwrap();
        let cr = CompiledRatFun::<f64>::new(&r);
        assert_eq!(cr.eval(&[1.0, 1.0]).unwrap(), 0.5);
        assert!(cr.eval(&[1.0, -1.0]).is_err());
    }
}
