use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::Zero;

use super::monomial::default_names;
use super::polynomial::{CoeffFmt, Polynomial};
use super::univariate;
use crate::error::{Error, Result};
use crate::scalar::{Field, Scalar, ToScalar};

/// Quotient of two polynomials over the same ring. The denominator is never
/// the zero polynomial; no automatic gcd reduction takes place.
#[derive(Clone, PartialEq, Debug)]
pub struct RationalFunction<C = BigRational> {
    num: Polynomial<C>,
    den: Polynomial<C>,
}

impl<C: Field> RationalFunction<C> {
    pub fn new(num: Polynomial<C>, den: Polynomial<C>) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDivisor);
        }
        assert_eq!(num.nvars(), den.nvars(), "numerator and denominator rings differ");
        let mut r = RationalFunction { num, den };
        r.absorb_constant_den();
        Ok(r)
    }

    pub fn from_poly(p: Polynomial<C>) -> Self {
        let den = Polynomial::one(p.nvars());
        RationalFunction { num: p, den }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        Self::from_poly(Polynomial::constant(nvars, c))
    }

    pub fn num(&self) -> &Polynomial<C> {
        &self.num
    }

    pub fn den(&self) -> &Polynomial<C> {
        &self.den
    }

    pub fn into_parts(self) -> (Polynomial<C>, Polynomial<C>) {
        (self.num, self.den)
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The polynomial if the denominator is constant.
    pub fn as_polynomial(&self) -> Option<Polynomial<C>> {
        let d = self.den.as_constant()?;
        Some(self.num.scale(&(C::one() / d)))
    }

    fn absorb_constant_den(&mut self) {
        if let Some(d) = self.den.as_constant() {
            if d != C::one() {
                self.num = self.num.scale(&(C::one() / d));
                self.den = Polynomial::one(self.den.nvars());
            }
        }
    }

    pub fn eval_exact(&self, x: &[C]) -> Result<C> {
        let d = self.den.eval_exact(x);
        if d.is_zero() {
            return Err(Error::Pole { point: vec![] });
        }
        Ok(self.num.eval_exact(x) / d)
    }

    pub fn derivative(&self, i: usize) -> Self {
        if self.den.as_constant().is_some() {
            return Self::from_poly(self.num.derivative(i)).scaled_den(&self.den);
        }
        let n = &self.num.derivative(i) * &self.den - &self.num * &self.den.derivative(i);
        RationalFunction { num: n, den: &self.den * &self.den }
    }

    fn scaled_den(mut self, den: &Polynomial<C>) -> Self {
        self.den = den.clone();
        self.absorb_constant_den();
        self
    }

    pub fn grad(&self) -> Vec<Self> {
        (0..self.nvars()).map(|i| self.derivative(i)).collect()
    }

    /// `a/b == c/d` as rational functions (`ad == bc`).
    pub fn equivalent(&self, other: &Self) -> bool {
        &self.num * &other.den == &other.num * &self.den
    }

    /// Divides numerator and denominator by `q` when `q` divides both.
    pub fn cancel_factor(&self, q: &Polynomial<C>) -> Result<Option<Self>> {
        match (self.num.exact_div(q)?, self.den.exact_div(q)?) {
            (Some(n), Some(d)) => Ok(Some(RationalFunction::new(n, d)?)),
            _ => Ok(None),
        }
    }

    /// Simultaneous substitution of polynomials for the variables.
    pub fn compose(&self, reps: &[Polynomial<C>]) -> Result<Self> {
        RationalFunction::new(self.num.compose(reps), self.den.compose(reps))
    }

    pub fn extend(&self, new_n: usize) -> Self {
        RationalFunction { num: self.num.extend(new_n), den: self.den.extend(new_n) }
    }

    pub fn recip(&self) -> Result<Self> {
        RationalFunction::new(self.den.clone(), self.num.clone())
    }

    pub fn map_coeffs<D: Field>(&self, f: impl Fn(&C) -> D) -> RationalFunction<D> {
        RationalFunction { num: self.num.map_coeffs(&f), den: self.den.map_coeffs(&f) }
    }

    pub fn pow(&self, k: u32) -> Self {
        RationalFunction { num: self.num.pow(k), den: self.den.pow(k) }
    }
}

impl<C: Field + ToScalar> RationalFunction<C> {
    /// Floating-point value; a vanishing denominator is an error carrying
    /// the point.
    pub fn eval<F: Scalar>(&self, x: &[F]) -> Result<F> {
        let d = self.den.eval(x)?;
        if d == F::zero() {
            return Err(Error::Pole { point: x.iter().map(|v| v.to_f64_lossy()).collect() });
        }
        Ok(self.num.eval(x)? / d)
    }
}

impl RationalFunction<BigRational> {
    /// Cancels the gcd of numerator and denominator (univariate only) and
    /// makes the denominator's constant term 1 when it is non-zero.
    pub fn reduced(&self) -> Self {
        let (mut n, mut d) = (self.num.clone(), self.den.clone());
        if self.nvars() == 1 {
            let g = univariate::gcd(&univariate::dense(&n, 0), &univariate::dense(&d, 0));
            if g.len() > 1 {
                let gp = univariate::sparse(&g, 1, 0);
                n = n.exact_div(&gp).ok().flatten().unwrap_or(n);
                d = d.exact_div(&gp).ok().flatten().unwrap_or(d);
            }
        }
        let c0 = d.constant_term();
        let s = if !c0.is_zero() {
            c0
        } else {
            d.leading_term().map(|(_, c)| c.clone()).unwrap_or_else(|| BigRational::from_i64(1))
        };
        let inv = BigRational::from_i64(1) / s;
        RationalFunction { num: n.scale(&inv), den: d.scale(&inv) }
    }
}

macro_rules! rf_binop {
    ($tr:ident, $f:ident, $body:expr) => {
        impl<C: Field> $tr<&RationalFunction<C>> for &RationalFunction<C> {
            type Output = RationalFunction<C>;
            fn $f(self, rhs: &RationalFunction<C>) -> RationalFunction<C> {
                #[allow(clippy::redundant_closure_call)]
                ($body)(self, rhs)
            }
        }
        impl<C: Field> $tr<RationalFunction<C>> for RationalFunction<C> {
            type Output = RationalFunction<C>;
            fn $f(self, rhs: RationalFunction<C>) -> RationalFunction<C> {
                (&self).$f(&rhs)
            }
        }
    };
}

fn combine<C: Field>(a: &RationalFunction<C>, b: &RationalFunction<C>, sub: bool) -> RationalFunction<C> {
    let bn = if sub { -&b.num } else { b.num.clone() };
    if a.den == b.den {
        return RationalFunction { num: &a.num + &bn, den: a.den.clone() };
    }
    let mut r = RationalFunction { num: &a.num * &b.den + &bn * &a.den, den: &a.den * &b.den };
    r.absorb_constant_den();
    r
}

rf_binop!(Add, add, |a, b| combine(a, b, false));
rf_binop!(Sub, sub, |a, b| combine(a, b, true));
rf_binop!(Mul, mul, |a: &RationalFunction<C>, b: &RationalFunction<C>| {
    let mut r = RationalFunction { num: &a.num * &b.num, den: &a.den * &b.den };
    r.absorb_constant_den();
    r
});
rf_binop!(Div, div, |a: &RationalFunction<C>, b: &RationalFunction<C>| {
    assert!(!b.num.is_zero(), "division by the zero rational function");
    let mut r = RationalFunction { num: &a.num * &b.den, den: &a.den * &b.num };
    r.absorb_constant_den();
    r
});

impl<C: Field> Neg for RationalFunction<C> {
    type Output = RationalFunction<C>;
    fn neg(self) -> RationalFunction<C> {
        RationalFunction { num: -self.num, den: self.den }
    }
}

impl<C: Field + CoeffFmt> RationalFunction<C> {
    pub fn render(&self, names: &[String]) -> String {
        let n = self.num.render(names);
        if self.den.as_constant().is_some() {
            return n;
        }
        let d = self.den.render(names);
        let wrap = |s: String, p: &Polynomial<C>| if p.nterms() > 1 { format!("({s})") } else { s };
        format!("{}/{}", wrap(n, &self.num), wrap(d, &self.den))
    }
}

impl<C: Field + CoeffFmt> fmt::Display for RationalFunction<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(&default_names(self.nvars())))
    }
}
