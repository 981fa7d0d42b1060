use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::monomial::{default_names, Monomial};
use crate::error::{Error, Result};
use crate::scalar::{Field, Scalar, ToScalar};
use crate::surd::Surd;

/// Sparse multivariate polynomial in `nvars` variables with coefficients
/// in a field `C` (exact rationals by default).
///
/// Zero coefficients are never stored, so structural equality is equality
/// of polynomials.
#[derive(Clone, PartialEq, Debug)]
pub struct Polynomial<C = BigRational> {
    nvars: usize,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Field> Polynomial<C> {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, C::one())
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        Self::monomial(Monomial::one(nvars), c)
    }

    /// The coordinate polynomial `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index {i} out of range for {nvars} variables");
        Self::monomial(Monomial::var(nvars, i), C::one())
    }

    pub fn monomial(m: Monomial, c: C) -> Self {
        let mut p = Self::zero(m.nvars());
        p.add_term(m, c);
        p
    }

    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, C)>,
    {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            p.add_term(Monomial(e), c);
        }
        p
    }

    /// `Σ alpha_i x_i + alpha0`.
    pub fn affine(alpha: &[C], alpha0: C) -> Self {
        let n = alpha.len();
        let mut p = Self::constant(n, alpha0);
        for (i, a) in alpha.iter().enumerate() {
            p.add_term(Monomial::var(n, i), a.clone());
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &C)> + '_ {
        self.terms.iter()
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&Monomial::one(self.nvars))
    }

    /// `Some(c)` if the polynomial is the constant `c`.
    pub fn as_constant(&self) -> Option<C> {
        match self.terms.len() {
            0 => Some(C::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.0[i]).max().unwrap_or(0)
    }

    pub fn mentions(&self, i: usize) -> bool {
        self.terms.keys().any(|m| m.0[i] > 0)
    }

    /// Leading term under graded lexicographic order.
    pub fn leading_term(&self) -> Option<(&Monomial, &C)> {
        self.terms.iter().next_back()
    }

    /// Linear coefficients `(∂p/∂x_i)(0)`.
    pub fn linear_coeffs(&self) -> Vec<C> {
        (0..self.nvars).map(|i| self.coeff(&Monomial::var(self.nvars, i))).collect()
    }

    pub fn is_affine(&self) -> bool {
        self.degree() <= 1
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a.clone() * c.clone())).collect(),
        }
    }

    fn check_same(&self, other: &Self) {
        assert_eq!(self.nvars, other.nvars, "polynomials live in different rings");
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut nm = m.clone();
            nm.0[i] -= 1;
            out.add_term(nm, c.clone() * C::from_i64(e as i64));
        }
        out
    }

    pub fn grad(&self) -> Vec<Self> {
        (0..self.nvars).map(|i| self.derivative(i)).collect()
    }

    /// Exact evaluation in the coefficient field.
    pub fn eval_exact(&self, x: &[C]) -> C {
        assert_eq!(x.len(), self.nvars, "point dimension");
        let mut acc = C::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &e) in x.iter().zip(&m.0) {
                for _ in 0..e {
                    t = t * xi.clone();
                }
            }
            acc = acc + t;
        }
        acc
    }

    /// Replaces `x_i` by `rep`; fails if `rep` itself mentions `x_i`.
    pub fn substitute(&self, i: usize, rep: &Self) -> Result<Self> {
        self.check_same(rep);
        if rep.mentions(i) {
            return Err(Error::SelfSubstitution { var: i + 1 });
        }
        let reps: Vec<Self> = (0..self.nvars)
            .map(|j| if j == i { rep.clone() } else { Self::var(self.nvars, j) })
            .collect();
        Ok(self.compose(&reps))
    }

    /// Simultaneous substitution `x_j -> reps[j]`. The result lives in the
    /// ring of the replacements.
    pub fn compose(&self, reps: &[Self]) -> Self {
        assert_eq!(reps.len(), self.nvars, "one replacement per variable");
        let target = reps.first().map(|r| r.nvars).unwrap_or(0);
        let mut powers: Vec<Vec<Self>> = reps.iter().map(|r| vec![Self::one(r.nvars), r.clone()]).collect();
        let mut out = Self::zero(target);
        for (m, c) in &self.terms {
            let mut t = Self::constant(target, c.clone());
            for (j, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[j].len() <= e as usize {
                    let next = powers[j].last().unwrap() * &reps[j];
                    powers[j].push(next);
                }
                t = &t * &powers[j][e as usize];
            }
            out = out + t;
        }
        out
    }

    /// Embeds into a ring with `new_n >= nvars` variables by appending
    /// variables that do not occur.
    pub fn extend(&self, new_n: usize) -> Self {
        assert!(new_n >= self.nvars);
        let map: Vec<usize> = (0..self.nvars).collect();
        self.embed(new_n, &map)
    }

    /// Renames variable `i` to variable `map[i]` of a ring with `new_n`
    /// variables.
    pub fn embed(&self, new_n: usize, map: &[usize]) -> Self {
        let mut out = Self::zero(new_n);
        for (m, c) in &self.terms {
            let mut e = vec![0; new_n];
            for (i, &k) in m.0.iter().enumerate() {
                e[map[i]] += k;
            }
            out.add_term(Monomial(e), c.clone());
        }
        out
    }

    /// Drops variables that do not occur, keeping the listed ones.
    /// Panics if a dropped variable occurs.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let mut out = Self::zero(keep.len());
        for (m, c) in &self.terms {
            let e: Vec<u32> = keep.iter().map(|&k| m.0[k]).collect();
            assert_eq!(e.iter().sum::<u32>(), m.degree(), "restricted away an occurring variable");
            out.add_term(Monomial(e), c.clone());
        }
        out
    }

    pub fn map_coeffs<D: Field>(&self, f: impl Fn(&C) -> D) -> Polynomial<D> {
        let mut out = Polynomial::<D>::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    /// Coefficients of `x_i^k`, `k = 0..=deg_i`, as polynomials in the same
    /// ring (with `x_i` absent).
    pub fn coefficients_in(&self, i: usize) -> Vec<Self> {
        let d = self.degree_in(i) as usize;
        let mut out = vec![Self::zero(self.nvars); d + 1];
        for (m, c) in &self.terms {
            let k = m.0[i] as usize;
            let mut nm = m.clone();
            nm.0[i] = 0;
            out[k].add_term(nm, c.clone());
        }
        out
    }

    /// Homogeneous component of total degree `k`.
    pub fn homogeneous_part(&self, k: u32) -> Self {
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == k)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Multivariate division by a single divisor under grlex: returns
    /// `(quotient, remainder)` with no term of the remainder divisible by
    /// the leading monomial of `q`.
    pub fn div_rem(&self, q: &Self) -> Result<(Self, Self)> {
        self.check_same(q);
        let (lm, lc) = q.leading_term().ok_or(Error::ZeroDivisor)?;
        let (lm, lc) = (lm.clone(), lc.clone());
        let mut p = self.clone();
        let mut quot = Self::zero(self.nvars);
        let mut rem = Self::zero(self.nvars);
        while let Some((m, c)) = p.leading_term() {
            let (m, c) = (m.clone(), c.clone());
            match m.div(&lm) {
                Some(factor) => {
                    let coef = c / lc.clone();
                    let t = Self::monomial(factor, coef);
                    p = p - &t * q;
                    quot = quot + t;
                }
                None => {
                    p.terms.remove(&m);
                    rem.add_term(m, c);
                }
            }
        }
        Ok((quot, rem))
    }

    /// Exact quotient `self / q` when `q` divides `self`. With a single
    /// divisor the remainder is zero exactly when `q` divides.
    pub fn exact_div(&self, q: &Self) -> Result<Option<Self>> {
        let (quot, rem) = self.div_rem(q)?;
        Ok(rem.is_zero().then_some(quot))
    }

    pub fn divisible_by(&self, q: &Self) -> Result<bool> {
        Ok(self.exact_div(q)?.is_some())
    }
}

impl<C: Field + ToScalar> Polynomial<C> {
    /// Floating-point evaluation.
    pub fn eval<F: Scalar>(&self, x: &[F]) -> Result<F> {
        if x.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: x.len() });
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked<F: Scalar>(&self, x: &[F]) -> F {
        let mut acc = F::zero();
        for (m, c) in &self.terms {
            let mut t: F = c.to_scalar();
            for (xi, &e) in x.iter().zip(&m.0) {
                if e > 0 {
                    t = t * xi.powi(e as i32);
                }
            }
            acc = acc + t;
        }
        acc
    }
}

impl Polynomial<BigRational> {
    pub fn to_surd(&self) -> Polynomial<Surd> {
        self.map_coeffs(|c| Surd::rational(c.clone()))
    }

    pub fn eval_complex(&self, x: &[Complex64]) -> Complex64 {
        self.map_coeffs(|c| Complex64::new(c.to_scalar::<f64>(), 0.0)).eval_exact(x)
    }

    /// Multiplies through by the lcm of denominators and divides by the gcd
    /// of numerators, making the leading coefficient positive.
    pub fn primitive(&self) -> Self {
        use num_integer::Integer;
        let mut lcm = num_bigint::BigInt::one();
        let mut gcd = num_bigint::BigInt::zero();
        for c in self.terms.values() {
            lcm = lcm.lcm(c.denom());
            gcd = gcd.gcd(c.numer());
        }
        if gcd.is_zero() {
            return self.clone();
        }
        let mut f = BigRational::new(lcm, gcd);
        if self.leading_term().is_some_and(|(_, c)| c.is_negative()) {
            f = -f;
        }
        self.scale(&f)
    }

    /// Scales so that the leading coefficient is 1.
    pub fn monic(&self) -> Self {
        match self.leading_term() {
            Some((_, c)) => self.scale(&c.recip()),
            None => self.clone(),
        }
    }
}

impl Polynomial<Surd> {
    /// Back to rationals when every coefficient is rational.
    pub fn to_rational(&self) -> Option<Polynomial<BigRational>> {
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.as_rational()?.clone());
        }
        Some(out)
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident, $body:expr) => {
        impl<C: Field> $tr<&Polynomial<C>> for &Polynomial<C> {
            type Output = Polynomial<C>;
            fn $f(self, rhs: &Polynomial<C>) -> Polynomial<C> {
                self.check_same(rhs);
                #[allow(clippy::redundant_closure_call)]
                ($body)(self, rhs)
            }
        }
        impl<C: Field> $tr<Polynomial<C>> for Polynomial<C> {
            type Output = Polynomial<C>;
            fn $f(self, rhs: Polynomial<C>) -> Polynomial<C> {
                (&self).$f(&rhs)
            }
        }
        impl<C: Field> $tr<&Polynomial<C>> for Polynomial<C> {
            type Output = Polynomial<C>;
            fn $f(self, rhs: &Polynomial<C>) -> Polynomial<C> {
                (&self).$f(rhs)
            }
        }
        impl<C: Field> $tr<Polynomial<C>> for &Polynomial<C> {
            type Output = Polynomial<C>;
            fn $f(self, rhs: Polynomial<C>) -> Polynomial<C> {
                self.$f(&rhs)
            }
        }
    };
}

binop!(Add, add, |a: &Polynomial<C>, b: &Polynomial<C>| {
    let mut out = a.clone();
    for (m, c) in &b.terms {
        out.add_term(m.clone(), c.clone());
    }
    out
});

binop!(Sub, sub, |a: &Polynomial<C>, b: &Polynomial<C>| {
    let mut out = a.clone();
    for (m, c) in &b.terms {
        out.add_term(m.clone(), -c.clone());
    }
    out
});

binop!(Mul, mul, |a: &Polynomial<C>, b: &Polynomial<C>| {
    let mut out = Polynomial::zero(a.nvars);
    for (ma, ca) in &a.terms {
        for (mb, cb) in &b.terms {
            out.add_term(ma.mul(mb), ca.clone() * cb.clone());
        }
    }
    out
});

impl<C: Field> Neg for Polynomial<C> {
    type Output = Polynomial<C>;
    fn neg(self) -> Polynomial<C> {
        Polynomial { nvars: self.nvars, terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect() }
    }
}

impl<C: Field> Neg for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn neg(self) -> Polynomial<C> {
        -self.clone()
    }
}

/// Coefficient rendering for the polynomial grammar.
pub trait CoeffFmt {
    fn is_negative_coeff(&self) -> bool;
    /// Renders `|c| * mono` (or `|c|` when `mono` is `None`).
    fn render_abs(&self, mono: Option<&str>) -> String;
}

impl CoeffFmt for BigRational {
    fn is_negative_coeff(&self) -> bool {
        self.is_negative()
    }

    fn render_abs(&self, mono: Option<&str>) -> String {
        let a = self.abs();
        let (n, d) = (a.numer(), a.denom());
        let den = if d.is_one() { String::new() } else { format!("/{d}") };
        match mono {
            None => format!("{n}{den}"),
            Some(m) if n.is_one() => format!("{m}{den}"),
            Some(m) => format!("{n}*{m}{den}"),
        }
    }
}

impl CoeffFmt for f64 {
    fn is_negative_coeff(&self) -> bool {
        *self < 0.0
    }

    fn render_abs(&self, mono: Option<&str>) -> String {
        match mono {
            None => format!("{}", self.abs()),
            Some(m) if self.abs() == 1.0 => m.to_string(),
            Some(m) => format!("{}*{m}", self.abs()),
        }
    }
}

impl CoeffFmt for Surd {
    fn is_negative_coeff(&self) -> bool {
        self.as_rational().is_some_and(|r| r.is_negative())
    }

    fn render_abs(&self, mono: Option<&str>) -> String {
        if let Some(r) = self.as_rational() {
            return r.render_abs(mono);
        }
        match mono {
            None => format!("({self})"),
            Some(m) => format!("({self})*{m}"),
        }
    }
}

/// Display adaptor carrying variable names.
pub struct Named<'a, C> {
    poly: &'a Polynomial<C>,
    names: &'a [String],
}

impl<C: Field + CoeffFmt> Polynomial<C> {
    pub fn display<'a>(&'a self, names: &'a [String]) -> Named<'a, C> {
        assert_eq!(names.len(), self.nvars, "one name per variable");
        Named { poly: self, names }
    }

    pub fn render(&self, names: &[String]) -> String {
        self.display(names).to_string()
    }

    /// Terms in print order: ascending degree, `x1` before `x2` within a
    /// degree.
    fn print_order(&self) -> Vec<(&Monomial, &C)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| a.0.degree().cmp(&b.0.degree()).then_with(|| b.0 .0.cmp(&a.0 .0)));
        v
    }
}

impl<C: Field + CoeffFmt> fmt::Display for Named<'_, C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.poly.print_order();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in terms.into_iter().enumerate() {
            let mono = (!m.is_one()).then(|| m.render(self.names));
            let body = c.render_abs(mono.as_deref());
            match (k, c.is_negative_coeff()) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => write!(f, "{body}")?,
                (_, true) => write!(f, " - {body}")?,
                (_, false) => write!(f, " + {body}")?,
            }
        }
        Ok(())
    }
}

impl<C: Field + CoeffFmt> fmt::Display for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = default_names(self.nvars);
        write!(f, "{}", self.display(&names))
    }
}
