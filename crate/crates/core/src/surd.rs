//! Exact arithmetic in a quadratic extension `Q(√d)`.
//!
//! Used where the rationals are not enough but a single square root is:
//! the two-stage Gauss-Legendre tableau (`√3`) and eigenvalues with a
//! quadratic minimal polynomial such as `2 + i`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::scalar::{Field, Scalar, ToScalar};

/// `a + b·√d` with rational `a`, `b` and a square-free integer `d`.
///
/// Elements with `b = 0` are plain rationals and store `d = 0`, so they mix
/// freely with any extension. Combining two genuinely irrational elements
/// from different extensions panics.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Surd {
    a: BigRational,
    b: BigRational,
    d: BigInt,
}

impl Surd {
    pub fn rational(a: BigRational) -> Self {
        Surd { a, b: BigRational::zero(), d: BigInt::zero() }
    }

    /// `a + b√d`; `d` is reduced to its square-free part.
    pub fn new(a: BigRational, b: BigRational, d: BigInt) -> Self {
        if b.is_zero() || d.is_zero() {
            return Surd::rational(a);
        }
        let (k, core) = square_free(&d);
        if core.is_one() {
            return Surd::rational(a + b * BigRational::from_integer(k));
        }
        Surd { a, b: b * BigRational::from_integer(k), d: core }
    }

    /// `√q` for a rational `q`.
    pub fn sqrt_of(q: &BigRational) -> Self {
        // √(n/m) = √(n·m)/m
        let n = q.numer() * q.denom();
        Surd::new(
            BigRational::zero(),
            BigRational::new(BigInt::one(), q.denom().clone()),
            n,
        )
    }

    pub fn real_part(&self) -> &BigRational {
        &self.a
    }

    pub fn surd_part(&self) -> &BigRational {
        &self.b
    }

    pub fn radicand(&self) -> &BigInt {
        &self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.a)
    }

    pub fn conj(&self) -> Self {
        Surd { a: self.a.clone(), b: -self.b.clone(), d: self.d.clone() }
    }

    pub fn to_complex(&self) -> Complex64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        if self.b.is_zero() {
            return Complex64::new(a, 0.0);
        }
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        let d = self.d.to_f64().unwrap_or(f64::NAN);
        if d < 0.0 {
            Complex64::new(a, b * (-d).sqrt())
        } else {
            Complex64::new(a + b * d.sqrt(), 0.0)
        }
    }

    pub fn is_real(&self) -> bool {
        self.b.is_zero() || self.d.is_positive()
    }

    fn merge_radicand(&self, other: &Self) -> BigInt {
        match (self.b.is_zero(), other.b.is_zero()) {
            (true, _) => other.d.clone(),
            (_, true) => self.d.clone(),
            _ => {
                assert_eq!(self.d, other.d, "mixing elements of different quadratic fields");
                self.d.clone()
            }
        }
    }

    fn normalized(a: BigRational, b: BigRational, d: BigInt) -> Self {
        if b.is_zero() {
            Surd::rational(a)
        } else {
            Surd { a, b, d }
        }
    }
}

/// Splits `n = k²·core` with `core` square-free (trial division; exact for
/// the small integers this crate produces, otherwise leaves a square factor
/// in `core`, which is harmless).
fn square_free(n: &BigInt) -> (BigInt, BigInt) {
    let sign = if n.is_negative() { -BigInt::one() } else { BigInt::one() };
    let mut m = n.abs();
    let mut k = BigInt::one();
    let mut p = BigInt::from(2);
    let limit = BigInt::from(100_000);
    while &p * &p <= m && p <= limit {
        let pp = &p * &p;
        while (&m % &pp).is_zero() {
            m /= &pp;
            k *= &p;
        }
        p += if p == BigInt::from(2) { BigInt::one() } else { BigInt::from(2) };
    }
    let _ = m.is_even();
    (k, sign * m)
}

impl Zero for Surd {
    fn zero() -> Self {
        Surd::rational(BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

impl One for Surd {
    fn one() -> Self {
        Surd::rational(BigRational::one())
    }
}

impl Add for Surd {
    type Output = Surd;
    fn add(self, rhs: Surd) -> Surd {
        let d = self.merge_radicand(&rhs);
        Surd::normalized(self.a + rhs.a, self.b + rhs.b, d)
    }
}

impl Sub for Surd {
    type Output = Surd;
    fn sub(self, rhs: Surd) -> Surd {
        let d = self.merge_radicand(&rhs);
        Surd::normalized(self.a - rhs.a, self.b - rhs.b, d)
    }
}

impl Mul for Surd {
    type Output = Surd;
    fn mul(self, rhs: Surd) -> Surd {
        let d = self.merge_radicand(&rhs);
        let dd = BigRational::from_integer(d.clone());
        let a = &self.a * &rhs.a + &self.b * &rhs.b * dd;
        let b = &self.a * &rhs.b + &self.b * &rhs.a;
        Surd::normalized(a, b, d)
    }
}

impl Div for Surd {
    type Output = Surd;
    fn div(self, rhs: Surd) -> Surd {
        assert!(!rhs.is_zero(), "division by zero in Q(√d)");
        if rhs.b.is_zero() {
            let inv = rhs.a.recip();
            return Surd::normalized(self.a * &inv, self.b * inv, self.d);
        }
        let dd = BigRational::from_integer(rhs.d.clone());
        let norm = &rhs.a * &rhs.a - &rhs.b * &rhs.b * dd;
        let num = self * rhs.conj();
        Surd::normalized(num.a / &norm, num.b / norm, num.d)
    }
}

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd { a: -self.a, b: -self.b, d: self.d }
    }
}

impl Field for Surd {
    fn from_i64(v: i64) -> Self {
        Surd::rational(BigRational::from_integer(BigInt::from(v)))
    }
}

impl ToScalar for Surd {
    /// Real value; the imaginary part of a complex surd is dropped.
    fn to_scalar<F: Scalar>(&self) -> F {
        F::lit(self.to_complex().re)
    }
}

impl From<BigRational> for Surd {
    fn from(a: BigRational) -> Self {
        Surd::rational(a)
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let root = if self.d == -BigInt::one() { "i".to_string() } else { format!("√({})", self.d) };
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => write!(f, "{}", self.a),
            (true, false) => {
                if self.b.is_one() {
                    write!(f, "{root}")
                } else if (-self.b.clone()).is_one() {
                    write!(f, "-{root}")
                } else {
                    write!(f, "{}{root}", self.b)
                }
            }
            (false, false) => {
                let mag = self.b.abs();
                let sign = if self.b.is_negative() { '-' } else { '+' };
                if mag.is_one() {
                    write!(f, "{} {sign} {root}", self.a)
                } else {
                    write!(f, "{} {sign} {mag}{root}", self.a)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};

    #[test]
    fn square_root_reduction() {
        let s = Surd::sqrt_of(&rat_int(12));
        assert_eq!(s.surd_part(), &rat_int(2));
        assert_eq!(s.radicand(), &BigInt::from(3));
        assert!(Surd::sqrt_of(&rat(9, 4)).is_rational());
        assert_eq!(Surd::sqrt_of(&rat(9, 4)), Surd::rational(rat(3, 2)));
    }

    #[test]
    fn gaussian_arithmetic() {
        let i = Surd::sqrt_of(&rat_int(-1));
        let lam = Surd::rational(rat_int(2)) + i.clone();
        // (2+i)(2-i) = 5
        assert_eq!(lam.clone() * lam.conj(), Surd::rational(rat_int(5)));
        assert_eq!(i.clone() * i.clone(), Surd::rational(rat_int(-1)));
        let q = Surd::one() / lam.clone();
        assert_eq!(q * lam, Surd::one());
        assert_eq!(format!("{}", Surd::rational(rat_int(2)) + i), "2 + i");
    }

    #[test]
    fn complex_value() {
        let s = Surd::new(rat_int(2), rat_int(1), BigInt::from(-4));
        let c = s.to_complex();
        assert!((c.re - 2.0).abs() < 1e-15 && (c.im - 2.0).abs() < 1e-15);
    }
}
