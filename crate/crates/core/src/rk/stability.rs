use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::linalg::{lu_solve_multi, poly_det};
use crate::polycore::{Polynomial, RationalFunction};
use crate::scalar::{Field, Scalar, ToScalar};
use crate::surd::Surd;

use super::tableau::ButcherTableau;

type Rf = RationalFunction<BigRational>;

/// `R(z) = 1 + z bᵀ(I - zA)⁻¹𝟙`, computed exactly as
/// `det(I - zA + z𝟙bᵀ) / det(I - zA)` and reduced to lowest terms.
pub fn stability_function(t: &ButcherTableau) -> Rf {
    let s = t.stages();
    let z = Polynomial::<Surd>::var(1, 0);
    let one = Polynomial::<Surd>::one(1);
    let entry = |i: usize, j: usize, with_b: bool| {
        let mut e = -z.scale(&t.a()[(i, j)]);
        if i == j {
            e = e + &one;
        }
        if with_b {
            e = e + z.scale(&t.b()[j]);
        }
        e
    };
    let den: Vec<Vec<_>> = (0..s).map(|i| (0..s).map(|j| entry(i, j, false)).collect()).collect();
    let num: Vec<Vec<_>> = (0..s).map(|i| (0..s).map(|j| entry(i, j, true)).collect()).collect();
    let n = poly_det(&num).to_rational().expect("stability numerator has rational coefficients");
    let d = poly_det(&den).to_rational().expect("stability denominator has rational coefficients");
    Rf::new(n, d).expect("det(I - zA) is 1 at z = 0").reduced()
}

/// `a_i = s!(2s-i)! / ((2s)! i! (s-i)!)`, `i = 0..=s`.
pub fn diagonal_pade_coefficients(s: u32) -> Vec<BigRational> {
    let fact = |k: u32| (1..=k).fold(num_bigint::BigInt::one(), |a, v| a * v);
    (0..=s)
        .map(|i| BigRational::new(fact(s) * fact(2 * s - i), fact(2 * s) * fact(i) * fact(s - i)))
        .collect()
}

/// `P(z)/P(-z)` with `P(z) = Σ a_i z^i`.
pub fn diagonal_pade(s: u32) -> Rf {
    let a = diagonal_pade_coefficients(s);
    let p = crate::polycore::univariate::sparse(&a, 1, 0);
    let m = p.compose(&[-Polynomial::var(1, 0)]);
    Rf::new(p, m).expect("P(0) = 1")
}

/// `R(z) R(-z) = 1` as an exact identity.
pub fn is_symmetric_stability(r: &Rf) -> bool {
    let neg = [-Polynomial::var(1, 0)];
    let prod_num = r.num() * &r.num().compose(&neg);
    let prod_den = r.den() * &r.den().compose(&neg);
    prod_num == prod_den
}

/// Whether the reduced stability function is a diagonal Padé approximant
/// of `exp`.
pub fn is_diagonal_pade(t: &ButcherTableau) -> bool {
    let r = stability_function(t);
    let k = r.num().degree();
    k >= 1 && r.den().degree() == k && r.equivalent(&diagonal_pade(k))
}

/// `R(hL) = Q(hL)⁻¹ P(hL)` for a square matrix `L` (row-major, `m × m`).
pub fn matrix_stability<F: Scalar>(r: &Rf, l: &[F], m: usize, h: F) -> Result<Vec<F>> {
    assert_eq!(l.len(), m * m);
    let hl: Vec<F> = l.iter().map(|v| *v * h).collect();
    let p = matrix_poly(r.num(), &hl, m);
    let mut q = matrix_poly(r.den(), &hl, m);
    let mut x = p;
    lu_solve_multi(&mut q, m, &mut x, m)
        .map_err(|_| Error::Singular("denominator of R is singular at hL".into()))?;
    Ok(x)
}

/// Horner evaluation of a univariate polynomial at a square matrix.
fn matrix_poly<C: Field + ToScalar, F: Scalar>(p: &Polynomial<C>, a: &[F], m: usize) -> Vec<F> {
    let d = p.degree_in(0) as usize;
    let mut coeffs = vec![F::zero(); d + 1];
    for (mono, c) in p.terms() {
        coeffs[mono.exponents()[0] as usize] = c.to_scalar();
    }
    let mut acc = vec![F::zero(); m * m];
    for k in (0..=d).rev() {
        let mut next = vec![F::zero(); m * m];
        for i in 0..m {
            for j in 0..m {
                let mut s = F::zero();
                for t in 0..m {
                    s = s + acc[i * m + t] * a[t * m + j];
                }
                next[i * m + j] = s;
            }
            next[i * m + i] = next[i * m + i] + coeffs[k];
        }
        acc = next;
    }
    acc
}
