//! Dense univariate helpers over the rationals: gcd, square-free part and
//! numeric roots. Coefficients are stored lowest degree first.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::monomial::Monomial;
use super::polynomial::Polynomial;

pub type Dense = Vec<BigRational>;

/// Dense coefficients of `p` in variable `var`. Panics if another variable
/// occurs.
pub fn dense(p: &Polynomial<BigRational>, var: usize) -> Dense {
    let mut out = vec![BigRational::zero(); p.degree_in(var) as usize + 1];
    for (m, c) in p.terms() {
        let e = m.exponents();
        assert!(
            e.iter().enumerate().all(|(i, &k)| i == var || k == 0),
            "polynomial is not univariate in x{}",
            var + 1
        );
        out[e[var] as usize] = c.clone();
    }
    trim(out)
}

pub fn sparse(d: &[BigRational], nvars: usize, var: usize) -> Polynomial<BigRational> {
    let mut p = Polynomial::zero(nvars);
    for (k, c) in d.iter().enumerate() {
        let mut e = vec![0; nvars];
        e[var] = k as u32;
        p = p + Polynomial::monomial(Monomial::from_exponents(e), c.clone());
    }
    p
}

fn trim(mut v: Dense) -> Dense {
    while v.len() > 1 && v.last().is_some_and(Zero::is_zero) {
        v.pop();
    }
    if v.is_empty() {
        v.push(BigRational::zero());
    }
    v
}

pub fn is_zero(a: &[BigRational]) -> bool {
    a.iter().all(Zero::is_zero)
}

pub fn degree(a: &[BigRational]) -> usize {
    trim(a.to_vec()).len() - 1
}

pub fn derivative(a: &[BigRational]) -> Dense {
    if a.len() <= 1 {
        return vec![BigRational::zero()];
    }
    trim(
        a.iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * BigRational::from_integer((k as i64).into()))
            .collect(),
    )
}

pub fn div_rem(a: &[BigRational], b: &[BigRational]) -> (Dense, Dense) {
    let b = trim(b.to_vec());
    assert!(!is_zero(&b), "univariate division by zero");
    let mut r = trim(a.to_vec());
    let db = b.len() - 1;
    if r.len() - 1 < db || is_zero(&r) {
        return (vec![BigRational::zero()], r);
    }
    let mut q = vec![BigRational::zero(); r.len() - db];
    let lb = b[db].clone();
    while !is_zero(&r) && r.len() > db {
        let k = r.len() - 1 - db;
        let c = r.last().unwrap() / &lb;
        for (i, bi) in b.iter().enumerate() {
            r[k + i] -= &c * bi;
        }
        q[k] = c;
        r.pop();
        r = trim(r);
        if r.len() - 1 < db {
            break;
        }
    }
    (trim(q), r)
}

/// Monic greatest common divisor.
pub fn gcd(a: &[BigRational], b: &[BigRational]) -> Dense {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !is_zero(&b) {
        let (_, r) = div_rem(&a, &b);
        a = b;
        b = r;
    }
    if is_zero(&a) {
        return a;
    }
    let lc = a.last().unwrap().clone();
    a.into_iter().map(|c| c / &lc).collect()
}

/// `a / gcd(a, a')`: same roots, each simple.
pub fn squarefree(a: &[BigRational]) -> Dense {
    let a = trim(a.to_vec());
    if degree(&a) == 0 {
        return a;
    }
    let g = gcd(&a, &derivative(&a));
    div_rem(&a, &g).0
}

pub fn eval(a: &[BigRational], x: &BigRational) -> BigRational {
    a.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
}

/// Eigenvalues by a capped Schur iteration. Unshifted QR can cycle on
/// companion matrices with symmetric spectra (e.g. roots `±2 ± i`), so a
/// failed attempt is retried on `M + σI` for a few irrational shifts.
fn companion_eigenvalues(m: &DMatrix<f64>) -> Vec<Complex64> {
    let n = m.nrows();
    let scale = 1.0 + m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    for sigma in [0.0, 0.618_033_988_749_894_9, -std::f64::consts::SQRT_2, std::f64::consts::E] {
        let shifted = m + DMatrix::<f64>::identity(n, n) * (sigma * scale);
        if let Some(s) = Schur::try_new(shifted, f64::EPSILON, 20_000) {
            return s.complex_eigenvalues().iter().map(|z| z - sigma * scale).collect();
        }
    }
    vec![Complex64::new(f64::NAN, f64::NAN); n]
}

/// All complex roots via the eigenvalues of the companion matrix.
pub fn roots(a: &[BigRational]) -> Vec<Complex64> {
    let f: Vec<f64> = trim(a.to_vec()).iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
    roots_f64(&f)
}

pub fn roots_f64(a: &[f64]) -> Vec<Complex64> {
    let mut a = a.to_vec();
    while a.len() > 1 && *a.last().unwrap() == 0.0 {
        a.pop();
    }
    let n = a.len().saturating_sub(1);
    if n == 0 {
        return vec![];
    }
    let lead = a[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -a[i] / lead;
    }
    let mut r = companion_eigenvalues(&m);
    // one Newton polish per root
    for z in r.iter_mut() {
        let (mut p, mut dp) = (Complex64::zero(), Complex64::zero());
        for &c in a.iter().rev() {
            dp = dp * *z + p;
            p = p * *z + c;
        }
        if dp.norm() > 0.0 {
            let step = p / dp;
            if step.norm() < 1e-3 * (1.0 + z.norm()) {
                *z -= step;
            }
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_int;

    fn d(v: &[i64]) -> Dense {
        v.iter().map(|&c| rat_int(c)).collect()
    }

    #[test]
    fn gcd_and_squarefree() {
        // (x-1)^2 (x+2) = x^3 - 3x + 2
        let a = d(&[2, -3, 0, 1]);
        assert_eq!(gcd(&a, &derivative(&a)), d(&[-1, 1]));
        assert_eq!(squarefree(&a), d(&[-2, 1, 1]));
        let (q, r) = div_rem(&a, &d(&[-1, 1]));
        assert!(is_zero(&r));
        assert_eq!(q, d(&[-2, 1, 1]));
    }

    #[test]
    fn companion_roots() {
        let mut r: Vec<f64> = roots(&d(&[-2, 1, 1])).iter().map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        assert!((r[0] + 2.0).abs() < 1e-12 && (r[1] - 1.0).abs() < 1e-12);
        let c = roots(&d(&[5, -4, 1]));
        assert!(c.iter().all(|z| (z.re - 2.0).abs() < 1e-12 && (z.im.abs() - 1.0).abs() < 1e-12));
    }
}
