//! Affine Darboux polynomials with constant cofactor.
//!
//! Write `f = c0 + A x + Σ_k v_k m_k(x)` with non-affine monomials `m_k`.
//! A form `αᵀx + α0` has constant cofactor `λ` iff `αᵀv_k = 0` for all `k`,
//! `Aᵀα = λα` and `αᵀc0 = λα0`. The admissible `α` are the eigenvectors of
//! `Aᵀ` inside the left null space of `V = [v_k]`.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::linalg::Matrix;
use crate::polycore::univariate::{self, Dense};
use crate::polycore::{AffineForm, Monomial, Polynomial};
use crate::rk::OdeSystem;
use crate::scalar::{rationalize, ToScalar};
use crate::surd::Surd;

type Poly = Polynomial<BigRational>;

/// Coefficients of a detected form.
#[derive(Clone, Debug, PartialEq)]
pub enum DpValue {
    /// Exact, in `Q` or a quadratic extension `Q(√d)`.
    Exact { alpha: Vec<Surd>, alpha0: Surd, lambda: Surd },
    /// Certified numerically; used only when the eigenvalue's minimal
    /// polynomial has degree three or more.
    Numeric { alpha: Vec<Complex64>, alpha0: Complex64, lambda: Complex64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstantDp {
    pub value: DpValue,
    /// Degree of the minimal polynomial of `λ` over `Q`.
    pub minpoly_degree: usize,
}

impl ConstantDp {
    pub fn lambda_complex(&self) -> Complex64 {
        match &self.value {
            DpValue::Exact { lambda, .. } => lambda.to_complex(),
            DpValue::Numeric { lambda, .. } => *lambda,
        }
    }

    pub fn alpha_complex(&self) -> Vec<Complex64> {
        match &self.value {
            DpValue::Exact { alpha, .. } => alpha.iter().map(Surd::to_complex).collect(),
            DpValue::Numeric { alpha, .. } => alpha.clone(),
        }
    }

    pub fn alpha0_complex(&self) -> Complex64 {
        match &self.value {
            DpValue::Exact { alpha0, .. } => alpha0.to_complex(),
            DpValue::Numeric { alpha0, .. } => *alpha0,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.value, DpValue::Exact { .. })
    }

    /// The form itself when all coefficients and `λ` are rational.
    pub fn rational(&self) -> Option<(AffineForm, BigRational)> {
        match &self.value {
            DpValue::Exact { alpha, alpha0, lambda } => {
                let a: Option<Vec<BigRational>> = alpha.iter().map(|s| s.as_rational().cloned()).collect();
                Some((AffineForm::new(a?, alpha0.as_rational()?.clone()), lambda.as_rational()?.clone()))
            }
            DpValue::Numeric { .. } => None,
        }
    }

    /// Rational forms spanning the same space as the form and its
    /// conjugate: one form for a rational DP, otherwise the two parts
    /// `α = u + √d·v`.
    pub fn real_forms(&self) -> Option<Vec<AffineForm>> {
        let DpValue::Exact { alpha, alpha0, .. } = &self.value else {
            return None;
        };
        let u = AffineForm::new(alpha.iter().map(|s| s.real_part().clone()).collect(), alpha0.real_part().clone());
        let v = AffineForm::new(alpha.iter().map(|s| s.surd_part().clone()).collect(), alpha0.surd_part().clone());
        Some(if v.is_zero() { vec![u] } else { vec![u, v] })
    }

    /// Exact check of `αᵀf - λ(αᵀx + α0) ≡ 0`, or the numeric residual
    /// bound `1e-10 · max|α|` for numeric entries.
    pub fn verify(&self, field: &[Poly]) -> bool {
        match &self.value {
            DpValue::Exact { alpha, alpha0, lambda } => {
                let n = alpha.len();
                let mut acc = Polynomial::<Surd>::zero(n);
                for (a, f) in alpha.iter().zip(field) {
                    acc = acc + f.to_surd().scale(a);
                }
                let p = Polynomial::<Surd>::affine(alpha, alpha0.clone());
                (acc - p.scale(lambda)).is_zero()
            }
            DpValue::Numeric { alpha, alpha0, lambda } => numeric_residual(field, alpha, *alpha0, *lambda)
                <= 1e-10 * alpha.iter().fold(0.0f64, |m, a| m.max(a.norm())),
        }
    }
}

fn numeric_residual(field: &[Poly], alpha: &[Complex64], alpha0: Complex64, lambda: Complex64) -> f64 {
    let n = alpha.len();
    let mut coeffs: std::collections::BTreeMap<Monomial, Complex64> = Default::default();
    for (a, f) in alpha.iter().zip(field) {
        for (m, c) in f.terms() {
            *coeffs.entry(m.clone()).or_default() += a * c.to_scalar::<f64>();
        }
    }
    for (i, a) in alpha.iter().enumerate() {
        *coeffs.entry(Monomial::var(n, i)).or_default() -= lambda * a;
    }
    *coeffs.entry(Monomial::one(n)).or_default() -= lambda * alpha0;
    coeffs.values().fold(0.0, |m, c| m.max(c.norm()))
}

/// Affine part and non-affine coefficient vectors of a polynomial field.
pub struct Splitting {
    pub c0: Vec<BigRational>,
    /// `a[i][j]` = coefficient of `x_j` in `f_i`.
    pub a: Matrix<BigRational>,
    /// Columns `v_k`, one per non-affine monomial.
    pub v: Matrix<BigRational>,
}

pub fn split_field(field: &[Poly]) -> Splitting {
    let n = field.len();
    let c0 = field.iter().map(Poly::constant_term).collect();
    let a = Matrix::from_fn(n, n, |i, j| field[i].coeff(&Monomial::var(n, j)));
    let mut monos: Vec<Monomial> = field
        .iter()
        .flat_map(|f| f.terms().map(|(m, _)| m.clone()))
        .filter(|m| m.degree() >= 2)
        .collect();
    monos.sort();
    monos.dedup();
    let v = Matrix::from_rows((0..n).map(|i| monos.iter().map(|m| field[i].coeff(m)).collect()).collect());
    Splitting { c0, a, v }
}

/// Largest `Aᵀ`-invariant subspace of the left null space of `V`, as the
/// columns of an `n × d` matrix.
fn invariant_subspace(s: &Splitting, n: usize) -> Matrix<BigRational> {
    let null = if s.v.ncols() == 0 { Matrix::identity(n).to_rows() } else { s.v.left_nullspace() };
    if null.is_empty() {
        return Matrix::zeros(n, 0);
    }
    let mut b = Matrix::from_rows(null).transpose();
    let at = s.a.transpose();
    loop {
        let d = b.ncols();
        if d == 0 {
            return b;
        }
        // {c : Aᵀ B c ∈ span B}: null space of [AᵀB, -B], first d components.
        let atb = &at * &b;
        let stacked = Matrix::from_fn(n, 2 * d, |i, j| if j < d { atb[(i, j)].clone() } else { -b[(i, j - d)].clone() });
        let cs: Vec<Vec<BigRational>> = stacked.nullspace().into_iter().map(|v| v[..d].to_vec()).collect();
        let cmat = if cs.is_empty() { Matrix::zeros(0, d) } else { Matrix::from_rows(cs).row_space() };
        if cmat.nrows() == d {
            return b;
        }
        if cmat.nrows() == 0 {
            return Matrix::zeros(n, 0);
        }
        b = &b * &cmat.transpose();
    }
}

/// Exact eigenvalues found from a characteristic polynomial: rational
/// roots, roots of rational quadratic factors, and numeric leftovers.
#[derive(Debug, Default)]
pub struct EigenSplit {
    pub exact: Vec<(Surd, usize)>,
    pub numeric: Vec<Complex64>,
}

pub fn split_eigenvalues(charpoly: &Dense) -> EigenSplit {
    let mut out = EigenSplit::default();
    let mut sf = univariate::squarefree(charpoly);
    // rational roots
    'outer: loop {
        if univariate::degree(&sf) == 0 {
            return out;
        }
        for z in univariate::roots(&sf) {
            if z.im.abs() > 1e-7 * (1.0 + z.re.abs()) {
                continue;
            }
            if let Some(q) = rationalize(z.re, 1_000_000) {
                if univariate::eval(&sf, &q).is_zero() {
                    out.exact.push((Surd::rational(q.clone()), 1));
                    sf = univariate::div_rem(&sf, &[-q, BigRational::one()]).0;
                    continue 'outer;
                }
            }
        }
        break;
    }
    // quadratic factors t^2 - s t + p
    'quad: loop {
        if univariate::degree(&sf) < 2 {
            break;
        }
        let r = univariate::roots(&sf);
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for i in 0..r.len() {
            for j in i + 1..r.len() {
                pairs.push((i, j));
            }
        }
        // conjugate pairs first
        pairs.sort_by(|&(a, b), &(c, d)| {
            let ka = (r[a] - r[b].conj()).norm();
            let kc = (r[c] - r[d].conj()).norm();
            ka.partial_cmp(&kc).unwrap_or(Ordering::Equal)
        });
        for (i, j) in pairs {
            let s = r[i] + r[j];
            let p = r[i] * r[j];
            if s.im.abs() > 1e-7 * (1.0 + s.norm()) || p.im.abs() > 1e-7 * (1.0 + p.norm()) {
                continue;
            }
            let (Some(sq), Some(pq)) = (rationalize(s.re, 1_000_000), rationalize(p.re, 1_000_000)) else {
                continue;
            };
            let quad = vec![pq.clone(), -sq.clone(), BigRational::one()];
            let (qq, rem) = univariate::div_rem(&sf, &quad);
            if univariate::is_zero(&rem) {
                let half = BigRational::new(1.into(), 2.into());
                let disc = &sq * &sq - BigRational::from_integer(4.into()) * &pq;
                let root = Surd::sqrt_of(&disc) * Surd::rational(half.clone());
                let mid = Surd::rational(sq * half);
                out.exact.push((mid.clone() + root.clone(), 2));
                out.exact.push((mid - root, 2));
                sf = qq;
                continue 'quad;
            }
        }
        break;
    }
    if univariate::degree(&sf) > 0 {
        out.numeric = univariate::roots(&sf);
    }
    out
}

/// All affine Darboux polynomials with constant cofactor of a polynomial
/// field (one per eigenvector in a basis of each eigenspace), ordered by
/// minimal-polynomial degree of `λ`, then lexicographically by `α`.
pub fn find_constant_cofactor_dps_field(field: &[Poly]) -> Vec<ConstantDp> {
    let n = field.len();
    if n == 0 {
        return vec![];
    }
    let s = split_field(field);
    let b = invariant_subspace(&s, n);
    let d = b.ncols();
    if d == 0 {
        return vec![];
    }
    // Aᵀ B = B M
    let atb = &s.a.transpose() * &b;
    let m = Matrix::from_fn(d, d, |_, _| BigRational::zero());
    let mut m = m;
    for j in 0..d {
        let col = b.solve(&atb.col(j)).expect("subspace is invariant");
        for i in 0..d {
            m[(i, j)] = col[i].clone();
        }
    }
    let eig = split_eigenvalues(&m.charpoly());
    let bs = b.map(|c| Surd::rational(c.clone()));
    let c0s: Vec<Surd> = s.c0.iter().cloned().map(Surd::rational).collect();
    let mut out = Vec::new();
    for (lambda, deg) in eig.exact {
        let ms = Matrix::from_fn(d, d, |i, j| {
            let v = Surd::rational(m[(i, j)].clone());
            if i == j { v - lambda.clone() } else { v }
        });
        for y in ms.nullspace() {
            let alpha = normalize(bs.mul_vec(&y));
            let ac0 = alpha.iter().zip(&c0s).fold(Surd::zero(), |acc, (a, c)| acc + a.clone() * c.clone());
            let alpha0 = if lambda.is_zero() {
                if !ac0.is_zero() {
                    continue;
                }
                Surd::zero()
            } else {
                ac0 / lambda.clone()
            };
            out.push(ConstantDp { value: DpValue::Exact { alpha, alpha0, lambda: lambda.clone() }, minpoly_degree: deg });
        }
    }
    for lambda in eig.numeric {
        if let Some(dp) = numeric_dp(&m, &b, &s.c0, lambda, field) {
            out.push(dp);
        }
    }
    out.sort_by(|a, b| a.minpoly_degree.cmp(&b.minpoly_degree).then_with(|| lex_alpha(a, b)));
    out
}

pub fn find_constant_cofactor_dps(sys: &OdeSystem) -> Vec<ConstantDp> {
    match sys.polynomial_field() {
        Some(f) => find_constant_cofactor_dps_field(&f),
        None => vec![],
    }
}

fn lex_alpha(a: &ConstantDp, b: &ConstantDp) -> Ordering {
    match (&a.value, &b.value) {
        (DpValue::Exact { alpha: x, .. }, DpValue::Exact { alpha: y, .. }) => {
            for (p, q) in x.iter().zip(y) {
                let o = p.real_part().cmp(q.real_part()).then_with(|| p.surd_part().cmp(q.surd_part()));
                if o != Ordering::Equal {
                    return o;
                }
            }
            Ordering::Equal
        }
        (DpValue::Exact { .. }, DpValue::Numeric { .. }) => Ordering::Less,
        (DpValue::Numeric { .. }, DpValue::Exact { .. }) => Ordering::Greater,
        _ => Ordering::Equal,
    }
}

/// Scales so the first non-zero entry is 1; rational vectors are then
/// cleared to primitive integers.
fn normalize(alpha: Vec<Surd>) -> Vec<Surd> {
    let Some(first) = alpha.iter().find(|a| !a.is_zero()).cloned() else {
        return alpha;
    };
    let v: Vec<Surd> = alpha.into_iter().map(|a| a / first.clone()).collect();
    if v.iter().all(Surd::is_rational) {
        let p = Poly::affine(
            &v.iter().map(|s| s.real_part().clone()).collect::<Vec<_>>(),
            BigRational::zero(),
        )
        .primitive();
        let mut lin = p.linear_coeffs();
        if let Some(f) = lin.iter().find(|c| !c.is_zero()) {
            if f.is_negative() {
                lin = lin.into_iter().map(|c| -c).collect();
            }
        }
        return lin.into_iter().map(Surd::rational).collect();
    }
    v
}

fn numeric_dp(
    m: &Matrix<BigRational>,
    b: &Matrix<BigRational>,
    c0: &[BigRational],
    lambda: Complex64,
    field: &[Poly],
) -> Option<ConstantDp> {
    let d = m.nrows();
    let n = b.nrows();
    let mm = DMatrix::<Complex64>::from_fn(d, d, |i, j| {
        let v = Complex64::new(m[(i, j)].to_f64().unwrap_or(f64::NAN), 0.0);
        if i == j { v - lambda } else { v }
    });
    let svd = mm.svd(false, true);
    let vt = svd.v_t?;
    let k = (0..d).min_by(|&a, &bb| svd.singular_values[a].total_cmp(&svd.singular_values[bb]))?;
    let y: Vec<Complex64> = (0..d).map(|j| vt[(k, j)].conj()).collect();
    let mut alpha: Vec<Complex64> = (0..n)
        .map(|i| (0..d).map(|j| y[j] * b[(i, j)].to_f64().unwrap_or(f64::NAN)).sum())
        .collect();
    let first = *alpha.iter().find(|a| a.norm() > 1e-12)?;
    for a in alpha.iter_mut() {
        *a /= first;
    }
    let ac0: Complex64 = alpha.iter().zip(c0).map(|(a, c)| a * c.to_f64().unwrap_or(f64::NAN)).sum();
    let alpha0 = if lambda.norm() > 1e-14 { ac0 / lambda } else { Complex64::zero() };
    let dp = ConstantDp { value: DpValue::Numeric { alpha, alpha0, lambda }, minpoly_degree: 3 };
    dp.verify(field).then_some(dp)
}
