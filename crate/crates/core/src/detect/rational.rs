//! Rational integrals `H = Q/R` from the forward-Euler Jacobian.
//!
//! If `p` is an affine DP of forward Euler with discrete cofactor
//! `c̃ = 1 + h·c`, then `c̃` divides `det(I + h Df)`, so `h = -1/c(x)` is a
//! root of the determinant in `h`. The roots are computed at random
//! rational points, tracked as continuous branches in the variable
//! `c = -1/h`, fitted by low-degree rational functions and confirmed by
//! solving for affine forms with exactly that cofactor.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{poly_det, Matrix};
use crate::polycore::univariate;
use crate::polycore::{AffineForm, CompiledPoly, Monomial, Polynomial, RationalFunction};
use crate::rk::OdeSystem;
use crate::scalar::rationalize;

type Poly = Polynomial<BigRational>;
type Rf = RationalFunction<BigRational>;

/// Cofactor to solve for.
#[derive(Clone, Debug)]
pub enum Cofactor {
    /// `c(x)` with `∇p·f = c p`.
    Continuous(Rf),
    /// `c̃(x, h)` with `p(x + h f(x)) = c̃ p(x)`; `h` is the last variable.
    Discrete(Rf),
}

impl Cofactor {
    /// Forward-Euler cofactor `1 + h c` of a continuous one.
    pub fn forward_euler(c: &Rf) -> Self {
        let n = c.nvars();
        let h = Rf::from_poly(Poly::var(n + 1, n));
        Cofactor::Discrete(&Rf::constant(n + 1, BigRational::one()) + &(&h * &c.extend(n + 1)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CandidateSource {
    User,
    JacobianPipeline,
    Eigen,
}

#[derive(Clone, Debug)]
pub struct CofactorCandidate {
    pub c: Rf,
    pub source: CandidateSource,
}

#[derive(Clone, Debug)]
pub struct RationalIntegral {
    /// Continuous cofactor shared by all forms.
    pub cofactor: Rf,
    /// Basis of the affine DPs with that cofactor.
    pub forms: Vec<AffineForm>,
    /// `c̃^(m-1)` divides the Jacobian determinant.
    pub divisibility: bool,
}

impl RationalIntegral {
    /// `H = forms[0] / forms[1]`.
    pub fn h(&self) -> Option<Rf> {
        let (q, r) = (self.forms.first()?, self.forms.get(1)?);
        Rf::new(q.to_polynomial(), r.to_polynomial()).ok()
    }

    pub fn q(&self) -> &AffineForm {
        &self.forms[0]
    }

    pub fn r(&self) -> &AffineForm {
        &self.forms[1]
    }
}

#[derive(Clone, Debug)]
pub struct DetectOptions {
    pub seed: u64,
    pub max_num_degree: u32,
    pub max_den_degree: u32,
    /// Samples per unknown coefficient in the fit.
    pub oversample: usize,
    /// Intermediate tracking points between samples.
    pub substeps: usize,
    /// Roots closer than this cannot be told apart.
    pub collision_tol: f64,
}

impl Default for DetectOptions {
    fn default() -> Self {
        DetectOptions { seed: 0, max_num_degree: 3, max_den_degree: 3, oversample: 4, substeps: 16, collision_tol: 1e-6 }
    }
}

#[derive(Clone, Debug)]
pub struct DetectReport {
    /// `det(I + h Df)` with `h` as the last variable.
    pub det: Rf,
    pub candidates: Vec<CofactorCandidate>,
    /// Candidates with at least two independent forms.
    pub integrals: Vec<RationalIntegral>,
    /// Candidates with exactly one form.
    pub single_forms: Vec<RationalIntegral>,
    /// Tracking points skipped because two roots were closer than the
    /// collision tolerance.
    pub ambiguous_points: usize,
}

/// `det(I + h Df(x))` as a rational function of `(x, h)`. Row `i` is
/// multiplied by `E_i²` (the squared denominator of `f_i`) before the
/// determinant is expanded; common factors are cancelled afterwards.
pub fn forward_euler_jacobian_det(sys: &OdeSystem) -> Result<Rf> {
    let n = sys.dim();
    let nn = n + 1;
    let h = Poly::var(nn, n);
    let mut rows = Vec::with_capacity(n);
    let mut den = Poly::one(nn);
    let mut factors: Vec<Poly> = Vec::new();
    for (i, fi) in sys.field().iter().enumerate() {
        let num = fi.num().extend(nn);
        let e = fi.den().extend(nn);
        let row: Vec<Poly> = if e.as_constant().is_some() {
            let inv = e.constant_term().recip();
            (0..n)
                .map(|j| {
                    let d = &h * &num.derivative(j).scale(&inv);
                    if i == j { &d + &Poly::one(nn) } else { d }
                })
                .collect()
        } else {
            let e2 = &e * &e;
            den = &den * &e2;
            let prim = e.primitive();
            if !factors.contains(&prim) {
                factors.push(prim);
            }
            (0..n)
                .map(|j| {
                    let d = &h * &(&(&num.derivative(j) * &e) - &(&num * &e.derivative(j)));
                    if i == j { &d + &e2 } else { d }
                })
                .collect()
        };
        rows.push(row);
    }
    let mut num = poly_det(&rows);
    for f in &factors {
        loop {
            match (num.exact_div(f)?, den.exact_div(f)?) {
                (Some(a), Some(b)) => {
                    num = a;
                    den = b;
                }
                _ => break,
            }
        }
    }
    Rf::new(num, den)
}

/// Affine forms `p` with the given cofactor, as a basis of the solution
/// space chosen with sparse supports (then fewest negative coefficients,
/// then ascending coefficient order).
pub fn find_dps_given_cofactor(sys: &OdeSystem, cof: &Cofactor) -> Result<Vec<AffineForm>> {
    let n = sys.dim();
    let terms: Vec<Rf> = match cof {
        Cofactor::Continuous(c) => {
            if c.nvars() != n {
                return Err(Error::DimensionMismatch { expected: n, got: c.nvars() });
            }
            let mut t: Vec<Rf> = (0..n)
                .map(|i| &sys.field()[i] - &(c * &Rf::from_poly(Poly::var(n, i))))
                .collect();
            t.push(-c.clone());
            t
        }
        Cofactor::Discrete(ct) => {
            let nn = n + 1;
            if ct.nvars() != nn {
                return Err(Error::DimensionMismatch { expected: nn, got: ct.nvars() });
            }
            let h = Rf::from_poly(Poly::var(nn, n));
            let mut t: Vec<Rf> = (0..n)
                .map(|i| {
                    let xi = Rf::from_poly(Poly::var(nn, i));
                    &(&xi + &(&h * &sys.field()[i].extend(nn))) - &(ct * &xi)
                })
                .collect();
            t.push(&Rf::constant(nn, BigRational::one()) - ct);
            t
        }
    };
    let mut dens: Vec<Poly> = Vec::new();
    for t in &terms {
        let d = t.den().primitive();
        if d.as_constant().is_none() && !dens.contains(&d) {
            dens.push(d);
        }
    }
    let nv = terms[0].nvars();
    let common = dens.iter().fold(Poly::one(nv), |acc, d| &acc * d);
    let mut polys = Vec::with_capacity(terms.len());
    for t in &terms {
        let scale = common
            .exact_div(t.den())?
            .ok_or_else(|| Error::Inconsistent("denominator does not divide the common multiple".into()))?;
        polys.push(t.num() * &scale);
    }
    let mut monos: Vec<Monomial> = polys.iter().flat_map(|p| p.terms().map(|(m, _)| m.clone())).collect();
    monos.sort();
    monos.dedup();
    let space = if monos.is_empty() {
        Matrix::<BigRational>::identity(n + 1).to_rows()
    } else {
        Matrix::from_rows(monos.iter().map(|m| polys.iter().map(|p| p.coeff(m)).collect()).collect()).nullspace()
    };
    let basis = nice_basis(space);
    Ok(basis
        .into_iter()
        .filter(|v| v[..n].iter().any(|c| !c.is_zero()))
        .map(|mut v| {
            let a0 = v.pop().unwrap();
            AffineForm::new(v, a0)
        })
        .collect())
}

fn primitive_vec(v: &[BigRational]) -> Vec<BigRational> {
    let p = Poly::affine(&v[1..], v[0].clone()).primitive();
    let mut out = vec![p.constant_term()];
    out.extend(p.linear_coeffs());
    // first non-zero positive
    if out.iter().find(|c| !c.is_zero()).is_some_and(|c| c.is_negative()) {
        out = out.into_iter().map(|c| -c).collect();
    }
    out
}

/// Basis of the span of `space`, preferring vectors with small support.
fn nice_basis(space: Vec<Vec<BigRational>>) -> Vec<Vec<BigRational>> {
    let k = space.len();
    if k <= 1 {
        return space.iter().map(|v| rotate_back(primitive_vec(&rotate(v)))).collect();
    }
    let dim = space[0].len();
    let b = Matrix::from_rows(space.clone());
    let mut cands: Vec<Vec<BigRational>> = Vec::new();
    for zeros in subsets(dim, k - 1) {
        // coefficients y with (yᵀB)[z] = 0 for z in zeros
        let sub = Matrix::from_fn(zeros.len(), k, |r, c| b[(c, zeros[r])].clone());
        let ns = sub.nullspace();
        if ns.len() == 1 {
            let v = b.vec_mul(&ns[0]);
            let pv = rotate_back(primitive_vec(&rotate(&v)));
            if !cands.contains(&pv) {
                cands.push(pv);
            }
        }
    }
    cands.sort_by(|a, b| {
        let key = |v: &Vec<BigRational>| {
            (v.iter().filter(|c| !c.is_zero()).count(), v.iter().filter(|c| c.is_negative()).count())
        };
        key(a).cmp(&key(b)).then_with(|| a.cmp(b))
    });
    let mut chosen: Vec<Vec<BigRational>> = Vec::new();
    for c in cands {
        let mut trial = chosen.clone();
        trial.push(c);
        if Matrix::from_rows(trial.clone()).rank() == trial.len() {
            chosen = trial;
        }
        if chosen.len() == k {
            return chosen;
        }
    }
    b.row_space().to_rows()
}

// The constant coefficient sits last in solution vectors but is ordered
// first when normalizing signs.
fn rotate(v: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![v[v.len() - 1].clone()];
    out.extend_from_slice(&v[..v.len() - 1]);
    out
}

fn rotate_back(v: Vec<BigRational>) -> Vec<BigRational> {
    let mut out = v[1..].to_vec();
    out.push(v[0].clone());
    let lin_first = out.iter().find(|c| !c.is_zero()).cloned();
    if lin_first.is_some_and(|c| c.is_negative()) {
        out = out.into_iter().map(|c| -c).collect();
    }
    out
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

/// `num(c̃)^(m-1)` divides the numerator of the Jacobian determinant.
pub fn verify_divisibility_thm(det: &Rf, ctilde: &Rf, m: usize) -> Result<bool> {
    if m <= 1 {
        return Ok(true);
    }
    let k = ctilde.num().pow(m as u32 - 1);
    det.num().divisible_by(&k)
}

/// All monomials of total degree at most `d` in `n` variables, in
/// ascending graded order.
pub fn monomials_up_to(n: usize, d: u32) -> Vec<Monomial> {
    fn go(n: usize, i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if i == n {
            out.push(Monomial::from_exponents(cur.clone()));
            return;
        }
        for e in 0..=left {
            cur.push(e);
            go(n, i + 1, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, 0, d, &mut Vec::new(), &mut out);
    out.sort();
    out
}

struct Sampler {
    /// Coefficients `a_k(x)` of `det` numerator in `h^k`.
    coeffs: Vec<Poly>,
    dens: Vec<Poly>,
    fast_coeffs: Vec<CompiledPoly<f64>>,
    fast_dens: Vec<CompiledPoly<f64>>,
    /// Roots are generically simple, so floating-point evaluation is
    /// enough between samples.
    simple: bool,
}

impl Sampler {
    fn new(coeffs: Vec<Poly>, dens: Vec<Poly>) -> Self {
        let fast_coeffs = coeffs.iter().map(CompiledPoly::new).collect();
        let fast_dens = dens.iter().map(CompiledPoly::new).collect();
        Sampler { coeffs, dens, fast_coeffs, fast_dens, simple: false }
    }

    fn c_roots_f64(&self, x: &[f64]) -> Option<Vec<Complex64>> {
        if self.fast_dens.iter().any(|d| d.eval(x) == 0.0) {
            return None;
        }
        let a: Vec<f64> = self.fast_coeffs.iter().map(|p| p.eval(x)).collect();
        if a[0] == 0.0 {
            return None;
        }
        let d = a.len() - 1;
        let mut rev = vec![0.0; d + 1];
        for (k, ak) in a.iter().enumerate() {
            rev[d - k] = if k % 2 == 1 { -ak } else { *ak };
        }
        Some(univariate::roots_f64(&rev))
    }

    /// Distinct values `c = -1/h` over the roots `h` at an exact point, or
    /// `None` where a denominator or `a_0` vanishes.
    fn c_roots(&self, x: &[BigRational]) -> Option<Vec<Complex64>> {
        if self.dens.iter().any(|d| d.eval_exact(x).is_zero()) {
            return None;
        }
        let a: Vec<BigRational> = self.coeffs.iter().map(|p| p.eval_exact(x)).collect();
        if a[0].is_zero() {
            return None;
        }
        // N(-1/c)·c^d = Σ a_k (-1)^k c^(d-k)
        let d = a.len() - 1;
        let mut rev = vec![BigRational::zero(); d + 1];
        for (k, ak) in a.iter().enumerate() {
            rev[d - k] = if k % 2 == 1 { -ak.clone() } else { ak.clone() };
        }
        while rev.len() > 1 && rev.last().is_some_and(Zero::is_zero) {
            rev.pop();
        }
        let sf = univariate::squarefree(&rev);
        if univariate::degree(&sf) == 0 {
            return Some(vec![]);
        }
        Some(univariate::roots(&sf))
    }
}

/// Full pipeline: determinant, root branches, rational fit, exact
/// confirmation by [`find_dps_given_cofactor`].
pub fn detect_rational_integral(sys: &OdeSystem, opts: &DetectOptions) -> Result<DetectReport> {
    let n = sys.dim();
    let det = forward_euler_jacobian_det(sys)?;
    let coeffs: Vec<Poly> = det
        .num()
        .coefficients_in(n)
        .into_iter()
        .map(|p| p.restrict(&(0..n).collect::<Vec<_>>()))
        .collect();
    let mut dens: Vec<Poly> = sys.field().iter().map(|f| f.den().clone()).collect();
    dens.push(det.den().restrict(&(0..n).collect::<Vec<_>>()));
    let mut sampler = Sampler::new(coeffs, dens);
    let mut report =
        DetectReport { det: det.clone(), candidates: vec![], integrals: vec![], single_forms: vec![], ambiguous_points: 0 };
    if sampler.coeffs.len() <= 1 {
        return Ok(report);
    }

    let unknowns = |dp: u32, dq: u32| monomials_up_to(n, dp).len() + monomials_up_to(n, dq).len();
    let nsamples = opts.oversample * unknowns(opts.max_num_degree, opts.max_den_degree);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let random_point = |rng: &mut ChaCha8Rng| -> Vec<BigRational> {
        (0..n).map(|_| BigRational::new(rng.random_range(-12i64..=12).into(), 4.into())).collect()
    };
    // Every sample is reached from a common base point along a straight
    // segment, so a mislabelled crossing spoils one sample, not the rest.
    let (base, base_roots) = loop {
        let p = random_point(&mut rng);
        if let Some(r) = sampler.c_roots(&p).filter(|r| separated(r, opts.collision_tol)) {
            break (p, r);
        }
    };
    let nb = base_roots.len();
    sampler.simple = nb + 1 == sampler.coeffs.len();
    let steps = opts.substeps.max(1);
    let mut vertices: Vec<Vec<BigRational>> = Vec::with_capacity(nsamples);
    let mut samples: Vec<Vec<Complex64>> = vec![Vec::with_capacity(nsamples); nb];
    let mut attempts = 0;
    while vertices.len() < nsamples {
        attempts += 1;
        if attempts > 20 * nsamples {
            return Err(Error::AmbiguousRoots { point: vec![] });
        }
        let p = random_point(&mut rng);
        match sampler.c_roots(&p) {
            Some(r) if r.len() == nb && separated(&r, opts.collision_tol) => {}
            _ => continue,
        }
        let Some(end) = walk(&sampler, &base, &base_roots, &p, steps, opts.collision_tol, &mut report.ambiguous_points)
        else {
            continue;
        };
        for (k, col) in samples.iter_mut().enumerate() {
            col.push(end[k]);
        }
        vertices.push(p);
    }

    let xs: Vec<Vec<f64>> = vertices.iter().map(|v| v.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()).collect();
    let mut pairs: Vec<(u32, u32)> = (0..=opts.max_num_degree)
        .flat_map(|p| (0..=opts.max_den_degree).map(move |q| (p, q)))
        .collect();
    pairs.sort_by_key(|&(p, q)| (p + q, q));
    for col in &samples {
        if col.iter().any(|c| c.im.abs() > 1e-9 * (1.0 + c.re.abs())) {
            continue;
        }
        let cs: Vec<f64> = col.iter().map(|c| c.re).collect();
        let Some(c) = pairs.iter().find_map(|&(dp, dq)| fit(n, dp, dq, &xs, &cs, opts.oversample)) else {
            continue;
        };
        if report.candidates.iter().any(|k| k.c.equivalent(&c)) {
            continue;
        }
        report.candidates.push(CofactorCandidate { c, source: CandidateSource::JacobianPipeline });
    }

    for cand in &report.candidates {
        let Cofactor::Discrete(ct) = Cofactor::forward_euler(&cand.c) else { unreachable!() };
        let forms = find_dps_given_cofactor(sys, &Cofactor::Discrete(ct.clone()))?;
        if forms.is_empty() {
            continue;
        }
        let divisibility = verify_divisibility_thm(&det, &ct, forms.len())?;
        let ri = RationalIntegral { cofactor: cand.c.clone(), forms, divisibility };
        if ri.forms.len() >= 2 {
            report.integrals.push(ri);
        } else {
            report.single_forms.push(ri);
        }
    }
    Ok(report)
}

/// Continues the roots from `base` to `target` along the segment with an
/// adaptive step: a step is accepted only when every root predicted by
/// linear extrapolation has a clearly nearest successor. Points where
/// roots collide are stepped over once the step cannot shrink further.
fn walk(
    sampler: &Sampler,
    base: &[BigRational],
    base_roots: &[Complex64],
    target: &[BigRational],
    steps: usize,
    tol: f64,
    skipped: &mut usize,
) -> Option<Vec<Complex64>> {
    let point = |t: &BigRational| -> Vec<BigRational> { base.iter().zip(target).map(|(a, b)| a + (b - a) * t).collect() };
    let (bf, tf): (Vec<f64>, Vec<f64>) = base
        .iter()
        .zip(target)
        .map(|(a, b)| (a.to_f64().unwrap_or(f64::NAN), b.to_f64().unwrap_or(f64::NAN)))
        .unzip();
    let roots_at = |t: &BigRational| {
        if sampler.simple && !t.is_one() {
            let tt = t.to_f64().unwrap_or(f64::NAN);
            let x: Vec<f64> = bf.iter().zip(&tf).map(|(a, b)| a + (b - a) * tt).collect();
            sampler.c_roots_f64(&x)
        } else {
            sampler.c_roots(&point(t))
        }
    };
    let max_dt = BigRational::new(1.into(), (steps as i64).into());
    let min_dt = &max_dt / BigRational::from_integer(4096.into());
    let one = BigRational::one();
    let mut t = BigRational::zero();
    let mut dt = max_dt.clone();
    let mut prev = base_roots.to_vec();
    let mut last: Option<(BigRational, Vec<Complex64>)> = None;
    let mut evals = 0;
    while t < one {
        evals += 1;
        if evals > 50_000 {
            return None;
        }
        let mut tn = if &t + &dt > one { one.clone() } else { &t + &dt };
        let valid = |r: &Option<Vec<Complex64>>| r.as_ref().is_some_and(|r| r.len() == prev.len() && separated(r, tol));
        let mut roots = roots_at(&tn);
        if !valid(&roots) {
            if dt > min_dt {
                dt = &dt / BigRational::from_integer(2.into());
                continue;
            }
            // roots too close to label even at the smallest step: step over
            *skipped += 1;
            let mut k = 1;
            while !valid(&roots) {
                k += 1;
                if k > 64 {
                    return None;
                }
                tn = (&t + &dt * BigRational::from_integer(k.into())).min(one.clone());
                roots = roots_at(&tn);
            }
        }
        let roots = roots.expect("checked above");
        let step = &tn - &t;
        let predicted: Vec<Complex64> = match &last {
            Some((tl, rl)) => {
                let ratio = (&step / (&t - tl)).to_f64().unwrap_or(1.0);
                prev.iter().zip(rl).map(|(a, b)| extrapolate(*a, *b, ratio)).collect()
            }
            None => prev.clone(),
        };
        let Some(next) = assign(&predicted, &roots) else {
            if dt > min_dt {
                dt = &dt / BigRational::from_integer(2.into());
                continue;
            }
            return None;
        };
        if dt > min_dt && !small_motion(&prev, &next) {
            dt = &dt / BigRational::from_integer(2.into());
            continue;
        }
        last = Some((t.clone(), std::mem::replace(&mut prev, next)));
        t = tn;
        dt = (&dt * BigRational::from_integer(2.into())).min(max_dt.clone());
    }
    Some(prev)
}

/// Every root moved by less than a third of its distance to the nearest
/// other root.
fn small_motion(prev: &[Complex64], next: &[Complex64]) -> bool {
    next.iter().enumerate().all(|(i, a)| {
        let sep = next.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, b)| chordal(*a, *b)).fold(f64::INFINITY, f64::min);
        chordal(prev[i], *a) < sep / 3.0
    })
}

fn separated(r: &[Complex64], tol: f64) -> bool {
    r.iter().enumerate().all(|(i, a)| r[i + 1..].iter().all(|b| chordal(*a, *b) >= tol))
}

/// Distance on the Riemann sphere; branches pass through poles of `c`.
fn chordal(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / ((1.0 + a.norm_sqr()).sqrt() * (1.0 + b.norm_sqr()).sqrt())
}

/// Linear extrapolation in `c`, or in `1/c` for large values.
fn extrapolate(a: Complex64, b: Complex64, ratio: f64) -> Complex64 {
    if a.norm() <= 1.0 {
        a + (a - b) * ratio
    } else {
        let (ia, ib) = (a.inv(), b.inv());
        (ia + (ia - ib) * ratio).inv()
    }
}

/// Matches each predicted value to a distinct root, closest pairs first;
/// `None` unless each prediction's match is at most a quarter of the
/// distance to the next candidate.
fn assign(predicted: &[Complex64], roots: &[Complex64]) -> Option<Vec<Complex64>> {
    for p in predicted {
        let mut d: Vec<f64> = roots.iter().map(|r| chordal(*p, *r)).collect();
        d.sort_by(f64::total_cmp);
        if d.len() > 1 && d[0] > 0.25 * d[1] {
            return None;
        }
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (bi, b) in predicted.iter().enumerate() {
        for (ri, r) in roots.iter().enumerate() {
            pairs.push((chordal(*b, *r), bi, ri));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = vec![None; predicted.len()];
    let mut used = vec![false; roots.len()];
    for (_, bi, ri) in pairs {
        if out[bi].is_none() && !used[ri] {
            out[bi] = Some(roots[ri]);
            used[ri] = true;
        }
    }
    out.into_iter().collect()
}

/// Fits `c ≈ P/Q` with `deg P <= dp`, `deg Q <= dq` from samples; the
/// null vector of the collocation matrix is rationalized and checked.
fn fit(n: usize, dp: u32, dq: u32, xs: &[Vec<f64>], cs: &[f64], oversample: usize) -> Option<Rf> {
    let mp = monomials_up_to(n, dp);
    let mq = monomials_up_to(n, dq);
    let k = mp.len() + mq.len();
    let rows = (oversample * k).min(xs.len());
    if rows < k + 1 {
        return None;
    }
    let mono = |m: &Monomial, x: &[f64]| m.exponents().iter().zip(x).fold(1.0, |a, (&e, &v)| a * v.powi(e as i32));
    let mut a = DMatrix::<f64>::zeros(rows, k);
    for r in 0..rows {
        let x = &xs[r];
        for (j, m) in mp.iter().enumerate() {
            a[(r, j)] = mono(m, x);
        }
        for (j, m) in mq.iter().enumerate() {
            a[(r, mp.len() + j)] = -cs[r] * mono(m, x);
        }
        let norm = a.row(r).norm();
        if norm > 0.0 {
            a.row_mut(r).scale_mut(1.0 / norm);
        }
    }
    let svd = a.svd(false, true);
    let vt = svd.v_t?;
    let sv = &svd.singular_values;
    let (imin, smin) = sv.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1))?;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if *smin > 1e-9 * smax {
        return None;
    }
    let v: Vec<f64> = (0..k).map(|j| vt[(imin, j)]).collect();
    let big = v.iter().cloned().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    let mut coeffs = Vec::with_capacity(k);
    for x in &v {
        let y = x / big;
        coeffs.push(if y.abs() < 1e-9 { BigRational::zero() } else { rationalize(y, 1000)? });
    }
    let p = Poly::from_terms(n, mp.iter().map(|m| m.exponents().to_vec()).zip(coeffs[..mp.len()].iter().cloned()));
    let q = Poly::from_terms(n, mq.iter().map(|m| m.exponents().to_vec()).zip(coeffs[mp.len()..].iter().cloned()));
    if q.is_zero() || p.is_zero() {
        return None;
    }
    let c = Rf::new(p, q).ok()?.reduced();
    for (x, &cv) in xs.iter().zip(cs) {
        let got: f64 = c.eval(x).ok()?;
        if (got - cv).abs() > 1e-7 * (1.0 + cv.abs()) {
            return None;
        }
    }
    Some(c)
}

/// Continuous cofactors read off from a known basis of forms sharing a
/// cofactor, for reporting: `c = (∇p·f)/p` using the first form.
pub fn cofactor_of(sys: &OdeSystem, p: &AffineForm) -> Result<Rf> {
    let n = sys.dim();
    let mut acc = Rf::constant(n, BigRational::zero());
    for (a, f) in p.alpha.iter().zip(sys.field()) {
        if !a.is_zero() {
            acc = &acc + &(f * &Rf::constant(n, a.clone()));
        }
    }
    Ok((acc / Rf::from_poly(p.to_polynomial())).reduced())
}
