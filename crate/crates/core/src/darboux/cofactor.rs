use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::linalg::lu_solve;
use crate::polycore::{CompiledRatFun, Polynomial, RationalFunction};
use crate::rk::{ButcherTableau, OdeSystem, RkMap, StepResult};
use crate::scalar::Scalar;

type Poly = Polynomial<BigRational>;
type Rf = RationalFunction<BigRational>;

/// Exact test of `∇p·f - c p ≡ 0` (denominators cleared).
pub fn verify_continuous(p: &Poly, c: &Rf, sys: &OdeSystem) -> bool {
    if p.nvars() != sys.dim() || c.nvars() != sys.dim() {
        return false;
    }
    let mut acc = -(c * &Rf::from_poly(p.clone()));
    for (i, f) in sys.field().iter().enumerate() {
        let d = p.derivative(i);
        if !d.is_zero() {
            acc = acc + &Rf::from_poly(d) * f;
        }
    }
    acc.is_zero()
}

/// The discrete cofactor, either as an exact polynomial in `(x, h)` or as a
/// pointwise evaluator built on the stage solver.
#[derive(Clone, Debug)]
pub enum DiscreteCofactor {
    /// Polynomial in `n + 1` variables, `h` last.
    Symbolic(Poly),
    Numeric { tableau: ButcherTableau, sys: OdeSystem, c: Rf },
}

impl DiscreteCofactor {
    pub fn eval(&self, x: &[f64], h: f64) -> Result<f64> {
        match self {
            DiscreteCofactor::Symbolic(p) => {
                let mut xh = x.to_vec();
                xh.push(h);
                p.eval(&xh)
            }
            DiscreteCofactor::Numeric { tableau, sys, c } => discrete_cofactor_numeric(tableau, sys, c, x, h),
        }
    }
}

/// Evaluates `c̃(x) = 1 + h bᵀD_c(I - hAD_c)⁻¹𝟙` for one tableau, system
/// and cofactor, reusing the compiled data.
#[derive(Clone, Debug)]
pub struct CofactorEvaluator<F> {
    map: RkMap<F>,
    c: CompiledRatFun<F>,
    a: Vec<F>,
    b: Vec<F>,
}

impl<F: Scalar> CofactorEvaluator<F> {
    pub fn new(tableau: &ButcherTableau, sys: &OdeSystem, c: &Rf) -> Self {
        let (a, b, _) = tableau.to_scalar::<F>();
        CofactorEvaluator { map: RkMap::new(tableau, sys), c: CompiledRatFun::new(c), a, b }
    }

    pub fn map(&self) -> &RkMap<F> {
        &self.map
    }

    /// The step and `c̃` at `(x, h)`.
    pub fn eval(&self, x: &[F], h: F) -> Result<(F, StepResult<F>)> {
        let step = self.map.step(x, h)?;
        let ct = self.from_stages(&step.stages, h)?;
        Ok((ct, step))
    }

    /// `c̃` from already solved stages.
    pub fn from_stages(&self, stages: &[Vec<F>], h: F) -> Result<F> {
        let s = self.b.len();
        let dc: Vec<F> = stages.iter().map(|g| self.c.eval(g)).collect::<Result<_>>()?;
        let mut m = vec![F::zero(); s * s];
        for i in 0..s {
            for j in 0..s {
                m[i * s + j] = -h * self.a[i * s + j] * dc[j];
            }
            m[i * s + i] = m[i * s + i] + F::one();
        }
        let mut u = vec![F::one(); s];
        lu_solve(&mut m, s, &mut u).map_err(|_| Error::Singular("I - hA·D_c".into()))?;
        let mut acc = F::zero();
        for i in 0..s {
            acc = acc + self.b[i] * dc[i] * u[i];
        }
        Ok(F::one() + h * acc)
    }
}

pub fn discrete_cofactor_numeric<F: Scalar>(
    tableau: &ButcherTableau,
    sys: &OdeSystem,
    c: &Rf,
    x: &[F],
    h: F,
) -> Result<F> {
    Ok(CofactorEvaluator::new(tableau, sys, c).eval(x, h)?.0)
}

/// Exact `c̃(x, h)` for an explicit rational tableau on a polynomial field,
/// by forward substitution of the stages: `u_i = 1 + h Σ_{j<i} a_ij c(g_j) u_j`
/// and `c̃ = 1 + h Σ b_i c(g_i) u_i`. The result has `h` as variable `n`.
pub fn discrete_cofactor_symbolic(tableau: &ButcherTableau, sys: &OdeSystem, c: &Poly) -> Result<Poly> {
    if !tableau.is_explicit() {
        return Err(Error::Domain(format!("{} is not explicit", tableau.id())));
    }
    let a = tableau
        .a_rational()
        .ok_or_else(|| Error::Domain(format!("{} has irrational entries", tableau.id())))?;
    let b = tableau.b_rational().expect("rational tableau");
    let f = sys
        .polynomial_field()
        .ok_or_else(|| Error::Domain("symbolic cofactor needs a polynomial field".into()))?;
    let n = sys.dim();
    let f: Vec<Poly> = f.iter().map(|p| p.extend(n + 1)).collect();
    let c = c.extend(n + 1);
    let h = Poly::var(n + 1, n);
    let one = Poly::one(n + 1);
    let s = tableau.stages();
    let mut g: Vec<Vec<Poly>> = Vec::with_capacity(s);
    let mut k: Vec<Vec<Poly>> = Vec::with_capacity(s);
    let mut cg: Vec<Poly> = Vec::with_capacity(s);
    let mut u: Vec<Poly> = Vec::with_capacity(s);
    for i in 0..s {
        let gi: Vec<Poly> = (0..n)
            .map(|comp| {
                let mut acc = Poly::zero(n + 1);
                for j in 0..i {
                    acc = acc + k[j][comp].scale(&a[(i, j)]);
                }
                Poly::var(n + 1, comp) + &h * &acc
            })
            .collect();
        let mut reps = gi.clone();
        reps.push(h.clone());
        let ki: Vec<Poly> = f.iter().map(|p| p.compose(&reps)).collect();
        let ci = c.compose(&reps);
        let mut acc = Poly::zero(n + 1);
        for j in 0..i {
            acc = acc + (&cg[j] * &u[j]).scale(&a[(i, j)]);
        }
        u.push(&one + &h * &acc);
        cg.push(ci);
        k.push(ki);
        g.push(gi);
    }
    let mut acc = Poly::zero(n + 1);
    for i in 0..s {
        acc = acc + (&cg[i] * &u[i]).scale(&b[i]);
    }
    Ok(one + &h * &acc)
}
