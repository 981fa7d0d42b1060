use crate::error::{Error, Result};
use crate::linalg::lu_solve;
use crate::scalar::Scalar;

use super::system::{CompiledSystem, OdeSystem};
use super::tableau::{ButcherTableau, Special};

/// Stage-solver settings for implicit tableaux.
#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Sup-norm bound on the stage residual, relative to `max(1, |x|∞)`.
    pub tol: f64,
    pub max_iter: usize,
    /// Refresh the Jacobian when the residual contracts by less than this.
    pub refresh_ratio: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-13, max_iter: 50, refresh_ratio: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult<F> {
    pub next: Vec<F>,
    pub stages: Vec<Vec<F>>,
    /// Sup-norm residual of the stage equations; zero for explicit methods.
    pub residual: F,
    pub iterations: usize,
}

/// A Runge-Kutta map `x ↦ φ_h(x)` for one tableau and one system, with all
/// coefficients converted to `F`.
#[derive(Clone, Debug)]
pub struct RkMap<F> {
    tableau: ButcherTableau,
    a: Vec<F>,
    b: Vec<F>,
    explicit: bool,
    kahan: bool,
    sys: CompiledSystem<F>,
    opts: SolverOptions,
}

impl<F: Scalar> RkMap<F> {
    pub fn new(tableau: &ButcherTableau, sys: &OdeSystem) -> Self {
        Self::with_options(tableau, sys, SolverOptions::default())
    }

    pub fn with_options(tableau: &ButcherTableau, sys: &OdeSystem, opts: SolverOptions) -> Self {
        let (a, b, _) = tableau.to_scalar::<F>();
        RkMap {
            tableau: tableau.clone(),
            a,
            b,
            explicit: tableau.is_explicit(),
            kahan: tableau.special() == Special::Kahan && sys.is_quadratic(),
            sys: sys.compile(),
            opts,
        }
    }

    pub fn tableau(&self) -> &ButcherTableau {
        &self.tableau
    }

    pub fn system(&self) -> &CompiledSystem<F> {
        &self.sys
    }

    pub fn dim(&self) -> usize {
        self.sys.dim()
    }

    pub fn step(&self, x: &[F], h: F) -> Result<StepResult<F>> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len() });
        }
        if !h.is_finite() {
            return Err(Error::Domain("step size is not finite".into()));
        }
        if self.kahan {
            return self.kahan_step(x, h);
        }
        let (stages, k, residual, iterations) = if self.explicit {
            let (g, k) = self.explicit_stages(x, h)?;
            (g, k, F::zero(), 0)
        } else {
            self.implicit_stages(x, h)?
        };
        let next = self.combine(x, h, &k);
        Ok(StepResult { next, stages, residual, iterations })
    }

    /// `x + h Σ b_j k_j`, accumulating the weighted sum first.
    fn combine(&self, x: &[F], h: F, k: &[Vec<F>]) -> Vec<F> {
        (0..self.dim())
            .map(|i| {
                let mut acc = F::zero();
                for (bj, kj) in self.b.iter().zip(k) {
                    acc = acc + *bj * kj[i];
                }
                x[i] + h * acc
            })
            .collect()
    }

    fn explicit_stages(&self, x: &[F], h: F) -> Result<(Vec<Vec<F>>, Vec<Vec<F>>)> {
        let s = self.b.len();
        let n = self.dim();
        let mut g: Vec<Vec<F>> = Vec::with_capacity(s);
        let mut k: Vec<Vec<F>> = Vec::with_capacity(s);
        for i in 0..s {
            let gi: Vec<F> = (0..n)
                .map(|c| {
                    let mut acc = F::zero();
                    for j in 0..i {
                        acc = acc + self.a[i * s + j] * k[j][c];
                    }
                    x[c] + h * acc
                })
                .collect();
            k.push(self.sys.eval(&gi)?);
            g.push(gi);
        }
        Ok((g, k))
    }

    /// Simplified Newton on the stacked stage equations
    /// `g_i - x - h Σ_j a_ij f(g_j) = 0`.
    #[allow(clippy::type_complexity)]
    fn implicit_stages(&self, x: &[F], h: F) -> Result<(Vec<Vec<F>>, Vec<Vec<F>>, F, usize)> {
        let s = self.b.len();
        let n = self.dim();
        let m = s * n;
        let xnorm = x.iter().fold(F::one(), |acc, v| acc.max(v.abs()));
        // never ask for less than a few ulps of the working precision
        let tol = F::lit(self.opts.tol).max(F::lit(16.0) * F::epsilon()) * xnorm;
        let mut g: Vec<Vec<F>> = vec![x.to_vec(); s];
        let mut k: Vec<Vec<F>> = Vec::with_capacity(s);
        let mut jac: Vec<F> = vec![F::zero(); m * m];
        let mut have_jac = false;
        let mut prev = F::infinity();
        let mut growth = 0;
        let mut j_n = vec![F::zero(); n * n];
        for iter in 0..=self.opts.max_iter {
            k.clear();
            for gi in &g {
                k.push(self.sys.eval(gi)?);
            }
            let mut r = vec![F::zero(); m];
            let mut res = F::zero();
            for i in 0..s {
                for c in 0..n {
                    let mut acc = F::zero();
                    for j in 0..s {
                        acc = acc + self.a[i * s + j] * k[j][c];
                    }
                    let v = g[i][c] - x[c] - h * acc;
                    r[i * n + c] = v;
                    res = res.max(v.abs());
                }
            }
            if !res.is_finite() {
                return Err(Error::Divergence { iterations: iter, residual: res.to_f64_lossy() });
            }
            if res <= tol {
                return Ok((g, k, res, iter));
            }
            if iter == self.opts.max_iter {
                return Err(Error::IterationCap { iterations: iter, residual: res.to_f64_lossy() });
            }
            if res > prev {
                growth += 1;
                if growth >= 3 {
                    return Err(Error::Divergence { iterations: iter, residual: res.to_f64_lossy() });
                }
            } else {
                growth = 0;
            }
            if !have_jac || res > F::lit(self.opts.refresh_ratio) * prev {
                // I - h (A ⊗ J(g_j)), J taken at the current iterates
                for v in jac.iter_mut() {
                    *v = F::zero();
                }
                for j in 0..s {
                    self.sys.jacobian_into(&g[j], &mut j_n)?;
                    for i in 0..s {
                        let hij = h * self.a[i * s + j];
                        for r_ in 0..n {
                            for c in 0..n {
                                jac[(i * n + r_) * m + j * n + c] = -hij * j_n[r_ * n + c];
                            }
                        }
                    }
                }
                for d in 0..m {
                    jac[d * m + d] = jac[d * m + d] + F::one();
                }
                have_jac = true;
            }
            prev = res;
            let mut lu = jac.clone();
            lu_solve(&mut lu, m, &mut r)?;
            for i in 0..s {
                for c in 0..n {
                    g[i][c] = g[i][c] - r[i * n + c];
                }
            }
        }
        unreachable!()
    }

    /// `(I - (h/2) J(x)) (x' - x) = h f(x)`; exact for quadratic fields.
    fn kahan_step(&self, x: &[F], h: F) -> Result<StepResult<F>> {
        let n = self.dim();
        let mut rhs = self.sys.eval(x)?;
        for v in rhs.iter_mut() {
            *v = *v * h;
        }
        let mut m = vec![F::zero(); n * n];
        self.sys.jacobian_into(x, &mut m)?;
        let half = h * F::lit(0.5);
        for r in 0..n {
            for c in 0..n {
                m[r * n + c] = if r == c { F::one() } else { F::zero() } - half * m[r * n + c];
            }
        }
        lu_solve(&mut m, n, &mut rhs)?;
        let next: Vec<F> = x.iter().zip(&rhs).map(|(a, d)| *a + *d).collect();
        let mid: Vec<F> = x.iter().zip(&next).map(|(a, b)| (*a + *b) * F::lit(0.5)).collect();
        let stages = vec![x.to_vec(), mid, next.clone()];
        let residual = self.stage_residual(x, h, &stages)?;
        Ok(StepResult { next, stages, residual, iterations: 1 })
    }

    /// Sup-norm of `g_i - x - h Σ_j a_ij f(g_j)` for given stages.
    pub fn stage_residual(&self, x: &[F], h: F, g: &[Vec<F>]) -> Result<F> {
        let s = self.b.len();
        let k: Vec<Vec<F>> = g.iter().map(|gi| self.sys.eval(gi)).collect::<Result<_>>()?;
        let mut res = F::zero();
        for i in 0..s {
            for c in 0..self.dim() {
                let mut acc = F::zero();
                for j in 0..s {
                    acc = acc + self.a[i * s + j] * k[j][c];
                }
                res = res.max((g[i][c] - x[c] - h * acc).abs());
            }
        }
        Ok(res)
    }

    /// `n_steps + 1` points starting at `x0`; stops with an error at the
    /// first step that fails or overflows.
    pub fn trajectory(&self, x0: &[F], h: F, n_steps: usize) -> Result<Vec<Vec<F>>> {
        let mut out = Vec::with_capacity(n_steps + 1);
        out.push(x0.to_vec());
        for index in 0..n_steps {
            let r = self
                .step(out.last().unwrap(), h)
                .map_err(|e| Error::Step { index, source: Box::new(e) })?;
            if r.next.iter().any(|v| !v.is_finite()) {
                let source = Box::new(Error::Domain("state is no longer finite".into()));
                return Err(Error::Step { index, source });
            }
            out.push(r.next);
        }
        Ok(out)
    }
}

pub fn rk_step<F: Scalar>(tableau: &ButcherTableau, sys: &OdeSystem, x: &[F], h: F) -> Result<StepResult<F>> {
    RkMap::new(tableau, sys).step(x, h)
}

/// Stages of one step (forward substitution for explicit tableaux).
pub fn implicit_stage_solve<F: Scalar>(
    tableau: &ButcherTableau,
    sys: &OdeSystem,
    x: &[F],
    h: F,
) -> Result<Vec<Vec<F>>> {
    Ok(rk_step(tableau, sys, x, h)?.stages)
}

pub fn trajectory<F: Scalar>(
    tableau: &ButcherTableau,
    sys: &OdeSystem,
    x0: &[F],
    h: F,
    n_steps: usize,
) -> Result<Vec<Vec<F>>> {
    RkMap::new(tableau, sys).trajectory(x0, h, n_steps)
}
