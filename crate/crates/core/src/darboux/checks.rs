use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::polycore::{AffineForm, RationalFunction};
use crate::rk::{is_symmetric_stability, matrix_stability, stability_function, ButcherTableau, OdeSystem, RkMap};
use crate::scalar::ToScalar;

use super::cofactor::CofactorEvaluator;
use super::types::{HigherIntegralSystem, QuadraticInvariant, SecondIntegral};

type Rf = RationalFunction<BigRational>;

#[derive(Clone, Debug, PartialEq)]
pub struct Preservation {
    pub p_x: f64,
    pub p_next: f64,
    pub ctilde: f64,
    /// `|p(φ_h(x)) - c̃(x) p(x)|`.
    pub residual: f64,
    pub stage_residual: f64,
}

impl Preservation {
    /// Residual relative to `1 + |p(x)| + |p(φ_h(x))|`.
    pub fn relative(&self) -> f64 {
        self.residual / (1.0 + self.p_x.abs() + self.p_next.abs())
    }
}

/// One step of `tableau` from `x`, compared against `c̃(x) p(x)`.
pub fn check_preservation(
    tableau: &ButcherTableau,
    sys: &OdeSystem,
    p: &SecondIntegral,
    x: &[f64],
    h: f64,
) -> Result<Preservation> {
    let form = p.affine().ok_or_else(|| Error::Domain(format!("{} is not affine", p.name)))?;
    let ev = CofactorEvaluator::<f64>::new(tableau, sys, &p.cofactor);
    preservation_with(&ev, &form, x, h)
}

pub fn preservation_with(ev: &CofactorEvaluator<f64>, form: &AffineForm, x: &[f64], h: f64) -> Result<Preservation> {
    let (ctilde, step) = ev.eval(x, h)?;
    let p_x = form.eval(x);
    let p_next = form.eval(&step.next);
    Ok(Preservation { p_x, p_next, ctilde, residual: (p_next - ctilde * p_x).abs(), stage_residual: step.residual })
}

/// Largest `|H(x_k) - H(x_0)| / |H(x_0)|` for `H = Q/R` along a trajectory.
pub fn check_rational_integral(q: &AffineForm, r: &AffineForm, traj: &[Vec<f64>]) -> Result<f64> {
    let h = |x: &[f64]| -> Result<f64> {
        let d = r.eval(x);
        if d == 0.0 {
            return Err(Error::Pole { point: x.to_vec() });
        }
        Ok(q.eval(x) / d)
    };
    let h0 = h(&traj[0])?;
    let mut worst: f64 = 0.0;
    for x in traj {
        worst = worst.max((h(x)? - h0).abs() / h0.abs());
    }
    Ok(worst)
}

/// `σ̃ = ln R(h c2) / ln R(h c1)`.
pub fn modified_exponent(r: &Rf, h: f64, c1: f64, c2: f64) -> Result<f64> {
    let r1 = r.eval(&[h * c1])?;
    let r2 = r.eval(&[h * c2])?;
    if r1 <= 0.0 || r2 <= 0.0 {
        return Err(Error::Domain(format!("R(h c) must be positive, got {r1:e} and {r2:e}")));
    }
    if r1 == 1.0 {
        return Err(Error::Domain("R(h c1) = 1".into()));
    }
    Ok(r2.ln() / r1.ln())
}

/// Largest relative drift of `p1^σ / p2` along a trajectory.
pub fn check_modified_integral(p1: &AffineForm, p2: &AffineForm, sigma: f64, traj: &[Vec<f64>]) -> Result<f64> {
    let h = |x: &[f64]| -> Result<f64> {
        let a = p1.eval(x);
        if a <= 0.0 {
            return Err(Error::Domain(format!("p1 = {a:e} is not positive")));
        }
        let b = p2.eval(x);
        if b == 0.0 {
            return Err(Error::Pole { point: x.to_vec() });
        }
        Ok(a.powf(sigma) / b)
    };
    let h0 = h(&traj[0])?;
    let mut worst: f64 = 0.0;
    for x in traj {
        worst = worst.max((h(x)? - h0).abs() / h0.abs());
    }
    Ok(worst)
}

/// Largest `|c̃^{-k} p(x_k) - p(x_0)|`.
pub fn iteration_index_integral(ctilde: f64, p: &AffineForm, traj: &[Vec<f64>]) -> Result<f64> {
    if ctilde == 0.0 {
        return Err(Error::Domain("discrete cofactor is zero".into()));
    }
    let p0 = p.eval(&traj[0]);
    let mut scale = 1.0;
    let mut worst: f64 = 0.0;
    for x in traj {
        worst = worst.max((p.eval(x) * scale - p0).abs());
        scale /= ctilde;
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HigherCheck {
    /// `R(hL)`, row-major.
    pub r_hl: Vec<f64>,
    pub p_x: Vec<f64>,
    pub p_next: Vec<f64>,
    /// Sup norm of `p̲(φ_h(x)) - R(hL) p̲(x)`.
    pub residual: f64,
}

impl HigherCheck {
    pub fn relative(&self) -> f64 {
        let scale = self.p_x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.residual / (1.0 + scale)
    }
}

pub fn check_higher_integrals(
    tableau: &ButcherTableau,
    sys: &OdeSystem,
    hs: &HigherIntegralSystem,
    x: &[f64],
    h: f64,
) -> Result<HigherCheck> {
    let m = hs.m();
    let r = stability_function(tableau);
    let l: Vec<f64> = (0..m).flat_map(|i| hs.l.row(i)).map(|v| v.to_scalar::<f64>()).collect();
    let r_hl = matrix_stability(&r, &l, m, h)?;
    let next = RkMap::<f64>::new(tableau, sys).step(x, h)?.next;
    let p_x = hs.eval(x);
    let p_next = hs.eval(&next);
    let mut residual: f64 = 0.0;
    for i in 0..m {
        let pred: f64 = (0..m).map(|j| r_hl[i * m + j] * p_x[j]).sum();
        residual = residual.max((p_next[i] - pred).abs());
    }
    Ok(HigherCheck { r_hl, p_x, p_next, residual })
}

/// Relative drift `|H(x_k) - H(x_0)| / |H(x_0)|` along a trajectory, with
/// quarter maxima for spotting secular growth.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftSeries {
    pub drift: Vec<f64>,
    pub max: f64,
    pub first_quarter_max: f64,
    pub last_quarter_max: f64,
}

impl DriftSeries {
    pub fn from_values(values: &[f64]) -> Self {
        let h0 = values[0];
        let denom = if h0 == 0.0 { 1.0 } else { h0.abs() };
        let drift: Vec<f64> = values.iter().map(|v| (v - h0).abs() / denom).collect();
        let n = drift.len();
        let q = (n / 4).max(1);
        let maxof = |s: &[f64]| s.iter().fold(0.0f64, |m, v| m.max(*v));
        DriftSeries {
            max: maxof(&drift),
            first_quarter_max: maxof(&drift[..q.min(n)]),
            last_quarter_max: maxof(&drift[n.saturating_sub(q)..]),
            drift,
        }
    }

    /// Final-quarter maximum at most `factor` times the first-quarter one.
    pub fn bounded(&self, factor: f64) -> bool {
        self.last_quarter_max <= factor * self.first_quarter_max
    }
}

/// Drift of `p̲ᵀ S p̲` along a trajectory, for any tableau.
pub fn quadratic_drift(inv: &QuadraticInvariant, traj: &[Vec<f64>]) -> DriftSeries {
    let values: Vec<f64> = traj.iter().map(|x| inv.eval(x)).collect();
    DriftSeries::from_values(&values)
}

/// As [`quadratic_drift`], after checking that the tableau's stability
/// function satisfies `R(-z)R(z) = 1`.
pub fn check_pade_quadratic(
    tableau: &ButcherTableau,
    inv: &QuadraticInvariant,
    traj: &[Vec<f64>],
) -> Result<DriftSeries> {
    if !is_symmetric_stability(&stability_function(tableau)) {
        return Err(Error::Domain(format!("{}: R(-z)R(z) != 1", tableau.id())));
    }
    Ok(quadratic_drift(inv, traj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::Polynomial;
    use crate::scalar::rat_int;

    #[test]
    fn modified_exponent_limits() {
        let r = stability_function(&ButcherTableau::by_id("forward-euler").unwrap());
        let s = modified_exponent(&r, 1e-2, 1.0, 2.0).unwrap();
        assert!((s - (1.02f64).ln() / (1.01f64).ln()).abs() < 1e-15);
        assert_eq!(modified_exponent(&r, 0.1, 3.0, 3.0).unwrap(), 1.0);
        let errs: Vec<f64> = [1e-2, 1e-4, 1e-6]
            .iter()
            .map(|&h| (modified_exponent(&r, h, 1.0, 2.0).unwrap() - 2.0).abs())
            .collect();
        assert!(errs[1] < errs[0] * 2e-2 && errs[2] < errs[1] * 2e-2);
        assert!(modified_exponent(&r, 1.0, -2.0, 1.0).is_err());
        assert!(modified_exponent(&r, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn trivial_trajectories() {
        let p = AffineForm::new(vec![rat_int(1), rat_int(1)], rat_int(0));
        let q = AffineForm::new(vec![rat_int(1), rat_int(0)], rat_int(0));
        let traj = vec![vec![1.0, 2.0]; 5];
        assert_eq!(check_rational_integral(&q, &p, &traj).unwrap(), 0.0);
        assert_eq!(check_modified_integral(&p, &q, 1.7, &traj).unwrap(), 0.0);
        assert_eq!(iteration_index_integral(2.0, &p, &traj[..1]).unwrap(), 0.0);
        assert!(iteration_index_integral(0.0, &p, &traj).is_err());
        let bad = vec![vec![1.0, -1.0]];
        assert!(check_rational_integral(&q, &p, &bad).is_err());
    }

    #[test]
    fn first_integrals_are_conserved_with_zero_l() {
        // ẋ = y, ẏ = -x has x^2 + y^2, but no affine first integral; use
        // ẋ = y - x, ẏ = x - y with p = x + y.
        let x = Polynomial::<BigRational>::var(2, 0);
        let y = Polynomial::<BigRational>::var(2, 1);
        let sys = OdeSystem::polynomial(vec![&y - &x, &x - &y]).unwrap();
        let d = crate::linalg::Matrix::from_rows(vec![vec![rat_int(1), rat_int(1)]]);
        let hs = HigherIntegralSystem::linear(d, crate::linalg::Matrix::zeros(1, 1), &sys).unwrap();
        let t = ButcherTableau::by_id("rk4").unwrap();
        let c = check_higher_integrals(&t, &sys, &hs, &[0.3, 0.9], 0.1).unwrap();
        assert!(c.residual < 1e-15);
        assert_eq!(c.r_hl, vec![1.0]);
    }
}
