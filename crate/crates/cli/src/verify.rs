//! `verify` suites: one report row per (fixture, tableau, quantity).

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rkdarboux::darboux::{
    check_higher_integrals, check_modified_integral, check_pade_quadratic, check_rational_integral, modified_exponent,
    preservation_with, SecondIntegral,
};
use rkdarboux::polycore::univariate::{dense, roots};
use rkdarboux::polycore::Polynomial;
use rkdarboux::rk::{is_symmetric_stability, stability_function, ButcherTableau, OdeSystem, REGISTERED};
use rkdarboux::specfile::OdeSpec;
use rkdarboux::{CofactorEvaluator64, Poly, RkMap64};

use crate::commands::{exact, resolve_tableau, to_f64, CliResult};
use crate::report::{ExperimentReport, Row};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Thm2,
    Rational,
    Pade,
    Higher,
    Negative,
}

impl Suite {
    pub fn default_tol(self) -> f64 {
        match self {
            Suite::Thm2 | Suite::Higher => 1e-11,
            Suite::Rational => 1e-10,
            Suite::Pade => 1e-9,
            Suite::Negative => 1e-5,
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyArgs {
    pub suite: Suite,
    /// Tableau ids; `all` means the registered set, empty means each
    /// fixture's own run tableau.
    pub tableaux: Vec<String>,
    pub samples: usize,
    pub h: Option<f64>,
    pub steps: Option<usize>,
    pub seed: u64,
    pub tol: Option<f64>,
}

impl Default for VerifyArgs {
    fn default() -> Self {
        VerifyArgs { suite: Suite::Thm2, tableaux: vec![], samples: 50, h: None, steps: None, seed: 0, tol: None }
    }
}

/// Tolerance for the modified (log/power) integral in the rational suite.
const MODIFIED_TOL: f64 = 1e-9;
/// The empirical ratio must differ by more than this across one level set.
const BASIS_GAP: f64 = 1e-3;

pub fn cmd_verify(specs: &[OdeSpec], args: &VerifyArgs) -> CliResult<ExperimentReport> {
    let mut report = ExperimentReport::new(args.seed);
    let tol = args.tol.unwrap_or(args.suite.default_tol());
    report.tolerances.insert(format!("{:?}", args.suite).to_lowercase(), tol);
    if args.suite == Suite::Rational {
        report.tolerances.insert("modified".into(), MODIFIED_TOL);
    }
    if args.suite == Suite::Negative {
        report.tolerances.insert("basis_gap".into(), BASIS_GAP);
    }
    let mut jobs = vec![];
    for (si, spec) in specs.iter().enumerate() {
        let ids: Vec<String> = if args.tableaux.iter().any(|t| t == "all") {
            REGISTERED.iter().map(|s| s.to_string()).collect()
        } else if args.tableaux.is_empty() {
            vec![spec.run.tableau.clone().unwrap_or_else(|| "forward-euler".into())]
        } else {
            args.tableaux.clone()
        };
        for (ti, id) in ids.iter().enumerate() {
            jobs.push((si, ti, spec, resolve_tableau(Some(spec), id)?));
        }
    }
    let rows: Vec<Vec<Row>> = jobs
        .par_iter()
        .map(|(si, ti, spec, t)| {
            let seed = args.seed ^ ((*si as u64) << 32 | *ti as u64);
            match args.suite {
                Suite::Thm2 => cofactor_identity(spec, t, args, tol, seed),
                Suite::Rational => rational(spec, t, args, tol),
                Suite::Pade => pade(spec, t, args, tol),
                Suite::Higher => higher(spec, t, args, tol, seed),
                Suite::Negative => negative(spec, t, args, tol),
            }
        })
        .collect();
    report.rows = rows.into_iter().flatten().collect();
    Ok(report)
}

fn run_params(spec: &OdeSpec, args: &VerifyArgs) -> (f64, usize) {
    (args.h.or(spec.run.h).unwrap_or(1e-2), args.steps.or(spec.run.steps).unwrap_or(1000))
}

/// A point in `[-1, 1]^n` away from poles of a rational field.
fn sample_point(rng: &mut ChaCha8Rng, sys: &OdeSystem) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..sys.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        if sys.field().iter().all(|f| f.den().eval(&x).map(|d: f64| d.abs() > 0.2).unwrap_or(false)) {
            return x;
        }
    }
}

fn cofactor_identity(spec: &OdeSpec, t: &ButcherTableau, args: &VerifyArgs, tol: f64, seed: u64) -> Vec<Row> {
    let hmax = args.h.unwrap_or(0.1).abs();
    let affine = spec.affine_integrals();
    if affine.is_empty() {
        return vec![Row::skip(&spec.name, t.id(), hmax, "thm2", "no affine integrals")];
    }
    let mut rows = vec![];
    for (integral, form) in affine {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ev = CofactorEvaluator64::new(t, &spec.system, &integral.cofactor);
        let (mut worst, mut done, mut failed) = (0.0f64, 0, 0);
        while done < args.samples && failed <= args.samples / 10 {
            let x = sample_point(&mut rng, &spec.system);
            let h = rng.random_range(-hmax..=hmax);
            match preservation_with(&ev, &form, &x, h) {
                Ok(p) => {
                    worst = worst.max(p.relative());
                    done += 1;
                }
                Err(_) => failed += 1,
            }
        }
        let q = format!("thm2:{}", integral.name);
        rows.push(if done < args.samples {
            Row::judged(&spec.name, t.id(), hmax, q, worst, false, "stage solver failed on too many samples")
        } else {
            Row::judged(&spec.name, t.id(), hmax, q, worst, worst <= tol, "residual above tolerance")
        });
    }
    rows
}

fn trajectory(spec: &OdeSpec, t: &ButcherTableau, h: f64, steps: usize) -> Result<Vec<Vec<f64>>, String> {
    let x0 = spec.run.x0.clone().ok_or("fixture has no x0")?;
    RkMap64::new(t, &spec.system).trajectory(&x0, h, steps).map_err(|e| e.to_string())
}

fn rational(spec: &OdeSpec, t: &ButcherTableau, args: &VerifyArgs, tol: f64) -> Vec<Row> {
    let (h, steps) = run_params(spec, args);
    let affine = spec.affine_integrals();
    let mut rows = vec![];
    let mut traj_cache: Option<Result<Vec<Vec<f64>>, String>> = None;
    let mut traj = || traj_cache.get_or_insert_with(|| trajectory(spec, t, h, steps)).clone();
    for (a, (ia, fa)) in affine.iter().enumerate() {
        for (ib, fb) in affine.iter().skip(a + 1) {
            let q = format!("{}/{}", ia.name, ib.name);
            if ia.cofactor.equivalent(&ib.cofactor) {
                rows.push(match traj() {
                    Ok(tr) => match check_rational_integral(fa, fb, &tr) {
                        Ok(d) => Row::judged(&spec.name, t.id(), h, q, d, d <= tol, "quotient drift above tolerance"),
                        Err(e) => Row::judged(&spec.name, t.id(), h, q, f64::NAN, false, &e.to_string()),
                    },
                    Err(e) => Row::judged(&spec.name, t.id(), h, q, f64::NAN, false, &format!("integration failed: {e}")),
                });
                continue;
            }
            let (Some(c1), Some(c2)) = (ia.constant_cofactor(), ib.constant_cofactor()) else {
                continue;
            };
            if c1.is_zero() {
                continue;
            }
            let (c1, c2) = (to_f64(&c1), to_f64(&c2));
            let r = stability_function(t);
            let q = format!("{}^s/{}", ia.name, ib.name);
            let st = match modified_exponent(&r, h, c1, c2) {
                Ok(s) => s,
                Err(e) => {
                    rows.push(Row::skip(&spec.name, t.id(), h, q, &e.to_string()));
                    continue;
                }
            };
            let tr = match traj() {
                Ok(tr) => tr,
                Err(e) => {
                    rows.push(Row::judged(&spec.name, t.id(), h, q, f64::NAN, false, &format!("integration failed: {e}")));
                    continue;
                }
            };
            match check_modified_integral(fa, fb, st, &tr) {
                Ok(d) => {
                    rows.push(Row::judged(&spec.name, t.id(), h, q.clone(), d, d <= MODIFIED_TOL, "modified drift above tolerance"));
                    if let Ok(plain) = check_modified_integral(fa, fb, c2 / c1, &tr) {
                        rows.push(Row::judged(
                            &spec.name,
                            t.id(),
                            h,
                            format!("{q}:unmodified"),
                            plain,
                            plain >= 10.0 * d,
                            "unmodified exponent drifts less than 10x the modified one",
                        ));
                    }
                }
                Err(e) => rows.push(Row::skip(&spec.name, t.id(), h, q, &e.to_string())),
            }
        }
    }
    if rows.is_empty() {
        rows.push(Row::skip(&spec.name, t.id(), h, "rational", "no pair of integrals with related cofactors"));
    }
    rows
}

fn pade(spec: &OdeSpec, t: &ButcherTableau, args: &VerifyArgs, tol: f64) -> Vec<Row> {
    let (h, steps) = run_params(spec, args);
    if spec.quadratic.is_empty() {
        return vec![Row::skip(&spec.name, t.id(), h, "pade", "no quadratic invariant")];
    }
    if !is_symmetric_stability(&stability_function(t)) {
        return spec
            .quadratic
            .iter()
            .map(|(n, _)| Row::skip(&spec.name, t.id(), h, format!("pade:{n}"), "tableau not diagonal Pade"))
            .collect();
    }
    let tr = match trajectory(spec, t, h, steps) {
        Ok(tr) => tr,
        Err(e) => return vec![Row::judged(&spec.name, t.id(), h, "pade", f64::NAN, false, &format!("integration failed: {e}"))],
    };
    let mut rows = vec![];
    for (name, inv) in &spec.quadratic {
        match check_pade_quadratic(t, inv, &tr) {
            Ok(d) => {
                rows.push(Row::judged(&spec.name, t.id(), h, format!("pade:{name}"), d.max, d.max <= tol, "drift above tolerance"));
                let growth = if d.first_quarter_max > 0.0 { d.last_quarter_max / d.first_quarter_max } else { 0.0 };
                rows.push(Row::judged(
                    &spec.name,
                    t.id(),
                    h,
                    format!("pade:{name}:growth"),
                    growth,
                    d.bounded(2.0) || d.max <= f64::EPSILON,
                    "secular growth",
                ));
            }
            Err(e) => rows.push(Row::skip(&spec.name, t.id(), h, format!("pade:{name}"), &e.to_string())),
        }
    }
    rows
}

fn higher(spec: &OdeSpec, t: &ButcherTableau, args: &VerifyArgs, tol: f64, seed: u64) -> Vec<Row> {
    let (h, _) = run_params(spec, args);
    let Some(hs) = &spec.higher else {
        return vec![Row::skip(&spec.name, t.id(), h, "higher", "no higher integrals")];
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..args.samples {
        let x = sample_point(&mut rng, &spec.system);
        match check_higher_integrals(t, &spec.system, hs, &x, h) {
            Ok(c) => worst = worst.max(c.relative()),
            Err(e) => return vec![Row::judged(&spec.name, t.id(), h, "higher", f64::NAN, false, &e.to_string())],
        }
    }
    vec![Row::judged(&spec.name, t.id(), h, "higher", worst, worst <= tol, "residual above tolerance")]
}

/// Another point on the level set of `p` through `a`: the first real root
/// `t ≠ 0` of `p(a + t d) = p(a)` over a few fixed directions.
fn same_level_point(p: &Poly, a: &[f64]) -> Option<Vec<f64>> {
    let n = a.len();
    let dirs: Vec<Vec<f64>> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| (0..n).map(|k| if k == i { -1.0 } else if k == j { 1.0 } else { 0.0 }).collect())
        .chain((0..n).map(|i| (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect()))
        .collect();
    let level = p.eval_exact(&a.iter().map(|v| exact(*v)).collect::<Vec<_>>());
    for d in dirs {
        let reps: Vec<Poly> = (0..n)
            .map(|k| Polynomial::affine(&[exact(d[k])], exact(a[k])))
            .collect();
        let g = &p.compose(&reps) - &Polynomial::constant(1, level.clone());
        if g.is_zero() {
            continue;
        }
        let best = roots(&dense(&g, 0))
            .into_iter()
            .filter(|z| z.im.abs() < 1e-9 && z.re.abs() > 1e-6)
            .map(|z| z.re)
            .min_by(|x, y| x.abs().total_cmp(&y.abs()));
        if let Some(t) = best {
            return Some((0..n).map(|k| a[k] + t * d[k]).collect());
        }
    }
    None
}

fn negative(spec: &OdeSpec, t: &ButcherTableau, args: &VerifyArgs, tol: f64) -> Vec<Row> {
    let (h, _) = run_params(spec, args);
    let quad: Vec<&SecondIntegral> = spec.integrals.iter().filter(|i| i.affine().is_none()).collect();
    if quad.is_empty() {
        return vec![Row::skip(&spec.name, t.id(), h, "negative", "no non-affine integral")];
    }
    let map = RkMap64::new(t, &spec.system);
    let x0 = spec.run.x0.clone().unwrap_or_else(|| vec![0.5; spec.system.dim()]);
    let mut rows = vec![];
    for i in quad {
        let q = format!("negative:{}", i.name);
        let drift = map
            .step(&x0, h)
            .map_err(|e| e.to_string())
            .and_then(|s| Ok((i.p.eval(&s.next).map_err(|e| e.to_string())? - i.p.eval(&x0).map_err(|e| e.to_string())?).abs()));
        rows.push(match drift {
            Ok(d) => Row::judged(&spec.name, t.id(), h, q.clone(), d, d >= tol, "one-step drift below threshold"),
            Err(e) => Row::judged(&spec.name, t.id(), h, q.clone(), f64::NAN, false, &e),
        });

        // empirical ratio p(φ_h(x))/p(x) at two points of one level set p = k ≠ 0
        let a: Vec<f64> = x0.iter().enumerate().map(|(k, v)| if k == 0 { v + 0.1 } else { *v }).collect();
        let ratio = |x: &[f64]| -> Option<f64> {
            let px: f64 = i.p.eval(x).ok()?;
            let next = map.step(x, h).ok()?.next;
            Some(i.p.eval(&next).ok()? / px)
        };
        let gap = same_level_point(&i.p, &a).and_then(|b| Some((ratio(&a)? - ratio(&b)?).abs()));
        rows.push(match gap {
            Some(g) => Row::judged(
                &spec.name,
                t.id(),
                h,
                format!("{q}:basis"),
                g,
                g > BASIS_GAP,
                "cofactor ratio agrees across the level set",
            ),
            None => Row::skip(&spec.name, t.id(), h, format!("{q}:basis"), "no second point on the level set"),
        });
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use rkdarboux::fixtures::fixture;

    #[test]
    fn level_set_partner() {
        let spec = fixture("circle-negative").unwrap();
        let p = &spec.integral("circle").unwrap().p;
        let b = same_level_point(p, &[1.1, 0.0]).unwrap();
        let pb: f64 = p.eval(&b).unwrap();
        assert!((pb - 0.21).abs() < 1e-12);
        assert!((b[0] - 1.1).abs() > 0.1);
    }
}
