//! Subcommand implementations. Each returns its output as a string so the
//! binary and the tests share one code path.

use std::fmt::Write;
use std::path::Path;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use rkdarboux::darboux::SecondIntegral;
use rkdarboux::detect::{decouple, detect_rational_integral, find_constant_cofactor_dps, DetectOptions, DpValue};
use rkdarboux::fixtures::{fixture, FIXTURE_NAMES};
use rkdarboux::polycore::Polynomial;
use rkdarboux::rk::{diagonal_pade_coefficients, is_diagonal_pade, is_symmetric_stability, stability_function};
use rkdarboux::rk::{ButcherTableau, REGISTERED, TABLEAU_IDS};
use rkdarboux::specfile::{parse_spec, OdeSpec};
use rkdarboux::{Error, RkMap64, Surd};

use crate::report::fmt17;

/// A failure that is not a verification verdict. `code` is the process
/// exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub msg: String,
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError { code: 2, msg: msg.into() }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.msg)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Command output: `text` goes to stdout or `--output`, `notes` to stderr.
#[derive(Debug, Default, Clone)]
pub struct Outcome {
    pub text: String,
    pub notes: Vec<String>,
    pub failed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    Csv,
    #[default]
    Text,
}

/// A bundled fixture name, or a path to an `.ode` file.
pub fn load_spec(arg: &str) -> CliResult<OdeSpec> {
    if FIXTURE_NAMES.contains(&arg) {
        return Ok(fixture(arg)?);
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(CliError::input(format!("`{arg}` is neither a bundled fixture nor a file")));
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{arg}: {e}")))?;
    parse_spec(&text).map_err(|e| CliError::input(format!("{arg}: {e}")))
}

/// `all` expands to every bundled fixture.
pub fn load_specs(arg: &str) -> CliResult<Vec<OdeSpec>> {
    if arg == "all" {
        FIXTURE_NAMES.iter().map(|n| load_spec(n)).collect()
    } else {
        Ok(vec![load_spec(arg)?])
    }
}

/// Tableaux declared in the .ode file take precedence over the registry.
pub fn resolve_tableau(spec: Option<&OdeSpec>, id: &str) -> CliResult<ButcherTableau> {
    if let Some(t) = spec.and_then(|s| s.tableaux.iter().find(|t| t.id() == id)) {
        return Ok(t.clone());
    }
    Ok(ButcherTableau::by_id(id)?)
}

fn tracked<'a>(spec: &'a OdeSpec, names: &[String]) -> CliResult<Vec<&'a SecondIntegral>> {
    if names.iter().any(|n| n == "all") {
        return Ok(spec.integrals.iter().collect());
    }
    names
        .iter()
        .map(|n| spec.integral(n).ok_or_else(|| CliError::input(format!("{}: no integral named `{n}`", spec.name))))
        .collect()
}

/// Grid trajectories leave the plotted window here; several starts blow up
/// in finite time.
pub const DEFAULT_ESCAPE: f64 = 100.0;

#[derive(Clone, Debug)]
pub struct IntegrateArgs {
    pub tableau: Option<String>,
    pub x0: Option<Vec<f64>>,
    pub h: Option<f64>,
    pub steps: Option<usize>,
    pub track: Vec<String>,
    pub grid: bool,
    /// Grid trajectories stop once a coordinate exceeds this in magnitude.
    pub escape: f64,
}

impl Default for IntegrateArgs {
    fn default() -> Self {
        IntegrateArgs { tableau: None, x0: None, h: None, steps: None, track: vec![], grid: false, escape: DEFAULT_ESCAPE }
    }
}

pub fn cmd_integrate(spec: &OdeSpec, args: &IntegrateArgs) -> CliResult<Outcome> {
    let tid = args.tableau.clone().or_else(|| spec.run.tableau.clone()).unwrap_or_else(|| "forward-euler".into());
    let tableau = resolve_tableau(Some(spec), &tid)?;
    let h = args.h.or(spec.run.h).unwrap_or(1e-2);
    let steps = args.steps.or(spec.run.steps).unwrap_or(1000);
    let map = RkMap64::new(&tableau, &spec.system);
    if args.grid {
        return grid_sweep(spec, &map, h, steps, args);
    }
    let x0 = args
        .x0
        .clone()
        .or_else(|| spec.run.x0.clone())
        .ok_or_else(|| CliError::input("no initial condition: pass --x0 or set x0 in [run]"))?;
    if x0.len() != spec.system.dim() {
        return Err(CliError::input(format!("--x0 has {} entries, expected {}", x0.len(), spec.system.dim())));
    }
    let track = tracked(spec, &args.track)?;
    let mut out = String::new();
    let mut header: Vec<String> = vec!["t".into()];
    header.extend(spec.system.vars().iter().cloned());
    header.extend(track.iter().map(|i| i.name.clone()));
    let _ = writeln!(out, "{}", header.join(","));
    let mut outcome = Outcome::default();
    let mut x = x0;
    for k in 0..=steps {
        let mut row: Vec<String> = vec![fmt17(k as f64 * h)];
        row.extend(x.iter().map(|v| fmt17(*v)));
        for i in &track {
            row.push(fmt17(i.p.eval(&x).unwrap_or(f64::NAN)));
        }
        let _ = writeln!(out, "{}", row.join(","));
        if k == steps {
            break;
        }
        match map.step(&x, h) {
            Ok(r) if r.next.iter().all(|v| v.is_finite()) => x = r.next,
            Ok(_) => {
                outcome.notes.push(format!("step {k}: state is no longer finite"));
                outcome.failed = true;
                break;
            }
            Err(e) => {
                outcome.notes.push(format!("step {k}: {e}"));
                outcome.failed = true;
                break;
            }
        }
    }
    outcome.text = out;
    Ok(outcome)
}

struct GridResult {
    x0: Vec<f64>,
    steps_done: usize,
    status: String,
    /// Per tracked integral: `(p(x0), max |p(x_k) - p(x0)|, p(x_last))`.
    values: Vec<(f64, f64, f64)>,
}

/// The 21 × 21 sweep over starts `(-10 + i, -10 + j)`.
fn grid_sweep(spec: &OdeSpec, map: &RkMap64, h: f64, steps: usize, args: &IntegrateArgs) -> CliResult<Outcome> {
    if spec.system.dim() != 2 {
        return Err(CliError::input("--grid needs a two-dimensional system"));
    }
    let track = if args.track.is_empty() { spec.integrals.iter().collect() } else { tracked(spec, &args.track)? };
    let starts: Vec<Vec<f64>> =
        (0..=20).flat_map(|i| (0..=20).map(move |j| vec![-10.0 + i as f64, -10.0 + j as f64])).collect();
    let results: Vec<GridResult> = starts
        .par_iter()
        .map(|x0| {
            let p0: Vec<f64> = track.iter().map(|i| i.p.eval(x0).unwrap_or(f64::NAN)).collect();
            let mut worst = vec![0.0f64; track.len()];
            let mut x = x0.clone();
            let mut status = "ok".to_string();
            let mut done = 0;
            while done < steps {
                match map.step(&x, h) {
                    Ok(r) if r.next.iter().all(|v| v.is_finite()) => x = r.next,
                    Ok(_) => {
                        status = "overflow".into();
                        break;
                    }
                    Err(e) => {
                        status = format!("error: {e}");
                        break;
                    }
                }
                done += 1;
                for (k, i) in track.iter().enumerate() {
                    worst[k] = worst[k].max((i.p.eval(&x).unwrap_or(f64::NAN) - p0[k]).abs());
                }
                if x.iter().any(|v| v.abs() > args.escape) {
                    status = "escaped".into();
                    break;
                }
            }
            let values = track
                .iter()
                .enumerate()
                .map(|(k, i)| (p0[k], worst[k], i.p.eval(&x).unwrap_or(f64::NAN)))
                .collect();
            GridResult { x0: x0.clone(), steps_done: done, status, values }
        })
        .collect();
    let vars = spec.system.vars();
    let mut out = format!(
        "{},{},integral,p0,on_level_set,steps,status,max_abs_change,final_value\n",
        format_args!("{}0", vars[0]),
        format_args!("{}0", vars[1])
    );
    let mut level_worst = 0.0f64;
    let mut failures = 0;
    for r in &results {
        if r.status.starts_with("error") {
            failures += 1;
        }
        for (k, i) in track.iter().enumerate() {
            let (p0, change, last) = r.values[k];
            let on = p0 == 0.0;
            if on {
                level_worst = level_worst.max(change);
            }
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                fmt17(r.x0[0]),
                fmt17(r.x0[1]),
                i.name,
                fmt17(p0),
                on,
                r.steps_done,
                r.status,
                fmt17(change),
                fmt17(last)
            );
        }
    }
    let notes = vec![
        format!("max |p(x_n) - p(x_0)| over zero-level-set starts: {level_worst:e}"),
        format!("{failures} of {} starts failed", results.len()),
    ];
    Ok(Outcome { text: out, notes, failed: false })
}

fn surd_form(alpha: &[Surd], alpha0: &Surd, vars: &[String]) -> String {
    Polynomial::<Surd>::affine(alpha, alpha0.clone()).render(vars)
}

pub fn cmd_find_darboux(spec: &OdeSpec) -> CliResult<Outcome> {
    let vars = spec.system.vars().to_vec();
    let mut s = String::new();
    let _ = writeln!(s, "system: {} ({} variables)", spec.name, vars.len());
    if !spec.system.is_polynomial() {
        return Err(CliError::input(format!("{}: constant-cofactor search needs a polynomial field", spec.name)));
    }
    let dps = find_constant_cofactor_dps(&spec.system);
    if dps.is_empty() {
        let _ = writeln!(s, "no constant-cofactor affine Darboux polynomials");
        return Ok(Outcome { text: s, ..Default::default() });
    }
    let _ = writeln!(s, "constant-cofactor affine Darboux polynomials:");
    for dp in &dps {
        match &dp.value {
            DpValue::Exact { alpha, alpha0, lambda } => {
                let _ = writeln!(s, "  p = {}    lambda = {lambda}", surd_form(alpha, alpha0, &vars));
            }
            DpValue::Numeric { alpha, alpha0, lambda } => {
                let coeffs: Vec<String> = alpha.iter().map(|a| format!("{a:.12}")).collect();
                let _ = writeln!(
                    s,
                    "  alpha = ({}), alpha0 = {alpha0:.12}    lambda = {lambda:.12}  (numeric)",
                    coeffs.join(", ")
                );
            }
        }
    }
    let d = decouple(&spec.system)?;
    let _ = writeln!(s, "\ndecoupling: m = {}", d.m());
    if d.budget_hit {
        let _ = writeln!(s, "  (search budget reached; the chain may not be maximal)");
    }
    for (k, f) in d.forms().iter().enumerate() {
        let _ = writeln!(s, "  p{} = {}", k + 1, f.to_polynomial().render(&vars));
    }
    if d.m() > 0 {
        let _ = write!(s, "Q =\n{}", d.q);
        let _ = write!(s, "L =\n{}", d.l);
    }
    let z: Vec<String> = (1..=vars.len()).map(|i| format!("z{i}")).collect();
    let _ = writeln!(s, "transformed field (z1..z{} = p, remaining z = kept coordinates):", d.m());
    for (name, f) in z.iter().zip(&d.transformed_field) {
        let _ = writeln!(s, "  {name}' = {}", f.render(&z));
    }
    Ok(Outcome { text: s, ..Default::default() })
}

pub fn cmd_detect_rational(spec: &OdeSpec, opts: &DetectOptions) -> CliResult<Outcome> {
    let vars = spec.system.vars().to_vec();
    let rep = detect_rational_integral(&spec.system, opts)?;
    let mut vh = vars.clone();
    vh.push("h".into());
    let mut s = String::new();
    let _ = writeln!(s, "system: {}", spec.name);
    let _ = writeln!(s, "det(I + h Df) = {}", rep.det.render(&vh));
    let _ = writeln!(s, "cofactor candidates: {}", rep.candidates.len());
    for c in &rep.candidates {
        let _ = writeln!(s, "  c = {}    ({:?})", c.c.render(&vars), c.source);
    }
    if rep.ambiguous_points > 0 {
        let _ = writeln!(s, "tracking points skipped near root collisions: {}", rep.ambiguous_points);
    }
    if rep.integrals.is_empty() {
        let _ = writeln!(s, "no rational integrals found");
    }
    for ri in &rep.integrals {
        let h = ri.h().map(|h| h.render(&vars)).unwrap_or_default();
        let _ = writeln!(
            s,
            "H = {h}    c = {}    divisibility: {}",
            ri.cofactor.render(&vars),
            ri.divisibility
        );
        for f in &ri.forms[2..] {
            let _ = writeln!(s, "  further form with the same cofactor: {}", f.to_polynomial().render(&vars));
        }
    }
    for ri in &rep.single_forms {
        let _ = writeln!(
            s,
            "second integral {}    c = {}",
            ri.forms[0].to_polynomial().render(&vars),
            ri.cofactor.render(&vars)
        );
    }
    Ok(Outcome { text: s, ..Default::default() })
}

pub fn cmd_stability(id: &str, samples: usize, format: Format) -> CliResult<Outcome> {
    let t = resolve_tableau(None, id)?;
    let r = stability_function(&t);
    let z = vec!["z".to_string()];
    let mut s = String::new();
    if format == Format::Text || samples == 0 {
        let _ = writeln!(s, "{} ({}), {} stages, order {}", t.id(), t.name(), t.stages(), t.order());
        let _ = writeln!(s, "R(z) = {}", r.render(&z));
        let _ = writeln!(s, "degrees: {}/{}", r.num().degree(), r.den().degree());
        let _ = writeln!(s, "R(-z)R(z) = 1: {}", if is_symmetric_stability(&r) { "yes" } else { "no" });
        if is_diagonal_pade(&t) {
            let k = r.num().degree();
            let coeffs: Vec<String> = diagonal_pade_coefficients(k).iter().map(|c| c.to_string()).collect();
            let _ = writeln!(s, "diagonal Pade of degree {k}, coefficients {}", coeffs.join(", "));
        }
    }
    if samples > 0 {
        if format == Format::Csv {
            s.push_str("z,R\n");
        }
        for k in 0..samples {
            let zv = if samples == 1 { 0.0 } else { -2.0 + 4.0 * k as f64 / (samples - 1) as f64 };
            let v: f64 = r.eval(&[zv]).unwrap_or(f64::NAN);
            let sep = if format == Format::Csv { "," } else { "  " };
            let _ = writeln!(s, "{}{sep}{}", fmt17(zv), fmt17(v));
        }
    }
    Ok(Outcome { text: s, ..Default::default() })
}

pub fn cmd_list_tableaux() -> Outcome {
    let mut s = String::from("id                    stages  order  explicit  R(-z)R(z)=1  name\n");
    for id in REGISTERED {
        let t = ButcherTableau::by_id(id).expect("registered");
        let _ = writeln!(
            s,
            "{:<21} {:>6}  {:>5}  {:<8}  {:<11}  {}",
            id,
            t.stages(),
            t.order(),
            t.is_explicit(),
            is_symmetric_stability(&stability_function(&t)),
            t.name()
        );
    }
    let _ = writeln!(s, "\naccepted identifiers: {}", TABLEAU_IDS.join(", "));
    Outcome { text: s, ..Default::default() }
}

pub fn cmd_list_fixtures() -> CliResult<Outcome> {
    let mut s = String::new();
    for name in FIXTURE_NAMES {
        let spec = fixture(name)?;
        let _ = writeln!(s, "{:<16} n={}  {}", name, spec.system.dim(), spec.description);
    }
    Ok(Outcome { text: s, ..Default::default() })
}

/// Exact rational approximation of a double (used for level-set searches).
pub(crate) fn exact(v: f64) -> BigRational {
    BigRational::from_float(v).unwrap_or_else(BigRational::zero)
}

pub(crate) fn to_f64(v: &BigRational) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}
