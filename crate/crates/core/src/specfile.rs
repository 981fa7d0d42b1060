//! Line-oriented `.ode` files.
//!
//! ```text
//! # comments start with '#'
//! [system]
//! name = lv3
//! variables = x1, x2, x3
//! description = three-species Lotka-Volterra
//!
//! [parameters]
//! b = 1/2
//!
//! [field]
//! x1 = x1*(x2 - 2*x3 + b)
//! x2 = x2*(-x1 + 3*x3 + b)
//! x3 = x3*(2*x1 - 3*x2 + b)
//!
//! [integrals]
//! total = x1 + x2 + x3 ; b          # name = p ; cofactor
//!
//! [higher]
//! forms = x1 + x2 + x3 ; x1 + x2    # affine forms, ';'-separated
//! L = b, 1 ; 0, b                   # rows ';'-separated, entries ','
//!
//! [quadratic]
//! H = 1, 0 ; 0, 1                   # symmetric S for the [higher] forms
//!
//! [tableau]
//! name = my-heun
//! A = 0, 0 ; 1, 0
//! b = 1/2, 1/2
//! order = 2
//!
//! [run]
//! x0 = 1, 0, 1
//! h = 1e-2
//! steps = 1000
//! tableau = forward-euler
//! ```
//!
//! Expressions use the polynomial grammar; parameter names may appear
//! anywhere an expression is expected. Every declared integral, higher
//! system and quadratic invariant is checked exactly when the file loads.

use std::collections::BTreeMap;
use std::fmt::Write;

use num_rational::BigRational;

use crate::darboux::{HigherIntegralSystem, QuadraticInvariant, SecondIntegral};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::polycore::{parse_number, parse_polynomial_with, parse_rational_with, AffineForm};
use crate::rk::{ButcherTableau, OdeSystem};
use crate::surd::Surd;

/// Defaults for running a fixture.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunDefaults {
    pub x0: Option<Vec<f64>>,
    pub h: Option<f64>,
    pub steps: Option<usize>,
    pub tableau: Option<String>,
}

#[derive(Clone, Debug)]
pub struct OdeSpec {
    pub name: String,
    pub description: String,
    pub params: BTreeMap<String, BigRational>,
    pub system: OdeSystem,
    pub integrals: Vec<SecondIntegral>,
    pub higher: Option<HigherIntegralSystem>,
    pub quadratic: Vec<(String, QuadraticInvariant)>,
    pub tableaux: Vec<ButcherTableau>,
    pub run: RunDefaults,
}

impl OdeSpec {
    pub fn integral(&self, name: &str) -> Option<&SecondIntegral> {
        self.integrals.iter().find(|i| i.name == name)
    }

    /// Declared integrals that are affine, with their forms.
    pub fn affine_integrals(&self) -> Vec<(&SecondIntegral, AffineForm)> {
        self.integrals.iter().filter_map(|i| i.affine().map(|a| (i, a))).collect()
    }

    /// Pretty-prints in the same format; parameters are already
    /// substituted into the printed expressions.
    pub fn render(&self) -> String {
        let vars = self.system.vars();
        let mut out = String::new();
        let _ = writeln!(out, "[system]\nname = {}\nvariables = {}", self.name, vars.join(", "));
        if !self.description.is_empty() {
            let _ = writeln!(out, "description = {}", self.description);
        }
        if !self.params.is_empty() {
            let _ = writeln!(out, "\n[parameters]");
            for (k, v) in &self.params {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        let _ = writeln!(out, "\n[field]");
        for (v, f) in vars.iter().zip(self.system.render()) {
            let _ = writeln!(out, "{v} = {f}");
        }
        if !self.integrals.is_empty() {
            let _ = writeln!(out, "\n[integrals]");
            for i in &self.integrals {
                let _ = writeln!(out, "{} = {} ; {}", i.name, i.p.render(vars), i.cofactor.render(vars));
            }
        }
        if let Some(h) = &self.higher {
            let forms: Vec<String> = h.forms().iter().map(|f| f.to_polynomial().render(vars)).collect();
            let _ = writeln!(out, "\n[higher]\nforms = {}\nL = {}", forms.join(" ; "), matrix_text(&h.l));
        }
        if !self.quadratic.is_empty() {
            let _ = writeln!(out, "\n[quadratic]");
            for (name, q) in &self.quadratic {
                let _ = writeln!(out, "{name} = {}", matrix_text(&q.s));
            }
        }
        for t in &self.tableaux {
            if let (Some(a), Some(b)) = (t.a_rational(), t.b_rational()) {
                let bs: Vec<String> = b.iter().map(|v| v.to_string()).collect();
                let _ = writeln!(
                    out,
                    "\n[tableau]\nname = {}\nA = {}\nb = {}\norder = {}",
                    t.id(),
                    matrix_text(&a),
                    bs.join(", "),
                    t.order()
                );
            }
        }
        let r = &self.run;
        if r != &RunDefaults::default() {
            let _ = writeln!(out, "\n[run]");
            if let Some(x0) = &r.x0 {
                let xs: Vec<String> = x0.iter().map(|v| format!("{v:e}")).collect();
                let _ = writeln!(out, "x0 = {}", xs.join(", "));
            }
            if let Some(h) = r.h {
                let _ = writeln!(out, "h = {h:e}");
            }
            if let Some(s) = r.steps {
                let _ = writeln!(out, "steps = {s}");
            }
            if let Some(t) = &r.tableau {
                let _ = writeln!(out, "tableau = {t}");
            }
        }
        out
    }
}

fn matrix_text(m: &Matrix<BigRational>) -> String {
    m.to_rows()
        .iter()
        .map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "))
        .collect::<Vec<_>>()
        .join(" ; ")
}

#[derive(Default)]
struct Raw {
    system: Vec<(usize, String, String)>,
    params: Vec<(usize, String, String)>,
    field: Vec<(usize, String, String)>,
    integrals: Vec<(usize, String, String)>,
    higher: Vec<(usize, String, String)>,
    quadratic: Vec<(usize, String, String)>,
    tableaux: Vec<Vec<(usize, String, String)>>,
    run: Vec<(usize, String, String)>,
}

fn spec_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Spec { line, msg: msg.into() }
}

/// Attaches the file line to errors raised while reading an entry.
fn at<T>(line: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Spec { .. } => e,
        other => spec_err(line, other.to_string()),
    })
}

fn split_sections(text: &str) -> Result<Raw> {
    let mut raw = Raw::default();
    let mut section = String::new();
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = name.trim().to_string();
            if section == "tableau" {
                raw.tableaux.push(vec![]);
            }
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| spec_err(ln, "expected `key = value`"))?;
        let entry = (ln, k.trim().to_string(), v.trim().to_string());
        match section.as_str() {
            "system" => raw.system.push(entry),
            "parameters" => raw.params.push(entry),
            "field" => raw.field.push(entry),
            "integrals" => raw.integrals.push(entry),
            "higher" => raw.higher.push(entry),
            "quadratic" => raw.quadratic.push(entry),
            "tableau" => raw.tableaux.last_mut().expect("opened above").push(entry),
            "run" => raw.run.push(entry),
            "" => return Err(spec_err(ln, "entry before any section")),
            other => return Err(spec_err(ln, format!("unknown section [{other}]"))),
        }
    }
    Ok(raw)
}

fn lookup<'a>(entries: &'a [(usize, String, String)], key: &str) -> Option<&'a (usize, String, String)> {
    entries.iter().find(|(_, k, _)| k == key)
}

fn constant(text: &str, params: &BTreeMap<String, BigRational>) -> Result<BigRational> {
    let r = parse_rational_with(text, &[], params)?;
    r.as_polynomial()
        .and_then(|p| p.as_constant())
        .ok_or_else(|| Error::Parse { pos: 1, msg: format!("`{text}` is not a constant") })
}

fn matrix(text: &str, params: &BTreeMap<String, BigRational>) -> Result<Matrix<BigRational>> {
    let rows: Vec<Vec<BigRational>> = text
        .split(';')
        .map(|r| r.split(',').map(|e| constant(e.trim(), params)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let w = rows[0].len();
    if rows.iter().any(|r| r.len() != w) {
        return Err(Error::Parse { pos: 1, msg: "ragged matrix".into() });
    }
    Ok(Matrix::from_rows(rows))
}

fn floats(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|e| {
            let e = e.trim();
            e.parse::<f64>().map_err(|_| Error::Parse { pos: 1, msg: format!("`{e}` is not a number") })
        })
        .collect()
}

pub fn parse_spec(text: &str) -> Result<OdeSpec> {
    let raw = split_sections(text)?;
    let (_, _, name) = lookup(&raw.system, "name").ok_or_else(|| spec_err(1, "missing `name` in [system]"))?;
    let (vl, _, vars) =
        lookup(&raw.system, "variables").ok_or_else(|| spec_err(1, "missing `variables` in [system]"))?;
    let vars: Vec<String> = vars.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
    if vars.is_empty() {
        return Err(spec_err(*vl, "no variables"));
    }
    let description = lookup(&raw.system, "description").map(|e| e.2.clone()).unwrap_or_default();

    let mut params = BTreeMap::new();
    for (ln, k, v) in &raw.params {
        if vars.contains(k) {
            return Err(spec_err(*ln, format!("parameter `{k}` shadows a variable")));
        }
        let val = at(*ln, parse_number(v).or_else(|_| constant(v, &params)))?;
        params.insert(k.clone(), val);
    }

    let mut field = Vec::with_capacity(vars.len());
    for v in &vars {
        let (ln, _, expr) = lookup(&raw.field, v).ok_or_else(|| spec_err(*vl, format!("no field entry for `{v}`")))?;
        field.push(at(*ln, parse_rational_with(expr, &vars, &params))?);
    }
    if let Some((ln, k, _)) = raw.field.iter().find(|(_, k, _)| !vars.contains(k)) {
        return Err(spec_err(*ln, format!("`{k}` is not a declared variable")));
    }
    let system = OdeSystem::new(name.clone(), vars.clone(), field)?.with_params(params.clone());

    let mut integrals = Vec::new();
    for (ln, k, v) in &raw.integrals {
        let (p, c) = v.split_once(';').ok_or_else(|| spec_err(*ln, "expected `p ; cofactor`"))?;
        let p = at(*ln, parse_polynomial_with(p.trim(), &vars, &params))?;
        let c = at(*ln, parse_rational_with(c.trim(), &vars, &params))?;
        integrals.push(at(*ln, SecondIntegral::verified(k.clone(), p, c, &system))?);
    }

    let higher = if raw.higher.is_empty() {
        None
    } else {
        let (fl, _, forms) = lookup(&raw.higher, "forms").ok_or_else(|| spec_err(raw.higher[0].0, "missing `forms`"))?;
        let (ll, _, l) = lookup(&raw.higher, "L").ok_or_else(|| spec_err(raw.higher[0].0, "missing `L`"))?;
        let forms: Vec<AffineForm> = forms
            .split(';')
            .map(|f| {
                let p = at(*fl, parse_polynomial_with(f.trim(), &vars, &params))?;
                AffineForm::from_polynomial(&p).ok_or_else(|| spec_err(*fl, format!("`{}` is not affine", f.trim())))
            })
            .collect::<Result<_>>()?;
        let l = at(*ll, matrix(l, &params))?;
        let d = Matrix::from_rows(forms.iter().map(|f| f.alpha.clone()).collect());
        let d0 = forms.iter().map(|f| f.alpha0.clone()).collect();
        Some(at(*ll, HigherIntegralSystem::new(d, d0, l, &system))?)
    };

    let mut quadratic = Vec::new();
    for (ln, k, v) in &raw.quadratic {
        let basis = higher.clone().ok_or_else(|| spec_err(*ln, "[quadratic] needs a [higher] section"))?;
        let s = at(*ln, matrix(v, &params))?;
        quadratic.push((k.clone(), at(*ln, QuadraticInvariant::new(basis, s))?));
    }

    let mut tableaux = Vec::new();
    for t in &raw.tableaux {
        let first = t.first().map(|e| e.0).unwrap_or(1);
        let get = |key: &str| lookup(t, key).ok_or_else(|| spec_err(first, format!("[tableau] needs `{key}`")));
        let (_, _, tname) = get("name")?;
        let (al, _, a) = get("A")?;
        let (bl, _, b) = get("b")?;
        let order = match lookup(t, "order") {
            Some((ol, _, o)) => o.parse::<u32>().map_err(|_| spec_err(*ol, "order must be an integer"))?,
            None => 1,
        };
        let a = at(*al, matrix(a, &params))?.map(|v| Surd::rational(v.clone()));
        let b: Vec<Surd> = at(*bl, matrix(b, &params))?.row(0).into_iter().map(Surd::rational).collect();
        tableaux.push(at(*al, ButcherTableau::new(tname.clone(), tname.clone(), a, b, None, order))?);
    }

    let mut run = RunDefaults::default();
    for (ln, k, v) in &raw.run {
        match k.as_str() {
            "x0" => {
                let x0 = at(*ln, floats(v))?;
                if x0.len() != vars.len() {
                    return Err(spec_err(*ln, format!("x0 has {} entries, expected {}", x0.len(), vars.len())));
                }
                run.x0 = Some(x0);
            }
            "h" => run.h = Some(at(*ln, floats(v))?[0]),
            "steps" => run.steps = Some(v.parse().map_err(|_| spec_err(*ln, "steps must be an integer"))?),
            "tableau" => run.tableau = Some(v.clone()),
            other => return Err(spec_err(*ln, format!("unknown [run] key `{other}`"))),
        }
    }

    Ok(OdeSpec { name: name.clone(), description, params, system, integrals, higher, quadratic, tableaux, run })
}
