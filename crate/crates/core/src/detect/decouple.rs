//! Linear decoupling: a maximal set of affine forms `p̲ = Q x + q0` with
//! `d/dt p̲ = L p̲`.
//!
//! Forms are found one block at a time. A block is one rational form with
//! constant cofactor, or the two real forms of a DP whose cofactor lies in
//! a quadratic extension. After each block its zero set is substituted
//! into the field (pivot = coefficient of largest magnitude) and the search
//! repeats on the smaller system. A depth-first search over the candidate
//! blocks keeps the longest chain for which `Q f` stays affine.

use std::collections::HashSet;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::constant::find_constant_cofactor_dps_field;
use crate::darboux::HigherIntegralSystem;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::polycore::{AffineForm, Polynomial};
use crate::rk::OdeSystem;

type Poly = Polynomial<BigRational>;

/// Node budget for the block search.
pub const SEARCH_BUDGET: usize = 20_000;

#[derive(Clone, Debug)]
pub struct DecoupleResult {
    /// `m × n`, rows are the linear parts of the forms.
    pub q: Matrix<BigRational>,
    pub q0: Vec<BigRational>,
    /// `m × m` with `d/dt (Q x + q0) = L (Q x + q0)`.
    pub l: Matrix<BigRational>,
    /// `(n - m) × n` completion: unit rows at the non-pivot columns of
    /// `rref(Q)`.
    pub rbasis: Matrix<BigRational>,
    /// `[Q; Rbasis]`, invertible.
    pub g: Matrix<BigRational>,
    /// Field in the coordinates `z = G x + [q0; 0]`; the first `m`
    /// components equal `L z[..m]`.
    pub transformed_field: Vec<Poly>,
    /// Forms in the order they were found, grouped by block.
    pub blocks: Vec<Vec<AffineForm>>,
    /// The search stopped at its node budget; the chain may not be maximal.
    pub budget_hit: bool,
}

impl DecoupleResult {
    pub fn m(&self) -> usize {
        self.q.nrows()
    }

    pub fn forms(&self) -> Vec<AffineForm> {
        (0..self.m()).map(|i| AffineForm::new(self.q.row(i), self.q0[i].clone())).collect()
    }

    /// Basis-independent form: `Q' = rref(Q) = T Q`, `q0' = T q0` and
    /// `L' = T L T⁻¹`.
    pub fn canonical(&self) -> (Matrix<BigRational>, Vec<BigRational>, Matrix<BigRational>) {
        canonical(&self.q, &self.q0, &self.l)
    }

    pub fn to_higher_system(&self, sys: &OdeSystem) -> Result<HigherIntegralSystem> {
        HigherIntegralSystem::new(self.q.clone(), self.q0.clone(), self.l.clone(), sys)
    }
}

/// See [`DecoupleResult::canonical`]; usable on any `(Q, q0, L)` triple.
pub fn canonical(
    q: &Matrix<BigRational>,
    q0: &[BigRational],
    l: &Matrix<BigRational>,
) -> (Matrix<BigRational>, Vec<BigRational>, Matrix<BigRational>) {
    let m = q.nrows();
    if m == 0 {
        return (q.clone(), vec![], l.clone());
    }
    let (r, piv) = q.rref();
    let qp = Matrix::from_fn(m, m, |i, j| q[(i, piv[j])].clone());
    let t = qp.inverse().expect("Q has full row rank");
    let tinv = qp;
    let rq = Matrix::from_rows((0..m).map(|i| r.row(i)).collect());
    (rq, t.mul_vec(q0), &(&t * l) * &tinv)
}

#[derive(Clone)]
struct Node {
    n: usize,
    keep: Vec<usize>,
    /// Eliminated variables as affine expressions in the kept ones.
    reps: Vec<Option<Poly>>,
    blocks: Vec<Vec<AffineForm>>,
}

impl Node {
    fn full_reps(&self) -> Vec<Poly> {
        (0..self.n)
            .map(|i| self.reps[i].clone().unwrap_or_else(|| Poly::var(self.n, i)))
            .collect()
    }

    fn reduced_field(&self, f: &[Poly]) -> Vec<Poly> {
        let reps = self.full_reps();
        self.keep.iter().map(|&j| f[j].compose(&reps).restrict(&self.keep)).collect()
    }

    fn lift(&self, form: &AffineForm) -> AffineForm {
        let mut alpha = vec![BigRational::zero(); self.n];
        for (k, &j) in self.keep.iter().enumerate() {
            alpha[j] = form.alpha[k].clone();
        }
        AffineForm::new(alpha, form.alpha0.clone())
    }

    /// Substitutes the zero set of `form` (full coordinates).
    fn eliminate(&mut self, form: &AffineForm) -> bool {
        let p = form.to_polynomial().compose(&self.full_reps());
        let lin = p.linear_coeffs();
        let Some(&piv) = self
            .keep
            .iter()
            .filter(|&&j| !lin[j].is_zero())
            .max_by(|&&a, &&b| lin[a].abs().cmp(&lin[b].abs()).then(b.cmp(&a)))
        else {
            return false;
        };
        let c = lin[piv].clone();
        let rest = &p - &Poly::var(self.n, piv).scale(&c);
        let expr = rest.scale(&(-c.recip()));
        for r in self.reps.iter_mut().flatten() {
            *r = r.substitute(piv, &expr).expect("pivot is kept");
        }
        self.reps[piv] = Some(expr);
        self.keep.retain(|&j| j != piv);
        true
    }

    fn forms(&self) -> Vec<AffineForm> {
        self.blocks.iter().flatten().cloned().collect()
    }
}

/// `L` with `Q f = L (Q x + q0)`, or `None` if `Q f` is not affine or no
/// such `L` exists.
pub fn solve_l(field: &[Poly], forms: &[AffineForm]) -> Option<Matrix<BigRational>> {
    let n = field.len();
    let m = forms.len();
    // [Q | q0]ᵀ ℓ_i = [B_i | b0_i]ᵀ
    let aug = Matrix::from_fn(n + 1, m, |r, k| if r < n { forms[k].alpha[r].clone() } else { forms[k].alpha0.clone() });
    let mut rows = Vec::with_capacity(m);
    for form in forms {
        let mut qf = Poly::zero(n);
        for (a, f) in form.alpha.iter().zip(field) {
            if !a.is_zero() {
                qf = qf + f.scale(a);
            }
        }
        if !qf.is_affine() {
            return None;
        }
        let mut rhs = qf.linear_coeffs();
        rhs.push(qf.constant_term());
        rows.push(aug.solve(&rhs)?);
    }
    Some(Matrix::from_rows(rows).with_shape(m))
}

trait WithShape {
    fn with_shape(self, m: usize) -> Self;
}

impl WithShape for Matrix<BigRational> {
    fn with_shape(self, m: usize) -> Self {
        if m == 0 { Matrix::zeros(0, 0) } else { self }
    }
}

struct Search<'a> {
    f: &'a [Poly],
    best: Option<Node>,
    best_len: usize,
    visited: HashSet<Vec<Vec<BigRational>>>,
    nodes: usize,
    budget_hit: bool,
}

impl Search<'_> {
    fn dfs(&mut self, node: Node) {
        self.nodes += 1;
        let len = node.blocks.iter().map(Vec::len).sum::<usize>();
        if self.best.is_none() || len > self.best_len {
            self.best_len = len;
            self.best = Some(node.clone());
        }
        if node.keep.is_empty() || self.best_len == node.n {
            return;
        }
        if self.nodes >= SEARCH_BUDGET {
            self.budget_hit = true;
            return;
        }
        let reduced = node.reduced_field(self.f);
        let dps = find_constant_cofactor_dps_field(&reduced);
        let prev = node.forms();
        for dp in dps {
            let Some(block) = dp.real_forms() else { continue };
            let block: Vec<AffineForm> = block.iter().map(|b| node.lift(b)).collect();
            let mut all = prev.clone();
            all.extend(block.iter().cloned());
            let q = Matrix::from_rows(all.iter().map(|a| a.alpha.clone()).collect());
            if q.rank() != all.len() {
                continue;
            }
            let key = q.row_space().to_rows();
            if self.visited.contains(&key) {
                continue;
            }
            self.visited.insert(key);
            if solve_l(self.f, &all).is_none() {
                continue;
            }
            let mut child = node.clone();
            if !block.iter().all(|b| child.eliminate(b)) {
                continue;
            }
            child.blocks.push(block);
            self.dfs(child);
            if self.best_len == node.n || self.budget_hit {
                return;
            }
        }
    }
}

/// Runs the block search on a polynomial field.
pub fn decouple_field(f: &[Poly]) -> Result<DecoupleResult> {
    let n = f.len();
    let root = Node { n, keep: (0..n).collect(), reps: vec![None; n], blocks: vec![] };
    let mut s = Search { f, best: None, best_len: 0, visited: HashSet::new(), nodes: 0, budget_hit: false };
    s.dfs(root);
    let best = s.best.expect("root is visited");
    let forms = best.forms();
    let m = forms.len();
    let q = if m == 0 { Matrix::zeros(0, n) } else { Matrix::from_rows(forms.iter().map(|a| a.alpha.clone()).collect()) };
    let q0: Vec<BigRational> = forms.iter().map(|a| a.alpha0.clone()).collect();
    let l = solve_l(f, &forms).ok_or_else(|| Error::Inconsistent("accepted chain lost its L".into()))?;
    let pivots = if m == 0 { vec![] } else { q.rref().1 };
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let rbasis = if free.is_empty() {
        Matrix::zeros(0, n)
    } else {
        Matrix::from_rows(
            free.iter().map(|&c| (0..n).map(|j| if j == c { BigRational::one() } else { BigRational::zero() }).collect()).collect(),
        )
    };
    let g = if m == 0 { rbasis.clone() } else if free.is_empty() { q.clone() } else { q.vstack(&rbasis) };
    let ginv = g.inverse().ok_or_else(|| Error::Singular("completion of Q".into()))?;
    // x = G⁻¹ (z - z0)
    let shifted: Vec<Poly> = (0..n)
        .map(|j| {
            let z0 = if j < m { q0[j].clone() } else { BigRational::zero() };
            &Poly::var(n, j) - &Poly::constant(n, z0)
        })
        .collect();
    let reps: Vec<Poly> = (0..n)
        .map(|i| {
            (0..n).fold(Poly::zero(n), |acc, j| {
                if ginv[(i, j)].is_zero() { acc } else { acc + shifted[j].scale(&ginv[(i, j)]) }
            })
        })
        .collect();
    let fz: Vec<Poly> = f.iter().map(|fi| fi.compose(&reps)).collect();
    let transformed_field = (0..n)
        .map(|i| (0..n).fold(Poly::zero(n), |acc, j| if g[(i, j)].is_zero() { acc } else { acc + fz[j].scale(&g[(i, j)]) }))
        .collect();
    Ok(DecoupleResult { q, q0, l, rbasis, g, transformed_field, blocks: best.blocks, budget_hit: s.budget_hit })
}

pub fn decouple(sys: &OdeSystem) -> Result<DecoupleResult> {
    let f = sys
        .polynomial_field()
        .ok_or_else(|| Error::Domain("decoupling needs a polynomial field".into()))?;
    decouple_field(&f)
}
