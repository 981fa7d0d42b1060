use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::polycore::parse_number;
use crate::scalar::{rat, rat_int, Scalar, ToScalar};
use crate::surd::Surd;

/// Methods that get a dedicated stepping routine.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Special {
    None,
    /// Solved by one linear system per step on quadratic fields.
    Kahan,
}

/// Butcher tableau `(A, b, c)` with exact entries in `Q(√d)`.
#[derive(Clone, PartialEq, Debug)]
pub struct ButcherTableau {
    id: String,
    name: String,
    a: Matrix<Surd>,
    b: Vec<Surd>,
    c: Vec<Surd>,
    order: u32,
    special: Special,
}

/// Identifiers accepted by [`ButcherTableau::by_id`]. The parametrised
/// families take a rational after the colon.
pub const TABLEAU_IDS: &[&str] = &[
    "forward-euler",
    "heun",
    "explicit-midpoint",
    "ralston",
    "rk4",
    "theta-explicit:<theta>",
    "implicit-midpoint",
    "gauss-1",
    "trapezoidal",
    "gauss-2",
    "rka:<theta>",
    "kahan",
];

/// A concrete representative of every registered method.
pub const REGISTERED: &[&str] = &[
    "forward-euler",
    "heun",
    "explicit-midpoint",
    "ralston",
    "rk4",
    "theta-explicit:1/3",
    "implicit-midpoint",
    "gauss-1",
    "trapezoidal",
    "gauss-2",
    "rka:1/4",
    "kahan",
];

fn q(v: BigRational) -> Surd {
    Surd::rational(v)
}

fn qm(rows: &[&[BigRational]]) -> Matrix<Surd> {
    Matrix::from_rows(rows.iter().map(|r| r.iter().cloned().map(q).collect()).collect())
}

fn qv(v: &[BigRational]) -> Vec<Surd> {
    v.iter().cloned().map(q).collect()
}

impl ButcherTableau {
    /// Builds a tableau; `c` defaults to the row sums of `A`.
    pub fn new(
        id: impl Into<String>,
        name: impl Into<String>,
        a: Matrix<Surd>,
        b: Vec<Surd>,
        c: Option<Vec<Surd>>,
        order: u32,
    ) -> Result<Self> {
        let s = b.len();
        if a.nrows() != s || a.ncols() != s {
            return Err(Error::DimensionMismatch { expected: s, got: a.nrows() });
        }
        let sums = row_sums(&a);
        let c = c.unwrap_or_else(|| sums.clone());
        if c.len() != s {
            return Err(Error::DimensionMismatch { expected: s, got: c.len() });
        }
        if c != sums {
            return Err(Error::Inconsistent("c is not the row sums of A".into()));
        }
        Ok(ButcherTableau { id: id.into(), name: name.into(), a, b, c, order, special: Special::None })
    }

    pub fn from_rational(
        id: &str,
        name: &str,
        a: &[&[BigRational]],
        b: &[BigRational],
        order: u32,
    ) -> Self {
        Self::new(id, name, qm(a), qv(b), None, order).expect("registered tableau is consistent")
    }

    pub fn by_id(id: &str) -> Result<Self> {
        let (head, param) = match id.split_once(':') {
            Some((h, p)) => (h, Some(p)),
            None => (id, None),
        };
        let theta = || -> Result<BigRational> {
            let p = param.ok_or_else(|| Error::UnknownTableau(format!("{id} (missing parameter)")))?;
            parse_number(p).map_err(|_| Error::UnknownTableau(id.to_string()))
        };
        let z = BigRational::zero;
        let t = match (head, param.is_some()) {
            ("forward-euler", false) => Self::from_rational(id, "forward Euler", &[&[z()]], &[rat_int(1)], 1),
            ("heun", false) => Self::theta_explicit_named(id, "Heun", rat_int(1))?,
            ("explicit-midpoint", false) => Self::theta_explicit_named(id, "explicit midpoint", rat(1, 2))?,
            ("ralston", false) => Self::theta_explicit_named(id, "Ralston", rat(2, 3))?,
            ("rk4", false) => Self::from_rational(
                id,
                "classical Runge-Kutta",
                &[
                    &[z(), z(), z(), z()],
                    &[rat(1, 2), z(), z(), z()],
                    &[z(), rat(1, 2), z(), z()],
                    &[z(), z(), rat_int(1), z()],
                ],
                &[rat(1, 6), rat(1, 3), rat(1, 3), rat(1, 6)],
                4,
            ),
            ("theta-explicit", true) => {
                let th = theta()?;
                Self::theta_explicit_named(id, &format!("explicit two-stage, theta = {th}"), th)?
            }
            ("implicit-midpoint", false) | ("gauss-1", false) => {
                Self::from_rational(id, "implicit midpoint", &[&[rat(1, 2)]], &[rat_int(1)], 2)
            }
            ("trapezoidal", false) => Self::from_rational(
                id,
                "trapezoidal rule",
                &[&[z(), z()], &[rat(1, 2), rat(1, 2)]],
                &[rat(1, 2), rat(1, 2)],
                2,
            ),
            ("gauss-2", false) => Self::gauss2(id),
            ("rka", true) => {
                let th = theta()?;
                Self::rka_named(id, &format!("symmetric theta-family, theta = {th}"), th)
            }
            ("kahan", false) => {
                let mut t = Self::rka_named(id, "Kahan", rat(-1, 2));
                t.special = Special::Kahan;
                t
            }
            _ => return Err(Error::UnknownTableau(id.to_string())),
        };
        Ok(t)
    }

    /// Two-stage explicit family `A = [[0,0],[θ,0]]`,
    /// `b = (1 - 1/(2θ), 1/(2θ))`.
    pub fn theta_explicit(theta: BigRational) -> Result<Self> {
        let id = format!("theta-explicit:{theta}");
        Self::theta_explicit_named(&id, &format!("explicit two-stage, theta = {theta}"), theta)
    }

    fn theta_explicit_named(id: &str, name: &str, theta: BigRational) -> Result<Self> {
        if theta.is_zero() {
            return Err(Error::Domain("theta must be non-zero".into()));
        }
        let z = BigRational::zero;
        let w = (rat_int(2) * &theta).recip();
        Ok(Self::from_rational(id, name, &[&[z(), z()], &[theta, z()]], &[rat_int(1) - &w, w], 2))
    }

    /// Three-stage form of the family
    /// `(x'-x)/h = (1-2θ) f((x+x')/2) + θ f(x) + θ f(x')`; the stages are
    /// `x`, `(x+x')/2` and `x'`.
    pub fn rka(theta: BigRational) -> Self {
        let id = format!("rka:{theta}");
        Self::rka_named(&id, &format!("symmetric theta-family, theta = {theta}"), theta)
    }

    fn rka_named(id: &str, name: &str, th: BigRational) -> Self {
        let z = BigRational::zero;
        let mid = rat_int(1) - rat_int(2) * &th;
        let half = rat(1, 2);
        Self::from_rational(
            id,
            name,
            &[
                &[z(), z(), z()],
                &[&th * &half, &mid * &half, &th * &half],
                &[th.clone(), mid.clone(), th.clone()],
            ],
            &[th.clone(), mid, th],
            2,
        )
    }

    fn gauss2(id: &str) -> Self {
        // c = 1/2 ∓ √3/6
        let r3 = Surd::new(BigRational::zero(), BigRational::one(), BigInt::from(3));
        let quarter = q(rat(1, 4));
        let sixth = r3.clone() * q(rat(1, 6));
        let a = Matrix::from_rows(vec![
            vec![quarter.clone(), quarter.clone() - sixth.clone()],
            vec![quarter.clone() + sixth, quarter],
        ]);
        let b = vec![q(rat(1, 2)), q(rat(1, 2))];
        ButcherTableau::new(id, "Gauss-Legendre, two stages", a, b, None, 4).expect("Gauss tableau")
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &Matrix<Surd> {
        &self.a
    }

    pub fn b(&self) -> &[Surd] {
        &self.b
    }

    pub fn c(&self) -> &[Surd] {
        &self.c
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn special(&self) -> Special {
        self.special
    }

    /// Strictly lower triangular `A`.
    pub fn is_explicit(&self) -> bool {
        let s = self.stages();
        (0..s).all(|i| (i..s).all(|j| self.a[(i, j)].is_zero()))
    }

    /// All entries rational (no surds).
    pub fn is_rational(&self) -> bool {
        self.b.iter().chain(self.c.iter()).all(Surd::is_rational)
            && (0..self.stages()).all(|i| self.a.row(i).iter().all(Surd::is_rational))
    }

    pub fn a_rational(&self) -> Option<Matrix<BigRational>> {
        self.is_rational().then(|| self.a.map(|s| s.real_part().clone()))
    }

    pub fn b_rational(&self) -> Option<Vec<BigRational>> {
        self.b.iter().map(|s| s.as_rational().cloned()).collect()
    }

    /// Entries converted to a floating-point scalar: `(A row-major, b, c)`.
    pub fn to_scalar<F: Scalar>(&self) -> (Vec<F>, Vec<F>, Vec<F>) {
        let s = self.stages();
        let mut a = Vec::with_capacity(s * s);
        for i in 0..s {
            for j in 0..s {
                a.push(self.a[(i, j)].to_scalar());
            }
        }
        (a, self.b.iter().map(|v| v.to_scalar()).collect(), self.c.iter().map(|v| v.to_scalar()).collect())
    }
}

fn row_sums(a: &Matrix<Surd>) -> Vec<Surd> {
    (0..a.nrows()).map(|i| a.row(i).into_iter().fold(Surd::zero(), |s, v| s + v)).collect()
}

impl fmt::Display for ButcherTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.stages();
        for i in 0..s {
            let row: Vec<String> = self.a.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(f, "{} | {}", self.c[i], row.join("  "))?;
        }
        let b: Vec<String> = self.b.iter().map(|v| v.to_string()).collect();
        write!(f, "  | {}", b.join("  "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_is_consistent() {
        for id in REGISTERED {
            let t = ButcherTableau::by_id(id).unwrap();
            let sum_b = t.b().iter().cloned().fold(Surd::zero(), |a, b| a + b);
            assert_eq!(sum_b, Surd::one(), "{id}: weights sum to one");
        }
        assert!(ButcherTableau::by_id("rk4").unwrap().is_explicit());
        assert!(!ButcherTableau::by_id("trapezoidal").unwrap().is_explicit());
        assert!(!ButcherTableau::by_id("gauss-2").unwrap().is_rational());
        assert!(ButcherTableau::by_id("nope").is_err());
        assert!(ButcherTableau::by_id("theta-explicit:0").is_err());
        assert!(ButcherTableau::by_id("rka").is_err());
    }

    #[test]
    fn inconsistent_nodes_rejected() {
        let a = qm(&[&[rat(1, 2)]]);
        let err = ButcherTableau::new("x", "x", a, qv(&[rat_int(1)]), Some(qv(&[rat_int(1)])), 1);
        assert!(err.is_err());
    }

    #[test]
    fn named_members_of_theta_family() {
        let heun = ButcherTableau::by_id("heun").unwrap();
        assert_eq!(heun.b_rational().unwrap(), vec![rat(1, 2), rat(1, 2)]);
        let ral = ButcherTableau::by_id("ralston").unwrap();
        assert_eq!(ral.b_rational().unwrap(), vec![rat(1, 4), rat(3, 4)]);
        assert_eq!(ButcherTableau::by_id("kahan").unwrap().special(), Special::Kahan);
    }
}
