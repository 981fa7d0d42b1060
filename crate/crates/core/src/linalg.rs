//! Small dense linear algebra: exact matrices over a [`Field`] and a
//! partial-pivoting LU for floating-point scalars.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::polycore::Polynomial;
use crate::scalar::{Field, Scalar, ToScalar};

#[derive(Clone, PartialEq, Debug)]
pub struct Matrix<C> {
    rows: usize,
    cols: usize,
    data: Vec<C>,
}

impl<C: Field> Matrix<C> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![C::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<C>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> Vec<C> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn to_rows(&self) -> Vec<Vec<C>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn col(&self, j: usize) -> Vec<C> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|c| c.is_zero())
    }

    pub fn mul_vec(&self, v: &[C]) -> Vec<C> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = C::zero();
                for j in 0..self.cols {
                    acc = acc + self[(i, j)].clone() * v[j].clone();
                }
                acc
            })
            .collect()
    }

    /// `vᵀ M`.
    pub fn vec_mul(&self, v: &[C]) -> Vec<C> {
        self.transpose().mul_vec(v)
    }

    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Matrix { rows: self.rows + other.rows, cols: self.cols, data }
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Matrix::from_rows(idx.iter().map(|&i| self.row(i)).collect())
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = C::one() / m[(r, c)].clone();
            for j in 0..m.cols {
                m[(r, j)] = m[(r, j)].clone() * inv.clone();
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in 0..m.cols {
                        let v = m[(i, j)].clone() - f.clone() * m[(r, j)].clone();
                        m[(i, j)] = v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    /// Non-zero rows of the reduced row echelon form: a canonical basis of
    /// the row space.
    pub fn row_space(&self) -> Self {
        let (r, p) = self.rref();
        Matrix::from_rows((0..p.len()).map(|i| r.row(i)).collect::<Vec<_>>()).with_cols(self.cols)
    }

    fn with_cols(mut self, cols: usize) -> Self {
        if self.rows == 0 {
            self.cols = cols;
        }
        self
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Basis of `{v : M v = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<C>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![C::zero(); self.cols];
                v[f] = C::one();
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = -r[(i, f)].clone();
                }
                v
            })
            .collect()
    }

    /// Basis of `{w : wᵀ M = 0}`.
    pub fn left_nullspace(&self) -> Vec<Vec<C>> {
        self.transpose().nullspace()
    }

    /// Solves `M x = b`; `None` if inconsistent. Picks the particular
    /// solution with free variables zero.
    pub fn solve(&self, b: &[C]) -> Option<Vec<C>> {
        assert_eq!(b.len(), self.rows);
        let aug = Matrix::from_fn(self.rows, self.cols + 1, |i, j| {
            if j < self.cols { self[(i, j)].clone() } else { b[i].clone() }
        });
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![C::zero(); self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = r[(i, self.cols)].clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let aug = Matrix::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else if j - n == i {
                C::one()
            } else {
                C::zero()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(Matrix::from_fn(n, n, |i, j| r[(i, j + n)].clone()))
    }

    pub fn det(&self) -> C {
        assert_eq!(self.rows, self.cols);
        let mut m = self.clone();
        let mut det = C::one();
        for c in 0..m.cols {
            let Some(p) = (c..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                return C::zero();
            };
            if p != c {
                m.swap_rows(p, c);
                det = -det;
            }
            let piv = m[(c, c)].clone();
            det = det * piv.clone();
            for i in c + 1..m.rows {
                let f = m[(i, c)].clone() / piv.clone();
                for j in c..m.cols {
                    let v = m[(i, j)].clone() - f.clone() * m[(c, j)].clone();
                    m[(i, j)] = v;
                }
            }
        }
        det
    }

    pub fn map<D: Field>(&self, f: impl Fn(&C) -> D) -> Matrix<D> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && *self == self.transpose()
    }

    pub fn is_skew(&self) -> bool {
        self.rows == self.cols && *self == self.transpose().map(|c| -c.clone())
    }

    /// Characteristic polynomial coefficients `c_0..c_n` of `det(tI - M)`
    /// (monic), by the Faddeev-LeVerrier recursion.
    pub fn charpoly(&self) -> Vec<C> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut coeffs = vec![C::zero(); n + 1];
        coeffs[n] = C::one();
        let mut mk = Matrix::zeros(n, n);
        for k in 1..=n {
            // M_k = A M_{k-1} + c_{n-k+1} I
            let mut next = self * &mk;
            for i in 0..n {
                next[(i, i)] = next[(i, i)].clone() + coeffs[n - k + 1].clone();
            }
            mk = next;
            let am = self * &mk;
            let mut tr = C::zero();
            for i in 0..n {
                tr = tr + am[(i, i)].clone();
            }
            coeffs[n - k] = -tr / C::from_i64(k as i64);
        }
        coeffs
    }
}

impl<C: Field + ToScalar> Matrix<C> {
    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).iter().map(|c| c.to_scalar::<f64>()).collect()).collect()
    }
}

impl<C> Index<(usize, usize)> for Matrix<C> {
    type Output = C;
    fn index(&self, (i, j): (usize, usize)) -> &C {
        &self.data[i * self.cols + j]
    }
}

impl<C> IndexMut<(usize, usize)> for Matrix<C> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C {
        &mut self.data[i * self.cols + j]
    }
}

impl<C: Field> Mul<&Matrix<C>> for &Matrix<C> {
    type Output = Matrix<C>;
    fn mul(self, rhs: &Matrix<C>) -> Matrix<C> {
        assert_eq!(self.cols, rhs.rows, "matrix product shapes");
        Matrix::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = C::zero();
            for k in 0..self.cols {
                acc = acc + self[(i, k)].clone() * rhs[(k, j)].clone();
            }
            acc
        })
    }
}

impl fmt::Display for Matrix<BigRational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|c| c.to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Determinant of a square matrix of polynomials by cofactor expansion
/// along the first row (fine for the n ≤ 8 sizes in scope).
pub fn poly_det<C: Field>(m: &[Vec<Polynomial<C>>]) -> Polynomial<C> {
    let n = m.len();
    assert!(m.iter().all(|r| r.len() == n), "square matrix required");
    if n == 0 {
        panic!("empty determinant");
    }
    let cols: Vec<usize> = (0..n).collect();
    det_rec(m, 0, &cols)
}

fn det_rec<C: Field>(m: &[Vec<Polynomial<C>>], row: usize, cols: &[usize]) -> Polynomial<C> {
    let nv = m[0][0].nvars();
    if cols.len() == 1 {
        return m[row][cols[0]].clone();
    }
    let mut acc = Polynomial::zero(nv);
    for (k, &c) in cols.iter().enumerate() {
        if m[row][c].is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let minor = det_rec(m, row + 1, &rest);
        let t = &m[row][c] * &minor;
        acc = if k % 2 == 0 { acc + t } else { acc - t };
    }
    acc
}

/// Solves `A x = b` in place (`A` row-major `n × n`) by LU with partial
/// pivoting.
pub fn lu_solve<F: Scalar>(a: &mut [F], n: usize, b: &mut [F]) -> Result<()> {
    let nrhs = b.len() / n;
    lu_solve_multi(a, n, b, nrhs)
}

/// Like [`lu_solve`] with `nrhs` right-hand sides stored row-major in `b`
/// (`n × nrhs`).
pub fn lu_solve_multi<F: Scalar>(a: &mut [F], n: usize, b: &mut [F], nrhs: usize) -> Result<()> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n * nrhs);
    let scale = a.iter().fold(F::zero(), |m, v| m.max(v.abs()));
    let tiny = scale * F::epsilon() * F::lit(n as f64);
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if a[i * n + k].abs() > a[p * n + k].abs() {
                p = i;
            }
        }
        let piv = a[p * n + k];
        if piv.abs() <= tiny || !piv.is_finite() {
            return Err(Error::Singular(format!("pivot {k} is {:e}", piv.to_f64_lossy())));
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            for j in 0..nrhs {
                b.swap(k * nrhs + j, p * nrhs + j);
            }
        }
        for i in k + 1..n {
            let f = a[i * n + k] / piv;
            if f == F::zero() {
                continue;
            }
            a[i * n + k] = f;
            for j in k + 1..n {
                a[i * n + j] = a[i * n + j] - f * a[k * n + j];
            }
            for j in 0..nrhs {
                b[i * nrhs + j] = b[i * nrhs + j] - f * b[k * nrhs + j];
            }
        }
    }
    for j in 0..nrhs {
        for i in (0..n).rev() {
            let mut s = b[i * nrhs + j];
            for k in i + 1..n {
                s = s - a[i * n + k] * b[k * nrhs + j];
            }
            b[i * nrhs + j] = s / a[i * n + i];
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_int;

    fn m(rows: &[&[i64]]) -> Matrix<BigRational> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| rat_int(v)).collect()).collect())
    }

    #[test]
    fn exact_elimination() {
        let a = m(&[&[2, 1], &[1, 3]]);
        assert_eq!(a.det(), rat_int(5));
        let inv = a.inverse().unwrap();
        assert_eq!(&a * &inv, Matrix::identity(2));
        assert_eq!(a.solve(&[rat_int(3), rat_int(4)]).unwrap(), vec![rat_int(1), rat_int(1)]);
        let s = m(&[&[1, 2], &[2, 4]]);
        assert_eq!(s.rank(), 1);
        assert!(s.inverse().is_none());
        let ns = s.nullspace();
        assert_eq!(ns, vec![vec![rat_int(-2), rat_int(1)]]);
        assert!(s.solve(&[rat_int(1), rat_int(1)]).is_none());
    }

    #[test]
    fn characteristic_polynomial() {
        // [[2,-1],[1,2]] has eigenvalues 2 ± i: t^2 - 4t + 5
        let a = m(&[&[2, -1], &[1, 2]]);
        assert_eq!(a.charpoly(), vec![rat_int(5), rat_int(-4), rat_int(1)]);
    }

    #[test]
    fn numeric_lu() {
        let mut a: Vec<f64> = vec![0.0, 2.0, 1.0, 1.0];
        let mut b: Vec<f64> = vec![2.0, 3.0];
        lu_solve(&mut a, 2, &mut b).unwrap();
        assert!((b[0] - 2.0).abs() < 1e-15 && (b[1] - 1.0).abs() < 1e-15);
        let mut s: Vec<f64> = vec![1.0, 2.0, 2.0, 4.0];
        assert!(lu_solve(&mut s, 2, &mut [1.0, 1.0]).is_err());
    }

    #[test]
    fn polynomial_determinant() {
        let x = Polynomial::<BigRational>::var(1, 0);
        let one = Polynomial::one(1);
        // det [[1, x], [x, 1]] = 1 - x^2
        let d = poly_det(&[vec![one.clone(), x.clone()], vec![x.clone(), one.clone()]]);
        assert_eq!(d, one - &x * &x);
    }
}
