//! Small dense linear algebra: row-major matrices, Cholesky factorization and
//! symmetric eigenvalues (Householder tridiagonalization + implicit QL).

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row vectors; all rows must share one length.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.row_iter().map(<[T]>::to_vec).collect()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Exact symmetry check.
    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Returns `self + shift * I`.
    pub fn with_added_diagonal(&self, shift: T) -> Self {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] += shift;
        }
        m
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        debug_assert_eq!(v.len(), self.cols);
        self.row_iter().map(|r| crate::scalar::dot(r, v)).collect()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Lower-triangular Cholesky factor `L` with `A = L L'`.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    l: Matrix<T>,
}

impl<T: Scalar> Cholesky<T> {
    /// Factorizes a symmetric positive definite matrix. Only the lower
    /// triangle of `a` is read.
    pub fn new(a: &Matrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                found: a.cols(),
            });
        }
        let n = a.rows();
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut diag = a[(j, j)];
            for k in 0..j {
                diag -= l[(j, k)] * l[(j, k)];
            }
            if !(diag > T::zero()) || !diag.is_finite() {
                return Err(Error::IllConditioned);
            }
            let ljj = diag.sqrt();
            l[(j, j)] = ljj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / ljj;
            }
        }
        Ok(Self { l })
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn factor(&self) -> &Matrix<T> {
        &self.l
    }

    /// `log|A| = 2 Σ log L_ii`.
    pub fn log_det(&self) -> T {
        let two = T::lit(2.0);
        two * (0..self.dim()).map(|i| self.l[(i, i)].ln()).sum::<T>()
    }

    /// Solves `L z = b`.
    pub fn solve_lower(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        debug_assert_eq!(b.len(), n);
        let mut z = b.to_vec();
        for i in 0..n {
            let row = self.l.row(i);
            let mut s = z[i];
            for k in 0..i {
                s -= row[k] * z[k];
            }
            z[i] = s / row[i];
        }
        z
    }

    /// Solves `L' x = z`.
    pub fn solve_upper(&self, z: &[T]) -> Vec<T> {
        let n = self.dim();
        let mut x = z.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        self.solve_upper(&self.solve_lower(b))
    }

    /// `b' A^{-1} b` computed as `|L^{-1} b|^2`.
    pub fn quadratic_form(&self, b: &[T]) -> T {
        self.solve_lower(b).iter().map(|&z| z * z).sum()
    }
}

/// All eigenvalues of a symmetric matrix in ascending order.
///
/// Reduces to tridiagonal form with Householder reflections, then runs the
/// implicit QL iteration with Wilkinson-style shifts. Only the lower triangle
/// is read.
pub fn symmetric_eigenvalues<T: Scalar>(a: &Matrix<T>) -> Result<Vec<T>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: a.cols(),
        });
    }
    let (mut diag, mut off) = tridiagonalize(a);
    tridiagonal_ql(&mut diag, &mut off)?;
    diag.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    Ok(diag)
}

/// Householder reduction; returns the diagonal and the subdiagonal
/// (`off[i]` couples rows `i` and `i + 1`).
fn tridiagonalize<T: Scalar>(a: &Matrix<T>) -> (Vec<T>, Vec<T>) {
    let n = a.rows();
    // Symmetrize from the lower triangle into a working copy.
    let mut w = Matrix::from_fn(n, n, |i, j| if i >= j { a[(i, j)] } else { a[(j, i)] });
    let mut off = vec![T::zero(); n.saturating_sub(1)];
    let two = T::lit(2.0);

    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let mut v: Vec<T> = (0..m).map(|i| w[(k + 1 + i, k)]).collect();
        let scale = v.iter().fold(T::zero(), |s, x| s.max(x.abs()));
        if scale == T::zero() {
            off[k] = T::zero();
            continue;
        }
        for x in v.iter_mut() {
            *x /= scale;
        }
        let norm = v.iter().map(|&x| x * x).sum::<T>().sqrt();
        let alpha = if v[0] > T::zero() { -norm } else { norm };
        off[k] = alpha * scale;
        v[0] -= alpha;
        let vtv: T = v.iter().map(|&x| x * x).sum();
        if vtv == T::zero() {
            continue;
        }
        let beta = two / vtv;

        // p = beta * A22 v
        let mut p = vec![T::zero(); m];
        for i in 0..m {
            let mut s = T::zero();
            for j in 0..m {
                s += w[(k + 1 + i, k + 1 + j)] * v[j];
            }
            p[i] = beta * s;
        }
        // q = p - (beta p'v / 2) v
        let pv: T = p.iter().zip(&v).map(|(&x, &y)| x * y).sum();
        let c = beta * pv / two;
        let q: Vec<T> = p.iter().zip(&v).map(|(&pi, &vi)| pi - c * vi).collect();
        for i in 0..m {
            for j in 0..m {
                let delta = v[i] * q[j] + q[i] * v[j];
                w[(k + 1 + i, k + 1 + j)] -= delta;
            }
        }
    }
    if n >= 2 {
        off[n - 2] = w[(n - 1, n - 2)];
    }
    let diag = (0..n).map(|i| w[(i, i)]).collect();
    (diag, off)
}

fn tridiagonal_ql<T: Scalar>(d: &mut [T], off: &mut [T]) -> Result<()> {
    const MAX_SWEEPS: usize = 60;
    let n = d.len();
    if n < 2 {
        return Ok(());
    }
    let mut e = vec![T::zero(); n];
    e[..n - 1].copy_from_slice(off);
    let two = T::lit(2.0);
    let eps = T::epsilon();

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::EigenNoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            let signed_r = if g >= T::zero() { r } else { -r };
            g = d[m] - d[l] + e[l] / (g + signed_r);
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}
