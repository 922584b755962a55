//! Small dense matrices over a [`Scalar`].
//!
//! Sizes here are tiny (`2N+2 ≤ ~42`), so everything is row-major `Vec`
//! storage and textbook elimination. Rank decisions use partial pivoting with
//! the caller's tolerance; for exact scalars the tolerance is ignored.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::scalar::{Scalar, C64};

#[derive(Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: fmt::Debug> fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds from row vectors; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_columns(cols: &[Vec<S>]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        Self::from_fn(r, c, |i, j| cols[j][i].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn row(&self, r: usize) -> Vec<S> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    pub fn column(&self, c: usize) -> Vec<S> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    /// Leading `k` columns.
    pub fn leading_columns(&self, k: usize) -> Self {
        Self::from_fn(self.rows, k, |r, c| self[(r, c)].clone())
    }

    pub fn column_range(&self, start: usize, end: usize) -> Self {
        Self::from_fn(self.rows, end - start, |r, c| self[(r, start + c)].clone())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| self[(r, c)].conj())
    }

    pub fn adjoint(&self) -> Self {
        self.transpose().conj()
    }

    pub fn scale(&self, s: &S) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| self[(r, c)].clone() * s.clone())
    }

    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        Self::from_fn(self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self[(r, c)].clone()
            } else {
                other[(r, c - self.cols)].clone()
            }
        })
    }

    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        Self::from_fn(self.rows + other.rows, self.cols, |r, c| {
            if r < self.rows {
                self[(r, c)].clone()
            } else {
                other[(r - self.rows, c)].clone()
            }
        })
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                let mut acc = S::zero();
                for (c, x) in v.iter().enumerate() {
                    acc = acc + self[(r, c)].clone() * x.clone();
                }
                acc
            })
            .collect()
    }

    /// Row vector times matrix: `vᵀ M`.
    pub fn vec_mul(v: &[S], m: &Self) -> Vec<S> {
        assert_eq!(m.rows, v.len());
        (0..m.cols)
            .map(|c| {
                let mut acc = S::zero();
                for (r, x) in v.iter().enumerate() {
                    acc = acc + x.clone() * m[(r, c)].clone();
                }
                acc
            })
            .collect()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.data.iter().all(|x| x.is_negligible(tol))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    pub fn to_c64(&self) -> Matrix<C64> {
        Matrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)].to_c64())
    }

    pub fn entries(&self) -> &[S] {
        &self.data
    }

    /// Reduced row echelon form by Gauss-Jordan elimination.
    /// Returns the pivot column of each nonzero row.
    fn echelon(&self, tol: f64) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            // Partial pivoting per column; for floats pick the largest entry.
            let mut best = None;
            let mut best_mag = 0.0;
            for r in row..m.rows {
                if m[(r, col)].is_negligible(tol) {
                    continue;
                }
                let mag = m[(r, col)].magnitude();
                if best.is_none() || mag > best_mag {
                    best = Some(r);
                    best_mag = mag;
                }
                if S::MODE == crate::scalar::NumberMode::Rational {
                    break;
                }
            }
            let Some(p) = best else { continue };
            m.swap_rows(row, p);
            let inv = S::one() / m[(row, col)].clone();
            for c in col..m.cols {
                m[(row, c)] = m[(row, c)].clone() * inv.clone();
            }
            for r in 0..m.rows {
                if r == row || m[(r, col)].is_zero() {
                    continue;
                }
                let f = m[(r, col)].clone();
                for c in col..m.cols {
                    let v = m[(r, c)].clone() - f.clone() * m[(row, c)].clone();
                    m[(r, c)] = v;
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Rank, with `tol` scaled by the largest entry for floats.
    pub fn rank(&self, tol: f64) -> usize {
        let scaled = tol * self.max_abs().max(1.0);
        self.echelon(scaled).1.len()
    }

    /// Basis of the right null space `{x : M x = 0}`, as columns.
    pub fn null_space(&self, tol: f64) -> Self {
        let scaled = tol * self.max_abs().max(1.0);
        let (rref, pivots) = self.echelon(scaled);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &f in &free {
            let mut v = vec![S::zero(); self.cols];
            v[f] = S::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -rref[(r, f)].clone();
            }
            basis.push(v);
        }
        if basis.is_empty() {
            Self::zeros(self.cols, 0)
        } else {
            Self::from_columns(&basis)
        }
    }

    /// Inverse of a square matrix, `None` when singular within `tol`.
    pub fn inverse(&self, tol: f64) -> Option<Self> {
        assert_eq!(self.rows, self.cols, "inverse of non-square matrix");
        let n = self.rows;
        let aug = self.hstack(&Self::identity(n));
        let scaled = tol * self.max_abs().max(1.0);
        let (rref, pivots) = aug.echelon(scaled);
        if pivots.len() < n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
            return None;
        }
        Some(rref.column_range(n, 2 * n))
    }

    /// Positive definiteness of a Hermitian matrix via the pivots of an
    /// unpivoted `LDL*` factorisation (Sylvester's criterion).
    pub fn is_hermitian_positive_definite(&self, tol: f64) -> bool {
        self.hermitian_min_pivot(tol).is_some_and(|p| p > 0)
    }

    /// Sign of the smallest `LDL*` pivot: `Some(1)` positive definite,
    /// `Some(0)` degenerate, `Some(-1)` indefinite or negative. `None` if
    /// the matrix is not Hermitian.
    pub fn hermitian_min_pivot(&self, tol: f64) -> Option<i8> {
        let n = self.rows;
        if n != self.cols {
            return None;
        }
        let scale = self.max_abs().max(1.0);
        if !(&self.adjoint() - self).is_zero(tol * scale) {
            return None;
        }
        let mut a = self.clone();
        for k in 0..n {
            let d = a[(k, k)].clone();
            let s = d.re_sign(tol * scale);
            if s <= 0 {
                return Some(s);
            }
            for i in (k + 1)..n {
                let f = a[(i, k)].clone() / d.clone();
                for j in k..n {
                    let v = a[(i, j)].clone() - f.clone() * a[(k, j)].clone();
                    a[(i, j)] = v;
                }
            }
        }
        Some(1)
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    fn index(&self, (r, c): (usize, usize)) -> &S {
        &self.data[r * self.cols + c]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut S {
        &mut self.data[r * self.cols + c]
    }
}

impl<S: Scalar> Add for &Matrix<S> {
    type Output = Matrix<S>;
    fn add(self, rhs: &Matrix<S>) -> Matrix<S> {
        assert_eq!(self.shape(), rhs.shape());
        Matrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)].clone() + rhs[(r, c)].clone())
    }
}

impl<S: Scalar> Sub for &Matrix<S> {
    type Output = Matrix<S>;
    fn sub(self, rhs: &Matrix<S>) -> Matrix<S> {
        assert_eq!(self.shape(), rhs.shape());
        Matrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)].clone() - rhs[(r, c)].clone())
    }
}

impl<S: Scalar> Neg for &Matrix<S> {
    type Output = Matrix<S>;
    fn neg(self) -> Matrix<S> {
        Matrix::from_fn(self.rows, self.cols, |r, c| -self[(r, c)].clone())
    }
}

impl<S: Scalar> Mul for &Matrix<S> {
    type Output = Matrix<S>;
    fn mul(self, rhs: &Matrix<S>) -> Matrix<S> {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out: Matrix<S> = Matrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let v = out[(r, c)].clone() + a.clone() * rhs[(k, c)].clone();
                    out[(r, c)] = v;
                }
            }
        }
        out
    }
}

/// Dot product without conjugation.
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}
